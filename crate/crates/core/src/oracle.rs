//! Brute-force reference answers built only from model-level operations.
//!
//! Nothing here touches the transformed text or any index structure; the
//! acceptance tests compare every index against these functions.

use crate::listing::Metric;
use crate::model::{meets, occurrence_probability, DocumentCollection, Symbol, UncertainString};

/// Which occurrences count towards a document's relevance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    /// Every occurrence with nonzero probability.
    Full,
    /// Only occurrences with probability at least the given floor.
    AtLeast(f64),
}

/// Every start with nonzero probability, with that probability.
pub fn oracle_probabilities(u: &UncertainString, p: &[Symbol]) -> Vec<(usize, f64)> {
    if p.is_empty() || p.len() > u.len() {
        return Vec::new();
    }
    (1..=u.len() + 1 - p.len())
        .map(|i| (i, occurrence_probability(u, p, i).expect("window in range")))
        .filter(|&(_, prob)| prob > 0.0)
        .collect()
}

/// `{ i : occurrence_probability(u, p, i) >= tau }`, ascending.
pub fn oracle_search(u: &UncertainString, p: &[Symbol], tau: f64) -> Vec<usize> {
    oracle_probabilities(u, p)
        .into_iter()
        .filter(|&(_, prob)| meets(prob, tau))
        .map(|(i, _)| i)
        .collect()
}

pub fn oracle_relevance(d: &UncertainString, p: &[Symbol], metric: Metric, support: Support) -> f64 {
    let probs: Vec<f64> = oracle_probabilities(d, p)
        .into_iter()
        .map(|(_, prob)| prob)
        .filter(|&prob| match support {
            Support::Full => true,
            Support::AtLeast(floor) => meets(prob, floor),
        })
        .collect();
    match (probs.len(), metric) {
        (0, _) => 0.0,
        (1, _) => probs[0],
        (_, Metric::Max) => probs.iter().fold(0.0, |a, &b| if b > a { b } else { a }),
        (_, Metric::Or) => probs.iter().sum::<f64>() - probs.iter().product::<f64>(),
        (_, Metric::OrIndependent) => {
            let mut none = 1.0;
            for q in &probs {
                none *= 1.0 - q;
            }
            1.0 - none
        }
    }
}

/// Indices (0-based) of the documents whose relevance meets `tau`.
pub fn oracle_list(
    docs: &DocumentCollection,
    p: &[Symbol],
    tau: f64,
    metric: Metric,
    support: Support,
) -> Vec<usize> {
    docs.docs()
        .iter()
        .enumerate()
        .filter(|(_, d)| {
            let r = oracle_relevance(d, p, metric, support);
            r > 0.0 && meets(r, tau)
        })
        .map(|(j, _)| j)
        .collect()
}
