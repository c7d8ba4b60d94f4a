//! Uncertain-string listing: which documents of a collection contain `p`
//! with relevance at least `tau`.
//!
//! The collection is transformed document by document into one text. For
//! every depth `i <= m_short` and every group of suffixes sharing a length-`i`
//! prefix, each document keeps one entry (at its leftmost slot) holding its
//! relevance for that prefix; all other slots hold 0. A query then runs the
//! same recursive range-maximum search as substring search, and each
//! reported slot is a distinct document.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorize::{transform_collection, TransformedText};
use crate::model::{meets, occurrence_probability, DocumentCollection, Symbol, UncertainString, PROB_EPS};
use crate::qindex::{default_m_short, depth_groups, prefix_values, IndexConfig, QueryStats};
use crate::textcore::{pattern_codes, RmqIndex, SuffixArrayIndex};

/// How the occurrence probabilities of a pattern in one document combine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    /// Best single occurrence.
    Max,
    /// `sum - product` of the occurrence probabilities.
    Or,
    /// `1 - prod(1 - p)`: probability that at least one occurrence is real,
    /// treating occurrences as independent.
    OrIndependent,
}

impl Metric {
    /// Relevance of a document with the given occurrence probabilities. A
    /// single occurrence is its own relevance under every metric.
    pub fn aggregate(self, probs: &[f64]) -> f64 {
        match probs {
            [] => 0.0,
            [p] => *p,
            _ => match self {
                Metric::Max => probs.iter().copied().fold(0.0, f64::max),
                Metric::Or => probs.iter().sum::<f64>() - probs.iter().product::<f64>(),
                Metric::OrIndependent => 1.0 - probs.iter().map(|p| 1.0 - p).product::<f64>(),
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Max => "max",
            Metric::Or => "or",
            Metric::OrIndependent => "orx",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Metric::Max),
            "or" => Ok(Metric::Or),
            "orx" => Ok(Metric::OrIndependent),
            _ => Err(Error::Argument(format!("unknown metric `{s}` (expected max, or, orx)"))),
        }
    }
}

/// Relevance of `p` in `d` over all occurrences with nonzero probability.
pub fn relevance(d: &UncertainString, p: &[Symbol], metric: Metric) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::Argument("empty pattern".into()));
    }
    if p.len() > d.len() {
        return Ok(0.0);
    }
    let mut probs = Vec::new();
    for i in 1..=d.len() + 1 - p.len() {
        let prob = occurrence_probability(d, p, i)?;
        if prob > 0.0 {
            probs.push(prob);
        }
    }
    Ok(metric.aggregate(&probs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ListingIndex {
    names: Vec<String>,
    metric: Metric,
    tt: TransformedText,
    sa: SuffixArrayIndex,
    m_short: usize,
    // short[i - 1] is R_i.
    short: Vec<RmqIndex>,
}

impl ListingIndex {
    pub fn build(docs: &DocumentCollection, tau_min: f64, metric: Metric, cfg: &IndexConfig) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::Argument("empty document collection".into()));
        }
        let violations = docs.validate();
        if !violations.is_empty() {
            return Err(Error::Invalid {
                name: "collection".into(),
                violations,
            });
        }
        let tt = transform_collection(docs, tau_min, &cfg.transform)?;
        let sa = SuffixArrayIndex::build(tt.text().to_vec());
        let m_short = cfg.m_short.unwrap_or_else(|| default_m_short(tt.len())).max(1);
        let depth = m_short.min(tt.longest_factor());
        let short = (1..=depth)
            .map(|i| RmqIndex::new(Self::relevance_table(&tt, &sa, i, metric)))
            .collect();
        Ok(ListingIndex {
            names: docs.docs().iter().map(|d| d.name().to_string()).collect(),
            metric,
            tt,
            sa,
            m_short,
            short,
        })
    }

    /// `R_i`: one relevance entry per document per depth-`i` group.
    fn relevance_table(tt: &TransformedText, sa: &SuffixArrayIndex, i: usize, metric: Metric) -> Vec<f64> {
        let probs = prefix_values(tt, sa, i);
        let mut values = vec![0.0; probs.len()];
        let tau_min = tt.tau_min();
        // (doc, position, slot, prob) of the qualifying entries in a group.
        let mut entries: Vec<(usize, usize, usize, f64)> = Vec::new();
        let mut doc_probs = Vec::new();
        for (s, e) in depth_groups(sa.lcp(), i) {
            entries.clear();
            for (k, &prob) in probs.iter().enumerate().take(e).skip(s) {
                if prob > 0.0 && meets(prob, tau_min) {
                    let p = tt.pos(sa.sa()[k] as usize).unwrap();
                    entries.push((tt.doc_of_position(p), p, k, prob));
                }
            }
            entries.sort_unstable_by_key(|&(d, p, k, _)| (d, p, k));
            let mut j = 0;
            while j < entries.len() {
                let doc = entries[j].0;
                let mut first_slot = usize::MAX;
                doc_probs.clear();
                while j < entries.len() && entries[j].0 == doc {
                    let (_, p, k, prob) = entries[j];
                    first_slot = first_slot.min(k);
                    if j == 0 || entries[j - 1].0 != doc || entries[j - 1].1 != p {
                        doc_probs.push(prob);
                    }
                    j += 1;
                }
                values[first_slot] = metric.aggregate(&doc_probs);
            }
        }
        values
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn tau_min(&self) -> f64 {
        self.tt.tau_min()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn m_short(&self) -> usize {
        self.m_short
    }

    pub fn transformed(&self) -> &TransformedText {
        &self.tt
    }

    pub fn suffix_array(&self) -> &SuffixArrayIndex {
        &self.sa
    }

    pub fn relevance_table_at(&self, i: usize) -> Option<&[f64]> {
        self.short.get(i.checked_sub(1)?).map(|r| r.values())
    }

    /// Indices of the documents whose relevance for `p` meets `tau`.
    pub fn list(&self, p: &[Symbol], tau: f64) -> Result<Vec<usize>> {
        Ok(self.list_detailed(p, tau)?.0.into_iter().map(|(d, _)| d).collect())
    }

    /// `(document, relevance)` pairs sorted by document, with work counters.
    pub fn list_detailed(&self, p: &[Symbol], tau: f64) -> Result<(Vec<(usize, f64)>, QueryStats)> {
        if tau.is_nan() {
            return Err(Error::Argument("tau is NaN".into()));
        }
        if tau < self.tau_min() - PROB_EPS {
            return Err(Error::Threshold {
                tau,
                tau_min: self.tau_min(),
            });
        }
        if p.is_empty() {
            return Err(Error::Argument("empty pattern".into()));
        }
        let mut stats = QueryStats::default();
        let codes = pattern_codes(p);
        let Some((sp, ep)) = self.sa.suffix_range_counted(&codes, &mut stats.range_steps) else {
            return Ok((Vec::new(), stats));
        };
        let m = p.len();
        let mut out = Vec::new();
        if let Some(rmq) = self.short.get(m - 1).filter(|_| m <= self.m_short) {
            let mut stack = vec![(sp, ep)];
            while let Some((l, r)) = stack.pop() {
                stats.rmq_calls += 1;
                let k = rmq.argmax(l, r);
                let v = rmq.value(k);
                if v <= 0.0 || !meets(v, tau) {
                    continue;
                }
                let pos = self.tt.pos(self.sa.sa()[k] as usize).unwrap();
                out.push((self.tt.doc_of_position(pos), v));
                if k > l {
                    stack.push((l, k - 1));
                }
                if k < r {
                    stack.push((k + 1, r));
                }
            }
        } else {
            let mut per_doc: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
            for k in sp..=ep {
                stats.scanned += 1;
                let o = self.sa.sa()[k] as usize;
                let prob = self.tt.window_probability(o, m);
                if prob > 0.0 && meets(prob, self.tau_min()) {
                    let pos = self.tt.pos(o).unwrap();
                    per_doc
                        .entry(self.tt.doc_of_position(pos))
                        .or_default()
                        .insert(pos, prob);
                }
            }
            for (doc, occ) in per_doc {
                let probs: Vec<f64> = occ.into_values().collect();
                let rel = self.metric.aggregate(&probs);
                if meets(rel, tau) {
                    out.push((doc, rel));
                }
            }
        }
        out.sort_unstable_by_key(|&(d, _)| d);
        debug_assert!(out.windows(2).all(|w| w[0].0 != w[1].0));
        stats.outputs = out.len() as u64;
        Ok((out, stats))
    }

    pub fn heap_bytes(&self) -> usize {
        self.tt.heap_bytes() + self.sa.heap_bytes() + self.short.iter().map(|r| r.heap_bytes()).sum::<usize>()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::pattern;
    use crate::oracle::{oracle_list, Support};
    use crate::qindex::SubstringIndex;

    pub fn collection() -> DocumentCollection {
        DocumentCollection::new(vec![
            ustr(
                "d1",
                &[
                    &[('A', 0.4), ('B', 0.3), ('F', 0.3)],
                    &[('B', 0.3), ('L', 0.3), ('F', 0.3), ('J', 0.1)],
                    &[('F', 0.5), ('J', 0.5)],
                ],
            ),
            ustr(
                "d2",
                &[
                    &[('A', 0.6), ('C', 0.4)],
                    &[('B', 0.5), ('F', 0.3), ('J', 0.2)],
                    &[('B', 0.4), ('C', 0.3), ('E', 0.2), ('F', 0.1)],
                ],
            ),
            ustr(
                "d3",
                &[
                    &[('A', 0.4), ('F', 0.4), ('P', 0.2)],
                    &[('I', 0.3), ('L', 0.3), ('P', 0.3), ('T', 0.1)],
                    &[('A', 1.0)],
                ],
            ),
        ])
    }

    fn build(docs: &DocumentCollection, tau_min: f64, metric: Metric) -> ListingIndex {
        ListingIndex::build(docs, tau_min, metric, &IndexConfig::default()).unwrap()
    }

    #[test]
    fn listing_examples() {
        let docs = collection();
        let ix = build(&docs, 0.1, Metric::Max);
        assert_eq!(ix.list(&pattern("BF").unwrap(), 0.1).unwrap(), vec![0]);
        assert_eq!(ix.list(&pattern("A").unwrap(), 0.4).unwrap(), vec![0, 1, 2]);
        assert!(ix.list(&pattern("ZZ").unwrap(), 0.1).unwrap().is_empty());
    }

    #[test]
    fn bf_partition_holds_d1() {
        let docs = collection();
        let ix = build(&docs, 0.1, Metric::Max);
        let codes = pattern_codes(&pattern("BF").unwrap());
        let (sp, ep) = ix.suffix_array().suffix_range(&codes).unwrap();
        let r2 = ix.relevance_table_at(2).unwrap();
        let kept: Vec<(usize, f64)> = (sp..=ep)
            .filter(|&k| r2[k] > 0.0)
            .map(|k| {
                let pos = ix.transformed().pos(ix.suffix_array().sa()[k] as usize).unwrap();
                (ix.transformed().doc_of_position(pos), r2[k])
            })
            .collect();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].0, 0);
        assert!((kept[0].1 - 0.15).abs() < 1e-9);
    }

    #[test]
    fn relevance_examples() {
        let s = ustr(
            "s",
            &[
                &[('A', 0.4), ('B', 0.3), ('F', 0.3)],
                &[('B', 0.3), ('L', 0.3), ('F', 0.3), ('J', 0.1)],
                &[('A', 0.5), ('F', 0.5)],
                &[('A', 0.6), ('B', 0.4)],
                &[('B', 0.5), ('F', 0.3), ('J', 0.2)],
                &[('A', 0.4), ('C', 0.3), ('E', 0.2), ('F', 0.1)],
            ],
        );
        let p = pattern("BFA").unwrap();
        assert!((relevance(&s, &p, Metric::Max).unwrap() - 0.09).abs() < 1e-9);
        assert!((relevance(&s, &p, Metric::Or).unwrap() - 0.18281).abs() < 1e-5);
        let orx = 1.0 - (1.0 - 0.045) * (1.0 - 0.09) * (1.0 - 0.048);
        assert!((relevance(&s, &p, Metric::OrIndependent).unwrap() - orx).abs() < 1e-9);
        for m in [Metric::Max, Metric::Or, Metric::OrIndependent] {
            assert_eq!(relevance(&s, &pattern("Z").unwrap(), m).unwrap(), 0.0);
        }
    }

    #[test]
    fn aggregate_rules() {
        assert_eq!(Metric::Or.aggregate(&[]), 0.0);
        assert_eq!(Metric::Or.aggregate(&[0.3]), 0.3);
        assert!((Metric::Or.aggregate(&[0.5, 0.5]) - 0.75).abs() < 1e-12);
        assert_eq!("orx".parse::<Metric>().unwrap(), Metric::OrIndependent);
        assert!("sum".parse::<Metric>().is_err());
    }

    #[test]
    fn identical_documents_both_listed() {
        let d = genome();
        let docs = DocumentCollection::new(vec![d.clone().with_name("x"), d.with_name("y")]);
        for metric in [Metric::Max, Metric::Or] {
            let ix = build(&docs, 0.1, metric);
            assert_eq!(ix.list(&pattern("AT").unwrap(), 0.4).unwrap(), vec![0, 1]);
        }
    }

    #[test]
    fn single_document_matches_substring_search() {
        let u = genome();
        let docs = DocumentCollection::new(vec![u.clone()]);
        let ix = build(&docs, 0.1, Metric::Max);
        let sx = SubstringIndex::build(&u, 0.1, &IndexConfig::default()).unwrap();
        for p in ["A", "AT", "PSF", "QPA", "TPF", "FFF", "PFFPQPA"] {
            for tau in [0.1, 0.2, 0.4, 0.6] {
                let p = pattern(p).unwrap();
                let want = !sx.query(&p, tau).unwrap().is_empty();
                assert_eq!(!ix.list(&p, tau).unwrap().is_empty(), want);
            }
        }
    }

    #[test]
    fn matches_oracle_on_examples() {
        let docs = collection();
        for metric in [Metric::Max, Metric::Or, Metric::OrIndependent] {
            for m_short in [None, Some(1)] {
                let cfg = IndexConfig {
                    m_short,
                    ..IndexConfig::default()
                };
                let ix = ListingIndex::build(&docs, 0.05, metric, &cfg).unwrap();
                for p in ["A", "B", "F", "BF", "AB", "FJ", "AIA", "ALA", "FFF", "BFF"] {
                    for tau in [0.05, 0.1, 0.15, 0.3, 0.5] {
                        let p = pattern(p).unwrap();
                        let want = oracle_list(&docs, &p, tau, metric, Support::AtLeast(0.05));
                        assert_eq!(ix.list(&p, tau).unwrap(), want);
                    }
                }
            }
        }
    }

    #[test]
    fn threshold_error() {
        let ix = build(&collection(), 0.2, Metric::Max);
        assert!(matches!(
            ix.list(&pattern("A").unwrap(), 0.1),
            Err(Error::Threshold { .. })
        ));
    }
}
