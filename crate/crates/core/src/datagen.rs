//! Seeded synthetic uncertain strings.
//!
//! A fraction `theta` of the positions of a deterministic corpus become
//! uncertain. The distribution at such a position comes from random edit
//! variants of the window around it: each variant applies up to
//! `edit_radius` random substitutions, insertions and deletions, and the
//! letter that ends up at the tracked center position is counted. The most
//! frequent letters (plus smoothing) form the distribution.
//!
//! All randomness comes from ChaCha8 seeded with `seed`, so equal inputs give
//! identical strings on every platform.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Correlation, PositionDistribution, Symbol, UncertainString};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    /// Fraction of positions that receive several alternatives.
    pub theta: f64,
    /// Mean number of alternatives at an uncertain position.
    pub choices: usize,
    pub edit_radius: usize,
    pub neighborhood_samples: usize,
    pub seed: u64,
    /// Letters to draw substitutions and padding from; defaults to the
    /// corpus letters, extended with `A..Z` when there are too few.
    pub alphabet: Option<String>,
    /// Chance that an uncertain position gets a correlation with a nearby
    /// uncertain position.
    pub correlation_rate: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            theta: 0.3,
            choices: 5,
            edit_radius: 4,
            neighborhood_samples: 200,
            seed: 0,
            alphabet: None,
            correlation_rate: 0.0,
        }
    }
}

impl GenConfig {
    fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Argument(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        if self.choices < 2 {
            return Err(Error::Argument(format!("choices must be at least 2, got {}", self.choices)));
        }
        if !(0.0..=1.0).contains(&self.correlation_rate) {
            return Err(Error::Argument(format!(
                "correlation rate must lie in [0, 1], got {}",
                self.correlation_rate
            )));
        }
        Ok(())
    }
}

fn symbols(s: &str, what: &str) -> Result<Vec<Symbol>> {
    s.bytes()
        .map(|b| Symbol::new(b).ok_or_else(|| Error::Argument(format!("{what} contains unusable byte {b:#04x}"))))
        .collect()
}

fn alphabet_for(corpus: &[Symbol], cfg: &GenConfig) -> Result<Vec<Symbol>> {
    let mut alpha = match &cfg.alphabet {
        Some(a) => symbols(a, "alphabet")?,
        None => corpus.to_vec(),
    };
    alpha.sort();
    alpha.dedup();
    let want = (2 * cfg.choices - 2).max(2);
    let fill = (b'A'..=b'Z').chain(b'a'..=b'z').chain(b'0'..=b'9');
    for b in fill {
        if alpha.len() >= want {
            break;
        }
        let s = Symbol::new(b).unwrap();
        if !alpha.contains(&s) {
            alpha.push(s);
        }
    }
    alpha.sort();
    Ok(alpha)
}

/// Letter left at the tracked center after `edits` random edits of a window
/// of length `len`, or `None` if the center was deleted.
fn edited_center(
    rng: &mut ChaCha8Rng,
    alpha: &[Symbol],
    mut len: usize,
    mut center: usize,
    mut letter: Symbol,
    edits: usize,
) -> Option<Symbol> {
    for _ in 0..edits {
        match rng.gen_range(0..3) {
            0 => {
                if rng.gen_range(0..len) == center {
                    letter = alpha[rng.gen_range(0..alpha.len())];
                }
            }
            1 => {
                if rng.gen_range(0..=len) <= center {
                    center += 1;
                }
                len += 1;
            }
            _ => {
                let at = rng.gen_range(0..len);
                if at == center {
                    return None;
                }
                if at < center {
                    center -= 1;
                }
                len -= 1;
            }
        }
    }
    Some(letter)
}

fn neighborhood_distribution(
    rng: &mut ChaCha8Rng,
    corpus: &[Symbol],
    alpha: &[Symbol],
    i: usize,
    cfg: &GenConfig,
) -> PositionDistribution {
    let r = cfg.edit_radius;
    let lo = i.saturating_sub(r);
    let hi = (i + r + 1).min(corpus.len());
    let mut counts = vec![0usize; alpha.len()];
    for _ in 0..cfg.neighborhood_samples {
        let edits = if r == 0 { 0 } else { rng.gen_range(1..=r) };
        if let Some(s) = edited_center(rng, alpha, hi - lo, i - lo, corpus[i], edits) {
            counts[alpha.binary_search(&s).unwrap()] += 1;
        }
    }
    let k = rng.gen_range(2..=2 * cfg.choices - 2).min(alpha.len());
    let mut order: Vec<usize> = (0..alpha.len()).collect();
    order.sort_by_key(|&a| (std::cmp::Reverse(counts[a]), a));
    order.truncate(k);
    let total: usize = order.iter().map(|&a| counts[a] + 1).sum();
    PositionDistribution::new(
        order
            .iter()
            .map(|&a| (alpha[a], (counts[a] + 1) as f64 / total as f64)),
    )
}

/// Turns a deterministic corpus into an uncertain string.
pub fn generate(name: &str, corpus: &str, cfg: &GenConfig) -> Result<UncertainString> {
    cfg.check()?;
    let text = symbols(corpus, "corpus")?;
    if text.is_empty() {
        return Err(Error::Argument("empty corpus".into()));
    }
    let alpha = alphabet_for(&text, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = text.len();
    let k = ((cfg.theta * n as f64).round() as usize).min(n);
    let mut uncertain: Vec<usize> = sample(&mut rng, n, k).into_vec();
    uncertain.sort_unstable();
    let mut positions: Vec<PositionDistribution> = text.iter().map(|&s| PositionDistribution::certain(s)).collect();
    for &i in &uncertain {
        positions[i] = neighborhood_distribution(&mut rng, &text, &alpha, i, cfg);
    }
    let mut correlations = Vec::new();
    if cfg.correlation_rate > 0.0 {
        for (a, &i) in uncertain.iter().enumerate() {
            if !rng.gen_bool(cfg.correlation_rate) {
                continue;
            }
            let near: Vec<usize> = uncertain
                .iter()
                .enumerate()
                .filter(|&(b, &j)| b != a && j.abs_diff(i) <= 3)
                .map(|(_, &j)| j)
                .collect();
            if near.is_empty() {
                continue;
            }
            let j = near[rng.gen_range(0..near.len())];
            let src = positions[i].entries()[rng.gen_range(0..positions[i].len())];
            let cond = positions[j].entries()[rng.gen_range(0..positions[j].len())];
            if let Some(c) = consistent_correlation(&mut rng, i + 1, src, j + 1, cond) {
                correlations.push(c);
            }
        }
    }
    let u = UncertainString::new(name, positions, correlations);
    u.ensure_valid()?;
    Ok(u)
}

/// A correlation whose marginal reproduces the stored base probability
/// `b` of the source: `a * p_plus + (1 - a) * p_minus = b`.
fn consistent_correlation(
    rng: &mut ChaCha8Rng,
    src_pos: usize,
    (src_sym, b): (Symbol, f64),
    cond_pos: usize,
    (cond_sym, a): (Symbol, f64),
) -> Option<Correlation> {
    if a >= 1.0 {
        return None;
    }
    let lo = ((b - (1.0 - a)) / a).max(0.0);
    let hi = (b / a).min(1.0);
    let p_plus = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
    let p_minus = ((b - a * p_plus) / (1.0 - a)).clamp(0.0, 1.0);
    Some(Correlation {
        src_pos,
        src_sym,
        cond_pos,
        cond_sym,
        p_plus,
        p_minus,
    })
}

/// Uniform random text over `alphabet`.
pub fn random_corpus(len: usize, alphabet: &str, seed: u64) -> Result<String> {
    let alpha = symbols(alphabet, "alphabet")?;
    if alpha.is_empty() {
        return Err(Error::Argument("empty alphabet".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..len).map(|_| alpha[rng.gen_range(0..alpha.len())].as_char()).collect())
}

/// Splits a corpus into consecutive chunks with normally distributed
/// lengths (at least 1).
pub fn chunk_corpus(corpus: &str, mean: f64, sd: f64, seed: u64) -> Result<Vec<String>> {
    let normal = Normal::new(mean, sd).map_err(|e| Error::Argument(format!("chunk length distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut rest = corpus;
    while !rest.is_empty() {
        let len = (normal.sample(&mut rng).round().max(1.0) as usize).min(rest.len());
        let (head, tail) = rest.split_at(len);
        out.push(head.to_string());
        rest = tail;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;

    fn cfg(theta: f64, choices: usize, seed: u64) -> GenConfig {
        GenConfig {
            theta,
            choices,
            seed,
            ..GenConfig::default()
        }
    }

    #[test]
    fn theta_zero_is_deterministic() {
        let u = generate("g", "PSFPQPAIASA", &cfg(0.0, 5, 1)).unwrap();
        assert!(u.positions().iter().all(|d| d.len() == 1 && d.entries()[0].1 == 1.0));
    }

    #[test]
    fn theta_one_every_position_uncertain() {
        let u = generate("g", "AAAA", &cfg(1.0, 2, 7)).unwrap();
        for d in u.positions() {
            assert!(d.len() >= 2);
            assert!((d.total() - 1.0).abs() < 1e-9);
        }
        assert!(validate(&u).is_empty());
    }

    #[test]
    fn seeded_output_is_reproducible() {
        let corpus = random_corpus(300, "ACGT", 3).unwrap();
        let mut c = cfg(0.4, 3, 11);
        c.correlation_rate = 0.5;
        assert_eq!(generate("a", &corpus, &c).unwrap(), generate("a", &corpus, &c).unwrap());
        c.seed = 12;
        assert_ne!(generate("a", &corpus, &c).unwrap(), generate("a", &corpus, &cfg(0.4, 3, 11)).unwrap());
    }

    #[test]
    fn theta_fraction_is_respected() {
        let corpus = random_corpus(800, "ACDEFGHIKLMNPQRSTVWY", 5).unwrap();
        for theta in [0.1, 0.3, 0.5, 0.9] {
            let u = generate("g", &corpus, &cfg(theta, 5, 2)).unwrap();
            let frac = u.positions().iter().filter(|d| d.len() > 1).count() as f64 / 800.0;
            assert!((frac - theta).abs() <= 0.05, "theta {theta} got {frac}");
        }
    }

    #[test]
    fn correlations_preserve_marginals() {
        let corpus = random_corpus(200, "ACGT", 9).unwrap();
        let mut c = cfg(0.5, 2, 4);
        c.correlation_rate = 1.0;
        let u = generate("g", &corpus, &c).unwrap();
        assert!(u.has_correlations());
        assert!(validate(&u).is_empty());
        for corr in u.correlations() {
            let base = u.position(corr.src_pos).prob(corr.src_sym);
            assert!((u.marginal(corr) - base).abs() < 1e-9);
        }
    }

    #[test]
    fn chunking_covers_corpus() {
        let corpus = random_corpus(1000, "AB", 1).unwrap();
        let chunks = chunk_corpus(&corpus, 50.0, 10.0, 2).unwrap();
        assert_eq!(chunks.concat(), corpus);
        assert!(chunks.iter().all(|c| !c.is_empty()));
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(generate("g", "", &cfg(0.5, 2, 0)).is_err());
        assert!(generate("g", "AB", &cfg(1.5, 2, 0)).is_err());
        assert!(generate("g", "AB", &cfg(0.5, 1, 0)).is_err());
        assert!(generate("g", "A$B", &cfg(0.5, 2, 0)).is_err());
    }
}
