//! Seeded index-versus-oracle suites.
//!
//! Instances are small random uncertain strings (and collections); patterns
//! are drawn from sampled possible worlds plus random strings that never
//! occur. Every checker returns the first disagreement it finds.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::approx::LinkIndex;
use crate::datagen::{generate, random_corpus, GenConfig};
use crate::error::Result;
use crate::factorize::{conservation_check, TransformedText};
use crate::listing::{ListingIndex, Metric};
use crate::model::{pattern_string, DocumentCollection, Symbol, UncertainString};
use crate::oracle::{oracle_list, oracle_probabilities, oracle_search, Support};
use crate::qindex::SubstringIndex;

const ALPHABET: &str = "ACGT";
const THETAS: [f64; 3] = [0.1, 0.3, 0.5];
pub const TAU_MINS: [f64; 3] = [0.05, 0.1, 0.2];

/// A random uncertain string of length `1..=max_len` over at most four
/// letters. About 30% of the instances carry correlations.
pub fn random_instance(seed: u64, max_len: usize) -> UncertainString {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_len.max(1));
    let sigma = rng.gen_range(2..=ALPHABET.len());
    let alphabet = &ALPHABET[..sigma];
    let corpus = random_corpus(n, alphabet, rng.gen()).expect("valid alphabet");
    let correlated = rng.gen_bool(0.3);
    let mut cfg = GenConfig {
        theta: THETAS[rng.gen_range(0..THETAS.len())],
        choices: rng.gen_range(2..=3),
        edit_radius: 4,
        neighborhood_samples: rng.gen_range(1..=12),
        seed: rng.gen(),
        alphabet: Some(alphabet.to_string()),
        correlation_rate: if correlated { 1.0 } else { 0.0 },
    };
    let name = format!("s{seed}");
    let mut u = generate(&name, &corpus, &cfg).expect("generator output is valid");
    // Sparse uncertain positions may leave no pair close enough; retry with
    // more of them rather than silently dropping the correlation.
    for theta in [0.5, 0.8, 1.0] {
        if !correlated || u.has_correlations() {
            break;
        }
        cfg.theta = theta;
        u = generate(&name, &corpus, &cfg).expect("generator output is valid");
    }
    u
}

/// A random collection of `1..=max_docs` strings with at most `max_total`
/// positions overall.
pub fn random_collection(seed: u64, max_docs: usize, max_total: usize) -> DocumentCollection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=max_docs.max(1));
    let per_doc = (max_total / d).max(1);
    let docs = (0..d)
        .map(|j| random_instance(rng.gen(), per_doc).with_name(format!("d{}", j + 1)))
        .collect();
    DocumentCollection::new(docs)
}

fn sample_world(u: &UncertainString, rng: &mut ChaCha8Rng) -> Vec<Symbol> {
    u.positions()
        .iter()
        .map(|d| {
            let mut x: f64 = rng.gen();
            for &(s, p) in d.entries() {
                if x < p {
                    return s;
                }
                x -= p;
            }
            d.entries().last().unwrap().0
        })
        .collect()
}

/// Substrings of sampled worlds, lengths `1..=max_len`, deduplicated.
pub fn world_patterns(u: &UncertainString, count: usize, max_len: usize, seed: u64) -> Vec<Vec<Symbol>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<Symbol>> = Vec::with_capacity(count);
    for _ in 0..count * 4 {
        if out.len() == count {
            break;
        }
        let w = sample_world(u, &mut rng);
        let len = rng.gen_range(1..=max_len.min(w.len()));
        let start = rng.gen_range(0..=w.len() - len);
        let p = w[start..start + len].to_vec();
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Windows of exactly `len` symbols from sampled worlds, duplicates kept.
/// Empty when the string is shorter than `len`.
pub fn sampled_windows(u: &UncertainString, count: usize, len: usize, seed: u64) -> Vec<Vec<Symbol>> {
    if len == 0 || len > u.len() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let w = sample_world(u, &mut rng);
            let start = rng.gen_range(0..=w.len() - len);
            w[start..start + len].to_vec()
        })
        .collect()
}

/// Random strings with no occurrence of nonzero probability.
pub fn absent_patterns(u: &UncertainString, count: usize, max_len: usize, seed: u64) -> Vec<Vec<Symbol>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters: Vec<Symbol> = "ACGTZ".bytes().map(|b| Symbol::new(b).unwrap()).collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count * 20 {
        if out.len() == count {
            break;
        }
        let len = rng.gen_range(1..=max_len);
        let p: Vec<Symbol> = (0..len).map(|_| letters[rng.gen_range(0..letters.len())]).collect();
        if oracle_probabilities(u, &p).is_empty() && !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// `tau_min, 2 tau_min, ...` up to 1, plus 1 itself.
pub fn tau_grid(tau_min: f64) -> Vec<f64> {
    let mut out: Vec<f64> = (1..)
        .map(|k| k as f64 * tau_min)
        .take_while(|&t| t < 1.0 - 1e-12)
        .collect();
    out.push(1.0);
    out
}

/// First disagreement between an index and the oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub instance: String,
    pub pattern: String,
    pub tau: f64,
    pub expected: Vec<usize>,
    pub got: Vec<usize>,
    pub what: &'static str,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} on {}: pattern {:?} tau {}: expected {:?}, got {:?}",
            self.what, self.instance, self.pattern, self.tau, self.expected, self.got
        )
    }
}

pub fn check_substring(
    u: &UncertainString,
    ix: &SubstringIndex,
    patterns: &[Vec<Symbol>],
    taus: &[f64],
) -> Result<Option<Mismatch>> {
    for p in patterns {
        for &tau in taus {
            let got = ix.query(p, tau)?;
            let expected = oracle_search(u, p, tau);
            if got != expected {
                return Ok(Some(Mismatch {
                    instance: u.name().to_string(),
                    pattern: pattern_string(p),
                    tau,
                    expected,
                    got,
                    what: "substring search",
                }));
            }
        }
    }
    Ok(None)
}

pub fn check_listing(
    docs: &DocumentCollection,
    ix: &ListingIndex,
    patterns: &[Vec<Symbol>],
    taus: &[f64],
) -> Result<Option<Mismatch>> {
    let support = Support::AtLeast(ix.tau_min());
    for p in patterns {
        for &tau in taus {
            let got = ix.list(p, tau)?;
            let expected = oracle_list(docs, p, tau, ix.metric(), support);
            if got != expected {
                return Ok(Some(Mismatch {
                    instance: format!("{}-document collection ({})", docs.len(), ix.metric()),
                    pattern: pattern_string(p),
                    tau,
                    expected,
                    got,
                    what: "listing",
                }));
            }
        }
    }
    Ok(None)
}

/// Sandwich check `exact(tau) ⊆ approx(tau) ⊆ exact(tau - epsilon)`, and
/// equality when epsilon is below 1e-6.
pub fn check_approx(
    u: &UncertainString,
    ix: &LinkIndex,
    patterns: &[Vec<Symbol>],
    taus: &[f64],
) -> Result<Option<Mismatch>> {
    let eps = ix.epsilon();
    for p in patterns {
        for &tau in taus {
            let got = ix.query(p, tau)?;
            let exact = oracle_search(u, p, tau);
            let loose = oracle_search(u, p, tau - eps);
            let ok = if eps < 1e-6 {
                got == exact
            } else {
                exact.iter().all(|i| got.contains(i)) && got.iter().all(|i| loose.contains(i))
            };
            if !ok {
                return Ok(Some(Mismatch {
                    instance: u.name().to_string(),
                    pattern: pattern_string(p),
                    tau,
                    expected: exact,
                    got,
                    what: "approximate search",
                }));
            }
        }
    }
    Ok(None)
}

pub fn check_conservation(u: &UncertainString, tt: &TransformedText) -> Option<Mismatch> {
    conservation_check(u, tt.tau_min(), tt).err().map(|(p, i)| Mismatch {
        instance: u.name().to_string(),
        pattern: pattern_string(&p),
        tau: tt.tau_min(),
        expected: vec![i],
        got: Vec::new(),
        what: "conservation",
    })
}

/// Summary of a seeded verification run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub instances: usize,
    pub queries: usize,
    pub mismatch: Option<Mismatch>,
}

/// Substring search, conservation, approximate search (epsilon .05) and
/// listing (max and or metrics) on `count` seeded instances of length at
/// most `max_len`.
pub fn verify_seeded(count: usize, seed: u64, max_len: usize) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let cfg = crate::qindex::IndexConfig::default();
    for k in 0..count as u64 {
        let s = seed.wrapping_mul(1_000_003).wrapping_add(k);
        let u = random_instance(s, max_len);
        let tau_min = TAU_MINS[(k % 3) as usize];
        let mut patterns = world_patterns(&u, 30, 8, s ^ 0x5eed);
        patterns.extend(absent_patterns(&u, 10, 8, s ^ 0xab5e));
        let taus = tau_grid(tau_min);
        report.instances += 1;
        let ix = SubstringIndex::build(&u, tau_min, &cfg)?;
        report.queries += patterns.len() * taus.len();
        if let Some(m) = check_substring(&u, &ix, &patterns, &taus)? {
            report.mismatch = Some(m);
            return Ok(report);
        }
        if u.len() <= 40 {
            if let Some(m) = check_conservation(&u, ix.transformed()) {
                report.mismatch = Some(m);
                return Ok(report);
            }
        }
        let ax = LinkIndex::from_transformed(ix.transformed().clone(), 0.05);
        report.queries += patterns.len() * taus.len();
        if let Some(m) = check_approx(&u, &ax, &patterns, &taus)? {
            report.mismatch = Some(m);
            return Ok(report);
        }
        let docs = random_collection(s ^ 0xc011, 4, 60);
        let mut doc_patterns = Vec::new();
        for (j, d) in docs.docs().iter().enumerate() {
            doc_patterns.extend(world_patterns(d, 8, 6, s ^ j as u64));
        }
        for metric in [Metric::Max, Metric::Or] {
            let lx = ListingIndex::build(&docs, tau_min, metric, &cfg)?;
            report.queries += doc_patterns.len() * taus.len();
            if let Some(m) = check_listing(&docs, &lx, &doc_patterns, &taus)? {
                report.mismatch = Some(m);
                return Ok(report);
            }
        }
    }
    Ok(report)
}
