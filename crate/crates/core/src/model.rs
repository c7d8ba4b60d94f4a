//! Uncertain strings: per-position character distributions with optional
//! pairwise correlations, plus the probability arithmetic shared by the rest
//! of the crate.
//!
//! Positions are 1-based throughout the public API.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for every probability comparison.
pub const PROB_EPS: f64 = 1e-9;

/// Largest string that [`enumerate_worlds`] accepts without a positive floor.
pub const MAX_UNBOUNDED_WORLD_LEN: usize = 12;

const MAX_WORLDS: usize = 1 << 22;

/// `true` when `prob` reaches `tau` under the crate-wide tolerance.
#[inline]
pub fn meets(prob: f64, tau: f64) -> bool {
    prob >= tau - PROB_EPS
}

/// A character of the input alphabet: any printable ASCII byte except the
/// separator `$` and the comment marker `#`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Symbol(u8);

impl Symbol {
    pub const SEPARATOR: u8 = b'$';

    pub fn new(byte: u8) -> Option<Symbol> {
        if byte.is_ascii_graphic() && byte != Self::SEPARATOR && byte != b'#' {
            Some(Symbol(byte))
        } else {
            None
        }
    }

    pub fn byte(self) -> u8 {
        self.0
    }

    pub fn as_char(self) -> char {
        self.0 as char
    }
}

impl TryFrom<u8> for Symbol {
    type Error = String;

    fn try_from(b: u8) -> std::result::Result<Self, Self::Error> {
        Symbol::new(b).ok_or_else(|| format!("byte {b:#04x} is not a valid symbol"))
    }
}

impl From<Symbol> for u8 {
    fn from(s: Symbol) -> u8 {
        s.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 as char)
    }
}

/// Converts a pattern string into symbols.
pub fn pattern(s: &str) -> Result<Vec<Symbol>> {
    s.bytes()
        .map(|b| {
            Symbol::new(b).ok_or_else(|| {
                Error::Argument(format!("pattern {s:?} contains invalid symbol {:?}", b as char))
            })
        })
        .collect()
}

pub fn pattern_string(p: &[Symbol]) -> String {
    p.iter().map(|s| s.as_char()).collect()
}

/// Probability distribution over the characters at one position.
///
/// Zero-probability alternatives are dropped on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionDistribution {
    entries: Vec<(Symbol, f64)>,
}

impl PositionDistribution {
    pub fn new(entries: impl IntoIterator<Item = (Symbol, f64)>) -> Self {
        PositionDistribution {
            entries: entries.into_iter().filter(|&(_, p)| p != 0.0).collect(),
        }
    }

    pub fn certain(sym: Symbol) -> Self {
        PositionDistribution {
            entries: vec![(sym, 1.0)],
        }
    }

    pub fn entries(&self) -> &[(Symbol, f64)] {
        &self.entries
    }

    pub fn prob(&self, sym: Symbol) -> f64 {
        self.entries
            .iter()
            .find(|&&(s, _)| s == sym)
            .map_or(0.0, |&(_, p)| p)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|&(_, p)| p).sum()
    }
}

/// `src_sym` at `src_pos` depends on whether `cond_sym` is present at
/// `cond_pos`: its probability is `p_plus` when it is and `p_minus` when it
/// is not.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub src_pos: usize,
    pub src_sym: Symbol,
    pub cond_pos: usize,
    pub cond_sym: Symbol,
    pub p_plus: f64,
    pub p_minus: f64,
}

impl Correlation {
    /// Effective probability when `cond_pos` lies outside the matched window:
    /// `pr(cond) * p_plus + (1 - pr(cond)) * p_minus`.
    pub fn marginal(&self, cond_prob: f64) -> f64 {
        cond_prob * self.p_plus + (1.0 - cond_prob) * self.p_minus
    }

    /// Effective probability when the window places `sym` at `cond_pos`.
    pub fn conditioned(&self, sym: Symbol) -> f64 {
        if sym == self.cond_sym {
            self.p_plus
        } else {
            self.p_minus
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    Empty,
    DuplicateSymbol,
    ProbabilityRange,
    SumNotOne,
    CorrelationIndex,
    CorrelationSelf,
    CorrelationDuplicate,
    CorrelationSourceAbsent,
    CorrelationConditionAbsent,
    CorrelationProbability,
    DuplicateName,
    EmptyCollection,
}

/// One failed invariant, located at a 1-based position when applicable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub position: Option<usize>,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position {
            Some(p) => write!(f, "position {p}: {:?}: {}", self.rule, self.detail),
            None => write!(f, "{:?}: {}", self.rule, self.detail),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawUncertainString {
    name: String,
    positions: Vec<PositionDistribution>,
    correlations: Vec<Correlation>,
}

/// A character-level uncertain string.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(from = "RawUncertainString", into = "RawUncertainString")]
pub struct UncertainString {
    name: String,
    positions: Vec<PositionDistribution>,
    correlations: Vec<Correlation>,
    // (src_pos, src_sym) -> index into `correlations`; first one wins.
    corr_lookup: HashMap<(usize, Symbol), usize>,
}

impl From<RawUncertainString> for UncertainString {
    fn from(r: RawUncertainString) -> Self {
        UncertainString::new(r.name, r.positions, r.correlations)
    }
}

impl From<UncertainString> for RawUncertainString {
    fn from(u: UncertainString) -> Self {
        RawUncertainString {
            name: u.name,
            positions: u.positions,
            correlations: u.correlations,
        }
    }
}

impl PartialEq for UncertainString {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.positions == other.positions
            && self.correlations == other.correlations
    }
}

impl UncertainString {
    /// Builds the string without validating it; see [`validate`].
    pub fn new(
        name: impl Into<String>,
        positions: Vec<PositionDistribution>,
        correlations: Vec<Correlation>,
    ) -> Self {
        let mut corr_lookup = HashMap::new();
        for (i, c) in correlations.iter().enumerate() {
            corr_lookup.entry((c.src_pos, c.src_sym)).or_insert(i);
        }
        UncertainString {
            name: name.into(),
            positions,
            correlations,
            corr_lookup,
        }
    }

    /// A string with a single certain character per position.
    pub fn deterministic(name: impl Into<String>, text: &str) -> Result<Self> {
        let positions = pattern(text)?
            .into_iter()
            .map(PositionDistribution::certain)
            .collect();
        Ok(UncertainString::new(name, positions, Vec::new()))
    }

    /// Like [`UncertainString::new`] but rejects strings that fail
    /// [`validate`].
    pub fn checked(
        name: impl Into<String>,
        positions: Vec<PositionDistribution>,
        correlations: Vec<Correlation>,
    ) -> Result<Self> {
        let u = UncertainString::new(name, positions, correlations);
        u.ensure_valid()?;
        Ok(u)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let violations = validate(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid {
                name: self.name.clone(),
                violations,
            })
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[PositionDistribution] {
        &self.positions
    }

    /// Distribution at 1-based position `i`.
    pub fn position(&self, i: usize) -> &PositionDistribution {
        &self.positions[i - 1]
    }

    pub fn correlations(&self) -> &[Correlation] {
        &self.correlations
    }

    pub fn has_correlations(&self) -> bool {
        !self.correlations.is_empty()
    }

    pub fn correlation_for(&self, pos: usize, sym: Symbol) -> Option<&Correlation> {
        if self.corr_lookup.is_empty() {
            return None;
        }
        self.corr_lookup
            .get(&(pos, sym))
            .map(|&i| &self.correlations[i])
    }

    /// Stored probability of `sym` at `pos`, ignoring correlations.
    pub fn base_prob(&self, pos: usize, sym: Symbol) -> f64 {
        self.positions[pos - 1].prob(sym)
    }

    /// Outside-window probability of a correlated character.
    pub fn marginal(&self, c: &Correlation) -> f64 {
        c.marginal(self.base_prob(c.cond_pos, c.cond_sym))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Checks every structural invariant, returning the violations found.
pub fn validate(u: &UncertainString) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |position: Option<usize>, rule: Rule, detail: String| {
        out.push(Violation {
            position,
            rule,
            detail,
        })
    };
    let n = u.len();
    if n == 0 {
        push(None, Rule::Empty, "string has no positions".into());
    }
    for (k, dist) in u.positions.iter().enumerate() {
        let pos = k + 1;
        if dist.is_empty() {
            push(Some(pos), Rule::Empty, "no characters with nonzero probability".into());
            continue;
        }
        let mut seen = HashSet::new();
        for &(s, p) in dist.entries() {
            if !seen.insert(s) {
                push(Some(pos), Rule::DuplicateSymbol, format!("symbol {s} listed twice"));
            }
            if !(p > 0.0 && p <= 1.0) {
                push(Some(pos), Rule::ProbabilityRange, format!("probability {p} of {s} outside (0,1]"));
            }
        }
        let total = dist.total();
        if (total - 1.0).abs() > PROB_EPS {
            push(Some(pos), Rule::SumNotOne, format!("probabilities sum to {total}"));
        }
    }
    let mut keys = HashSet::new();
    for c in &u.correlations {
        let at = Some(c.src_pos);
        if c.src_pos == 0 || c.src_pos > n || c.cond_pos == 0 || c.cond_pos > n {
            push(at, Rule::CorrelationIndex, format!("correlation {} -> {} outside 1..={n}", c.src_pos, c.cond_pos));
            continue;
        }
        if c.src_pos == c.cond_pos {
            push(at, Rule::CorrelationSelf, "a position cannot condition itself".into());
        }
        if !keys.insert((c.src_pos, c.src_sym)) {
            push(at, Rule::CorrelationDuplicate, format!("second correlation for {}", c.src_sym));
        }
        if u.base_prob(c.src_pos, c.src_sym) == 0.0 {
            push(at, Rule::CorrelationSourceAbsent, format!("{} has no entry at position {}", c.src_sym, c.src_pos));
        }
        if u.base_prob(c.cond_pos, c.cond_sym) == 0.0 {
            push(at, Rule::CorrelationConditionAbsent, format!("{} has zero probability at position {}", c.cond_sym, c.cond_pos));
        }
        for p in [c.p_plus, c.p_minus] {
            if !(0.0..=1.0).contains(&p) {
                push(at, Rule::CorrelationProbability, format!("conditional probability {p} outside [0,1]"));
            }
        }
    }
    out
}

/// Probability that `p` occurs at 1-based `start`.
///
/// The plain product of per-position probabilities, with every correlated
/// character replaced by `p_plus`/`p_minus` when its conditioning position
/// lies inside the window and by the marginal otherwise.
pub fn occurrence_probability(u: &UncertainString, p: &[Symbol], start: usize) -> Result<f64> {
    if start == 0 || p.is_empty() || start + p.len() - 1 > u.len() {
        return Err(Error::Range(format!(
            "window of length {} at {start} does not fit a string of length {}",
            p.len(),
            u.len()
        )));
    }
    let end = start + p.len() - 1;
    let mut prob = 1.0;
    for (k, &c) in p.iter().enumerate() {
        let i = start + k;
        let base = u.base_prob(i, c);
        if base == 0.0 {
            return Ok(0.0);
        }
        let f = match u.correlation_for(i, c) {
            None => base,
            Some(corr) if (start..=end).contains(&corr.cond_pos) => {
                corr.conditioned(p[corr.cond_pos - start])
            }
            Some(corr) => u.marginal(corr),
        };
        prob *= f;
    }
    Ok(prob)
}

/// Largest value the factor of `sym` at `pos` can take in any window.
pub(crate) fn factor_upper_bound(u: &UncertainString, pos: usize, sym: Symbol, base: f64) -> f64 {
    match u.correlation_for(pos, sym) {
        None => base,
        Some(c) => c.p_plus.max(c.p_minus).max(u.marginal(c)),
    }
}

/// All full-length possible worlds with probability at least `floor`,
/// sorted lexicographically.
pub fn enumerate_worlds(u: &UncertainString, floor: f64) -> Result<Vec<(String, f64)>> {
    if floor <= 0.0 && u.len() > MAX_UNBOUNDED_WORLD_LEN {
        return Err(Error::Capacity {
            what: "unbounded world enumeration length",
            needed: u.len(),
            cap_name: "max-unbounded-world-len",
            cap: MAX_UNBOUNDED_WORLD_LEN,
        });
    }
    let n = u.len();
    let mut out = Vec::new();
    let mut cur: Vec<Symbol> = Vec::with_capacity(n);
    // Depth-first over positions; `bound` is an upper bound on any completion.
    fn walk(
        u: &UncertainString,
        floor: f64,
        cur: &mut Vec<Symbol>,
        bound: f64,
        out: &mut Vec<(String, f64)>,
    ) -> Result<()> {
        if cur.len() == u.len() {
            let p = occurrence_probability(u, cur, 1)?;
            if floor <= 0.0 || meets(p, floor) {
                if out.len() >= MAX_WORLDS {
                    return Err(Error::Capacity {
                        what: "possible worlds",
                        needed: out.len() + 1,
                        cap_name: "max-worlds",
                        cap: MAX_WORLDS,
                    });
                }
                out.push((pattern_string(cur), p));
            }
            return Ok(());
        }
        let pos = cur.len() + 1;
        for &(s, base) in u.position(pos).entries() {
            let b = bound * factor_upper_bound(u, pos, s, base);
            if floor > 0.0 && !meets(b, floor) {
                continue;
            }
            cur.push(s);
            walk(u, floor, cur, b, out)?;
            cur.pop();
        }
        Ok(())
    }
    walk(u, floor, &mut cur, 1.0, &mut out)?;
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// An ordered collection of uncertain strings with unique names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocumentCollection {
    docs: Vec<UncertainString>,
}

impl DocumentCollection {
    pub fn new(docs: Vec<UncertainString>) -> Self {
        DocumentCollection { docs }
    }

    pub fn checked(docs: Vec<UncertainString>) -> Result<Self> {
        let c = DocumentCollection { docs };
        let v = c.validate();
        if v.is_empty() {
            Ok(c)
        } else {
            Err(Error::Invalid {
                name: "<collection>".into(),
                violations: v,
            })
        }
    }

    pub fn docs(&self) -> &[UncertainString] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn total_len(&self) -> usize {
        self.docs.iter().map(|d| d.len()).sum()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.docs.is_empty() {
            out.push(Violation {
                position: None,
                rule: Rule::EmptyCollection,
                detail: "collection has no documents".into(),
            });
        }
        let mut names = HashSet::new();
        for d in &self.docs {
            if !names.insert(d.name()) {
                out.push(Violation {
                    position: None,
                    rule: Rule::DuplicateName,
                    detail: format!("document name {:?} repeated", d.name()),
                });
            }
            for mut v in validate(d) {
                v.detail = format!("{}: {}", d.name(), v.detail);
                out.push(v);
            }
        }
        out
    }
}

impl From<UncertainString> for DocumentCollection {
    fn from(u: UncertainString) -> Self {
        DocumentCollection { docs: vec![u] }
    }
}
