//! Rewrites an uncertain string into a deterministic text of concatenated
//! maximal factors.
//!
//! A maximal factor at position `i` is a string that, aligned at `i`, has
//! probability at least `tau_min` and cannot be extended without every
//! extension falling below `tau_min`. Concatenating all of them (each
//! followed by its own separator) gives a text in which every
//! `(pattern, position)` pair of probability `>= tau_min` occurs at an offset
//! mapped back to that position.
//!
//! Alongside the text we keep `pos` (original position of every text symbol)
//! and `cum`, the cumulative probability product inside each factor, so the
//! probability of any window is a ratio of two `cum` entries. Correlated
//! characters contribute a neutral factor to `cum` and are corrected per
//! window from their rule.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    factor_upper_bound, meets, occurrence_probability, Correlation, DocumentCollection, Symbol,
    UncertainString, PROB_EPS,
};
use crate::textcore::{is_separator, symbol_code, SYMBOL_BASE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalFactor {
    /// 1-based start in the source string.
    pub start: usize,
    pub symbols: Vec<Symbol>,
    pub prob: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransformConfig {
    /// Cap on the transformed length; `None` means `64 * n / tau_min^2`.
    pub max_len: Option<usize>,
}

impl TransformConfig {
    pub fn cap_for(&self, n: usize, tau_min: f64) -> usize {
        self.max_len
            .unwrap_or_else(|| ((64.0 * n as f64) / (tau_min * tau_min)).ceil() as usize)
    }
}

pub(crate) fn check_tau_min(tau_min: f64) -> Result<()> {
    if tau_min > 0.0 && tau_min <= 1.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("tau_min must lie in (0, 1], got {tau_min}")))
    }
}

/// All maximal factors aligned at 1-based `start`.
pub fn maximal_factors(u: &UncertainString, tau_min: f64, start: usize) -> Result<Vec<MaximalFactor>> {
    check_tau_min(tau_min)?;
    if start == 0 || start > u.len() {
        return Err(Error::Range(format!("start {start} outside 1..={}", u.len())));
    }
    let mut out = Vec::new();
    let mut budget = usize::MAX;
    FactorWalk::new(u, tau_min, start).run(&mut out, &mut budget)?;
    Ok(out)
}

/// Depth-first enumeration of the strings aligned at `start`.
///
/// The running product is not monotone once correlated characters wait on a
/// conditioning position further right, so pruning uses an upper bound that
/// charges each pending correlated character `max(p_plus, p_minus)`; that
/// bound never increases along an extension.
struct FactorWalk<'a> {
    u: &'a UncertainString,
    tau: f64,
    start: usize,
    syms: Vec<Symbol>,
    // plain[k] = product of the uncorrelated factors among the first k symbols.
    plain: Vec<f64>,
    corr: Vec<(usize, &'a Correlation)>,
}

impl<'a> FactorWalk<'a> {
    fn new(u: &'a UncertainString, tau: f64, start: usize) -> Self {
        FactorWalk {
            u,
            tau,
            start,
            syms: Vec::new(),
            plain: vec![1.0],
            corr: Vec::new(),
        }
    }

    fn end(&self) -> usize {
        self.start + self.syms.len() - 1
    }

    /// (exact probability, upper bound over all extensions)
    fn evaluate(&self) -> (f64, f64) {
        let mut exact = *self.plain.last().unwrap();
        let mut bound = exact;
        let end = self.end();
        for &(_, c) in &self.corr {
            if (self.start..=end).contains(&c.cond_pos) {
                let f = c.conditioned(self.syms[c.cond_pos - self.start]);
                exact *= f;
                bound *= f;
            } else if c.cond_pos < self.start {
                let f = self.u.marginal(c);
                exact *= f;
                bound *= f;
            } else {
                exact *= self.u.marginal(c);
                bound *= c.p_plus.max(c.p_minus);
            }
        }
        (exact, bound)
    }

    fn run(mut self, out: &mut Vec<MaximalFactor>, budget: &mut usize) -> Result<()> {
        self.children(out, budget)?;
        Ok(())
    }

    /// Explores every extension of the current string; returns whether any
    /// of them reaches the threshold.
    fn children(&mut self, out: &mut Vec<MaximalFactor>, budget: &mut usize) -> Result<bool> {
        let next = self.start + self.syms.len();
        if next > self.u.len() {
            return Ok(false);
        }
        let mut any = false;
        for &(s, base) in self.u.position(next).entries() {
            if *budget == 0 {
                return Err(Error::Capacity {
                    what: "factor enumeration",
                    needed: usize::MAX,
                    cap_name: "max-text-len",
                    cap: 0,
                });
            }
            *budget -= 1;
            self.push(next, s, base);
            let (exact, bound) = self.evaluate();
            if meets(bound, self.tau) {
                let below = self.children(out, budget)?;
                let here = meets(exact, self.tau);
                if here && !below {
                    out.push(MaximalFactor {
                        start: self.start,
                        symbols: self.syms.clone(),
                        prob: exact,
                    });
                }
                any |= here || below;
            }
            self.pop();
        }
        Ok(any)
    }

    fn push(&mut self, pos: usize, s: Symbol, base: f64) {
        self.syms.push(s);
        let last = *self.plain.last().unwrap();
        match self.u.correlation_for(pos, s) {
            Some(c) => {
                self.plain.push(last);
                self.corr.push((pos, c));
            }
            None => self.plain.push(last * base),
        }
    }

    fn pop(&mut self) {
        let pos = self.end();
        self.syms.pop();
        self.plain.pop();
        if self.corr.last().is_some_and(|&(p, _)| p == pos) {
            self.corr.pop();
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorSpan {
    /// Offset of the first symbol in the transformed text.
    pub offset: u32,
    /// Global 1-based start position.
    pub start: u32,
    pub len: u32,
    pub prob: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct CorrRule {
    cond_pos: u32,
    cond_code: u32,
    p_plus: f64,
    p_minus: f64,
    marginal: f64,
}

/// The deterministic text `t` with its `pos` and `cum` arrays.
///
/// Positions are global and 1-based; for a collection, document `j` owns
/// the global positions `doc_starts[j] .. doc_starts[j] + len(d_j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformedText {
    text: Vec<u32>,
    pos: Vec<u32>,
    cum: Vec<f64>,
    run: Vec<u32>,
    factors: Vec<FactorSpan>,
    corr_offsets: Vec<u32>,
    corr_rules: Vec<CorrRule>,
    tau_min: f64,
    doc_starts: Vec<u32>,
    total_positions: usize,
}

/// Transforms a single uncertain string.
pub fn transform(u: &UncertainString, tau_min: f64) -> Result<TransformedText> {
    transform_with(u, tau_min, &TransformConfig::default())
}

pub fn transform_with(u: &UncertainString, tau_min: f64, cfg: &TransformConfig) -> Result<TransformedText> {
    transform_docs(&[u], tau_min, cfg)
}

/// Transforms every document and concatenates the results.
pub fn transform_collection(
    docs: &DocumentCollection,
    tau_min: f64,
    cfg: &TransformConfig,
) -> Result<TransformedText> {
    let refs: Vec<&UncertainString> = docs.docs().iter().collect();
    transform_docs(&refs, tau_min, cfg)
}

fn transform_docs(docs: &[&UncertainString], tau_min: f64, cfg: &TransformConfig) -> Result<TransformedText> {
    check_tau_min(tau_min)?;
    let total: usize = docs.iter().map(|d| d.len()).sum();
    let cap = cfg.cap_for(total, tau_min);
    let mut parts = Vec::with_capacity(docs.len());
    let mut used = 0usize;
    for d in docs {
        let mut factors = Vec::new();
        for start in 1..=d.len() {
            let before = factors.len();
            // Node budget: a walk cannot visit more nodes than the cap allows
            // symbols, times the branching of the string.
            let mut budget = cap.saturating_mul(8).max(1 << 16);
            FactorWalk::new(d, tau_min, start)
                .run(&mut factors, &mut budget)
                .map_err(|_| capacity(cap, cap.saturating_add(1)))?;
            used += factors[before..]
                .iter()
                .map(|f| f.symbols.len() + 1)
                .sum::<usize>();
            if used > cap {
                return Err(capacity(cap, used));
            }
        }
        debug_assert!(no_duplicate_factors(&factors));
        parts.push(factors);
    }
    Ok(TransformedText::assemble(docs, &parts, tau_min))
}

fn capacity(cap: usize, needed: usize) -> Error {
    Error::Capacity {
        what: "transformed text length",
        needed,
        cap_name: "max-text-len",
        cap,
    }
}

fn no_duplicate_factors(f: &[MaximalFactor]) -> bool {
    let mut seen = std::collections::HashSet::new();
    f.iter().all(|x| seen.insert((x.start, x.symbols.clone())))
}

impl TransformedText {
    /// Lays out the given factors (per document, in order) with separators.
    pub fn assemble(docs: &[&UncertainString], parts: &[Vec<MaximalFactor>], tau_min: f64) -> Self {
        let len: usize = parts.iter().flatten().map(|f| f.symbols.len() + 1).sum();
        let mut tt = TransformedText {
            text: Vec::with_capacity(len),
            pos: Vec::with_capacity(len),
            cum: Vec::with_capacity(len),
            run: Vec::with_capacity(len),
            factors: Vec::new(),
            corr_offsets: Vec::new(),
            corr_rules: Vec::new(),
            tau_min,
            doc_starts: Vec::with_capacity(docs.len()),
            total_positions: 0,
        };
        let mut base = 0usize;
        for (d, factors) in docs.iter().zip(parts) {
            tt.doc_starts.push(base as u32 + 1);
            for f in factors {
                let offset = tt.text.len();
                let flen = f.symbols.len();
                let mut c = 1.0;
                for (k, &s) in f.symbols.iter().enumerate() {
                    let q = f.start + k;
                    let o = tt.text.len() as u32;
                    tt.text.push(symbol_code(s));
                    tt.pos.push((base + q) as u32);
                    tt.run.push((flen - k) as u32);
                    match d.correlation_for(q, s) {
                        Some(corr) => {
                            tt.corr_offsets.push(o);
                            tt.corr_rules.push(CorrRule {
                                cond_pos: (base + corr.cond_pos) as u32,
                                cond_code: symbol_code(corr.cond_sym),
                                p_plus: corr.p_plus,
                                p_minus: corr.p_minus,
                                marginal: d.marginal(corr),
                            });
                        }
                        None => c *= d.base_prob(q, s),
                    }
                    tt.cum.push(c);
                }
                let sep = tt.factors.len() as u32;
                debug_assert!(sep < SYMBOL_BASE);
                tt.text.push(sep);
                tt.pos.push(0);
                tt.cum.push(-1.0);
                tt.run.push(0);
                tt.factors.push(FactorSpan {
                    offset: offset as u32,
                    start: (base + f.start) as u32,
                    len: flen as u32,
                    prob: f.prob,
                });
            }
            base += d.len();
        }
        tt.total_positions = base;
        tt
    }

    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    pub fn text(&self) -> &[u32] {
        &self.text
    }

    pub fn pos_array(&self) -> &[u32] {
        &self.pos
    }

    pub fn cum(&self) -> &[f64] {
        &self.cum
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }

    /// Number of positions of the source string(s).
    pub fn source_len(&self) -> usize {
        self.total_positions
    }

    /// Original 1-based position of offset `o`, `None` at separators.
    #[inline]
    pub fn pos(&self, o: usize) -> Option<usize> {
        let p = self.pos[o];
        (p != 0).then_some(p as usize)
    }

    /// Symbols from `o` up to the next separator.
    #[inline]
    pub fn run(&self, o: usize) -> usize {
        self.run[o] as usize
    }

    pub fn factors(&self) -> &[FactorSpan] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> MaximalFactor {
        let f = &self.factors[i];
        let o = f.offset as usize;
        MaximalFactor {
            start: f.start as usize,
            symbols: self.text[o..o + f.len as usize]
                .iter()
                .map(|&c| Symbol::new((c - SYMBOL_BASE) as u8).unwrap())
                .collect(),
            prob: f.prob,
        }
    }

    pub fn longest_factor(&self) -> usize {
        self.factors.iter().map(|f| f.len as usize).max().unwrap_or(0)
    }

    pub fn doc_starts(&self) -> &[u32] {
        &self.doc_starts
    }

    /// Document owning a global position.
    pub fn doc_of_position(&self, p: usize) -> usize {
        self.doc_starts.partition_point(|&s| s as usize <= p) - 1
    }

    /// Probability of the window `t[o .. o + len]` at its mapped position:
    /// a ratio of `cum` entries with correlated characters re-weighted for
    /// this window. Zero when the window crosses a separator.
    pub fn window_probability(&self, o: usize, len: usize) -> f64 {
        if len == 0 || self.run[o] < len as u32 {
            return 0.0;
        }
        let end = o + len - 1;
        let at_factor_start = o == 0 || is_separator(self.text[o - 1]);
        let denom = if at_factor_start { 1.0 } else { self.cum[o - 1] };
        let mut prob = self.cum[end] / denom;
        if !self.corr_offsets.is_empty() {
            let first = self.pos[o];
            let last = first + len as u32 - 1;
            let lo = self.corr_offsets.partition_point(|&x| (x as usize) < o);
            for (k, &co) in self.corr_offsets[lo..].iter().enumerate() {
                if co as usize > end {
                    break;
                }
                let r = &self.corr_rules[lo + k];
                let f = if (first..=last).contains(&r.cond_pos) {
                    let at = o + (r.cond_pos - first) as usize;
                    if self.text[at] == r.cond_code {
                        r.p_plus
                    } else {
                        r.p_minus
                    }
                } else {
                    r.marginal
                };
                prob *= f;
            }
        }
        prob
    }

    /// Human-readable form of `t` with `$` for separators.
    pub fn display_text(&self) -> String {
        self.text
            .iter()
            .map(|&c| if is_separator(c) { '$' } else { (c - SYMBOL_BASE) as u8 as char })
            .collect()
    }

    pub fn heap_bytes(&self) -> usize {
        self.text.len() * (4 + 4 + 8 + 4)
            + self.factors.len() * std::mem::size_of::<FactorSpan>()
            + self.corr_offsets.len() * (4 + std::mem::size_of::<CorrRule>())
    }
}

/// Exhaustively verifies that every `(p, i)` of probability `>= tau_min`
/// occurs in `tt` at an offset mapped to `i` with the same window
/// probability. Returns the first counterexample.
///
/// Enumerates candidate strings independently of the factor walk, so it is
/// only meant for short strings.
pub fn conservation_check(
    u: &UncertainString,
    tau_min: f64,
    tt: &TransformedText,
) -> std::result::Result<(), (Vec<Symbol>, usize)> {
    let mut by_pos: HashMap<usize, Vec<usize>> = HashMap::new();
    for o in 0..tt.len() {
        if let Some(p) = tt.pos(o) {
            by_pos.entry(p).or_default().push(o);
        }
    }
    let empty = Vec::new();
    for i in 1..=u.len() {
        let offsets = by_pos.get(&i).unwrap_or(&empty);
        let mut cur = Vec::new();
        check_from(u, tau_min, tt, i, 1.0, &mut cur, offsets)?;
    }
    Ok(())
}

fn check_from(
    u: &UncertainString,
    tau_min: f64,
    tt: &TransformedText,
    start: usize,
    bound: f64,
    cur: &mut Vec<Symbol>,
    offsets: &[usize],
) -> std::result::Result<(), (Vec<Symbol>, usize)> {
    let next = start + cur.len();
    if next > u.len() {
        return Ok(());
    }
    for &(s, base) in u.position(next).entries() {
        let b = bound * factor_upper_bound(u, next, s, base);
        if !meets(b, tau_min) {
            continue;
        }
        cur.push(s);
        let prob = occurrence_probability(u, cur, start).expect("window in range");
        if meets(prob, tau_min) {
            let codes: Vec<u32> = cur.iter().map(|&c| symbol_code(c)).collect();
            let found = offsets.iter().any(|&o| {
                tt.run(o) >= codes.len()
                    && tt.text()[o..o + codes.len()] == codes[..]
                    && (tt.window_probability(o, codes.len()) - prob).abs() <= PROB_EPS
            });
            if !found {
                return Err((cur.clone(), start));
            }
        }
        check_from(u, tau_min, tt, start, b, cur, offsets)?;
        cur.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::{enumerate_worlds, pattern, pattern_string};

    fn names(f: &[MaximalFactor]) -> Vec<String> {
        let mut v: Vec<String> = f.iter().map(|x| pattern_string(&x.symbols)).collect();
        v.sort();
        v
    }

    /// Every string aligned at `start` by brute force, keeping the maximal
    /// ones with probability >= tau.
    fn brute_factors(u: &UncertainString, tau: f64, start: usize) -> Vec<String> {
        let mut all: Vec<(String, f64)> = Vec::new();
        let mut frontier: Vec<Vec<Symbol>> = vec![vec![]];
        while let Some(w) = frontier.pop() {
            let next = start + w.len();
            if next > u.len() {
                continue;
            }
            for &(s, _) in u.position(next).entries() {
                let mut x = w.clone();
                x.push(s);
                let p = occurrence_probability(u, &x, start).unwrap();
                all.push((pattern_string(&x), p));
                frontier.push(x);
            }
        }
        let good: Vec<&String> = all.iter().filter(|(_, p)| meets(*p, tau)).map(|(s, _)| s).collect();
        let mut out: Vec<String> = good
            .iter()
            .filter(|s| !good.iter().any(|t| t.len() > s.len() && t.starts_with(s.as_str())))
            .map(|s| s.to_string())
            .collect();
        out.sort();
        out
    }

    #[test]
    fn genome_factors_at_five() {
        let f = maximal_factors(&genome(), 0.15, 5).unwrap();
        assert_eq!(names(&f), vec!["QPA", "QPF", "TPA", "TPF"]);
        for x in &f {
            assert!((x.prob - 0.2).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic_factor_is_suffix() {
        let u = UncertainString::deterministic("d", "abcd").unwrap();
        for i in 1..=4 {
            let f = maximal_factors(&u, 0.7, i).unwrap();
            assert_eq!(names(&f), vec![&"abcd"[i - 1..]]);
        }
    }

    #[test]
    fn branchy_factors_match_brute_force() {
        let u = branchy();
        for start in 1..=5 {
            for tau in [0.05, 0.1, 0.2, 0.5] {
                assert_eq!(
                    names(&maximal_factors(&u, tau, start).unwrap()),
                    brute_factors(&u, tau, start),
                    "start {start} tau {tau}"
                );
            }
        }
    }

    #[test]
    fn correlated_factors_match_brute_force() {
        let u = correlated();
        for start in 1..=3 {
            for tau in [0.1, 0.2, 0.3, 0.35] {
                assert_eq!(
                    names(&maximal_factors(&u, tau, start).unwrap()),
                    brute_factors(&u, tau, start)
                );
            }
        }
    }

    /// Conditioning position to the right of the correlated character: the
    /// prefix "z" is below the floor but "zq" is not.
    #[test]
    fn forward_condition_is_not_pruned() {
        let base = ustr("fwd", &[&[('z', 0.1), ('y', 0.9)], &[('q', 0.5), ('r', 0.5)]]);
        let corr = Correlation {
            src_pos: 1,
            src_sym: sym('z'),
            cond_pos: 2,
            cond_sym: sym('q'),
            p_plus: 0.9,
            p_minus: 0.0,
        };
        let u = UncertainString::new("fwd", base.positions().to_vec(), vec![corr]);
        let zq = occurrence_probability(&u, &pattern("zq").unwrap(), 1).unwrap();
        assert!((zq - 0.45).abs() < 1e-12);
        let f = maximal_factors(&u, 0.3, 1).unwrap();
        assert_eq!(names(&f), brute_factors(&u, 0.3, 1));
        assert!(names(&f).contains(&"zq".to_string()));
        let tt = transform(&u, 0.3).unwrap();
        assert_eq!(conservation_check(&u, 0.3, &tt), Ok(()));
    }

    #[test]
    fn factor_count_bound() {
        let u = genome();
        for tau in [0.05, 0.1, 0.15, 0.3] {
            for i in 1..=u.len() {
                let f = maximal_factors(&u, tau, i).unwrap();
                assert!(f.len() <= (1.0 / tau).ceil() as usize);
            }
        }
    }

    #[test]
    fn deterministic_transform_layout() {
        let u = UncertainString::deterministic("d", "abc").unwrap();
        let tt = transform(&u, 0.5).unwrap();
        assert_eq!(tt.display_text(), "abc$bc$c$");
        let pos: Vec<Option<usize>> = (0..tt.len()).map(|o| tt.pos(o)).collect();
        assert_eq!(
            pos,
            vec![Some(1), Some(2), Some(3), None, Some(2), Some(3), None, Some(3), None]
        );
        assert_eq!(tt.cum()[3], -1.0);
    }

    #[test]
    fn running_example_factors() {
        let u = ustr(
            "chained",
            &[
                &[('Q', 0.7), ('S', 0.3)],
                &[('Q', 0.3), ('P', 0.7)],
                &[('P', 1.0)],
                &[('A', 0.4), ('F', 0.3), ('P', 0.2), ('Q', 0.1)],
            ],
        );
        let tt = transform(&u, 0.1).unwrap();
        let at1: Vec<MaximalFactor> = (0..tt.factors().len())
            .map(|i| tt.factor(i))
            .filter(|f| f.start == 1)
            .collect();
        let expect = [("QQP", 0.21), ("QPPA", 0.196), ("QPPF", 0.147)];
        for (s, p) in expect {
            let f = at1.iter().find(|f| pattern_string(&f.symbols) == s).unwrap();
            assert!((f.prob - p).abs() < 1e-9, "{s}");
        }
        assert_eq!(names(&at1), brute_factors(&u, 0.1, 1));
        // The first factor's C values: .7, .21, .21 then the separator.
        assert_eq!(tt.display_text().split('$').next().unwrap(), "QQP");
        let c = &tt.cum()[..4];
        assert!((c[0] - 0.7).abs() < 1e-12 && (c[1] - 0.21).abs() < 1e-12);
        assert!((c[2] - 0.21).abs() < 1e-12 && c[3] == -1.0);
        assert_eq!(conservation_check(&u, 0.1, &tt), Ok(()));
    }

    #[test]
    fn window_ratio_matches_model() {
        for u in [branchy(), genome(), correlated()] {
            let tt = transform(&u, 0.05).unwrap();
            for o in 0..tt.len() {
                for len in 1..=tt.run(o) {
                    let p: Vec<Symbol> = (o..o + len)
                        .map(|k| Symbol::new((tt.text()[k] - SYMBOL_BASE) as u8).unwrap())
                        .collect();
                    let want = occurrence_probability(&u, &p, tt.pos(o).unwrap()).unwrap();
                    assert!((tt.window_probability(o, len) - want).abs() < 1e-9);
                }
                if tt.pos(o).is_some() {
                    assert_eq!(tt.window_probability(o, tt.run(o) + 1), 0.0);
                }
            }
        }
    }

    #[test]
    fn conservation_on_figures() {
        for (u, tau) in [(branchy(), 0.1), (genome(), 0.15), (correlated(), 0.1), (branchy(), 0.02)] {
            let tt = transform(&u, tau).unwrap();
            assert_eq!(conservation_check(&u, tau, &tt), Ok(()));
        }
    }

    #[test]
    fn conservation_catches_deleted_factor() {
        let u = branchy();
        let tt = transform(&u, 0.1).unwrap();
        let mut parts: Vec<MaximalFactor> = (0..tt.factors().len()).map(|i| tt.factor(i)).collect();
        let victim = parts.iter().position(|f| f.start == 1).unwrap();
        let removed = parts.remove(victim);
        let broken = TransformedText::assemble(&[&u], &[parts], 0.1);
        let (p, i) = conservation_check(&u, 0.1, &broken).unwrap_err();
        assert_eq!(i, 1);
        assert!(removed.symbols.starts_with(&p));
    }

    #[test]
    fn transform_covers_worlds() {
        // Every window of every world with probability >= tau shows up in t.
        let u = branchy();
        let tt = transform(&u, 0.1).unwrap();
        let text = tt.display_text();
        for (w, _) in enumerate_worlds(&u, 0.0).unwrap() {
            for i in 0..w.len() {
                for j in i + 1..=w.len() {
                    let p = pattern(&w[i..j]).unwrap();
                    if meets(occurrence_probability(&u, &p, i + 1).unwrap(), 0.1) {
                        assert!(text.contains(&w[i..j]));
                    }
                }
            }
        }
    }

    #[test]
    fn capacity_error_names_cap() {
        let u = genome();
        let cfg = TransformConfig { max_len: Some(10) };
        match transform_with(&u, 0.1, &cfg) {
            Err(Error::Capacity { cap_name, cap, .. }) => {
                assert_eq!(cap_name, "max-text-len");
                assert_eq!(cap, 10);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn tau_min_one_keeps_certain_characters() {
        let u = genome();
        let tt = transform(&u, 1.0).unwrap();
        for f in tt.factors() {
            assert!((f.prob - 1.0).abs() < 1e-12);
        }
        let none = ustr("u", &[&[('a', 0.5), ('b', 0.5)]]);
        assert!(transform(&none, 1.0).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_tau_min() {
        assert!(transform(&branchy(), 0.0).is_err());
        assert!(transform(&branchy(), 1.5).is_err());
    }
}
