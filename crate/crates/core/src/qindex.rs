//! Threshold substring search over a transformed uncertain string.
//!
//! Short patterns (`|p| <= m_short`) are answered by recursive range-maximum
//! queries over `C_i`, the length-`i` prefix probabilities of the suffixes
//! in suffix-array order. Within every group of suffixes sharing a length-`i`
//! prefix each original position keeps only its leftmost entry, so the
//! recursion reports every position once. Longer patterns use block maxima
//! `PB_i` over runs of `i` suffix-array slots and verify the elements of
//! every qualifying block.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorize::{transform_with, TransformConfig, TransformedText};
use crate::model::{meets, Symbol, UncertainString, PROB_EPS};
use crate::textcore::{pattern_codes, RmqIndex, SuffixArrayIndex};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IndexConfig {
    pub transform: TransformConfig,
    /// Overrides `max(1, floor(log2 N))`.
    pub m_short: Option<usize>,
    /// Overrides the longest factor length as the last blocked length.
    pub l_max: Option<usize>,
}

/// Work counters for a single query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryStats {
    pub rmq_calls: u64,
    pub block_scans: u64,
    pub outputs: u64,
    /// Symbol comparisons spent locating the suffix range.
    pub range_steps: u64,
    /// Suffix-array slots verified one by one (long and fallback paths).
    pub scanned: u64,
}

impl QueryStats {
    /// Total work units: comparisons, probes and scanned slots.
    pub fn work(&self) -> u64 {
        self.range_steps + self.rmq_calls + self.scanned
    }
}

pub(crate) fn check_tau(tau: f64, tau_min: f64) -> Result<()> {
    if tau.is_nan() || tau > 1.0 + PROB_EPS {
        return Err(Error::Argument(format!("tau must lie in [tau_min, 1], got {tau}")));
    }
    if tau < tau_min - PROB_EPS {
        return Err(Error::Threshold { tau, tau_min });
    }
    Ok(())
}

pub(crate) fn default_m_short(n: usize) -> usize {
    if n < 2 {
        1
    } else {
        (usize::BITS - 1 - n.leading_zeros()) as usize
    }
}

/// Length-`i` prefix probability of every suffix, 0 where the suffix is
/// shorter than `i` or runs into a separator.
pub(crate) fn prefix_values(tt: &TransformedText, sa: &SuffixArrayIndex, i: usize) -> Vec<f64> {
    sa.sa()
        .iter()
        .map(|&o| tt.window_probability(o as usize, i))
        .collect()
}

/// Iterates the maximal runs of suffix-array slots sharing a length-`i`
/// prefix, as half-open `(start, end)` ranges.
pub(crate) fn depth_groups(lcp: &[u32], i: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    let n = lcp.len();
    let mut k = 0;
    std::iter::from_fn(move || {
        if k >= n {
            return None;
        }
        let start = k;
        k += 1;
        while k < n && lcp[k] as usize >= i {
            k += 1;
        }
        Some((start, k))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubstringIndex {
    tt: TransformedText,
    sa: SuffixArrayIndex,
    m_short: usize,
    l_max: usize,
    // short[i - 1] is C_i.
    short: Vec<RmqIndex>,
    // long[i - m_short - 1] is PB_i.
    long: Vec<RmqIndex>,
}

impl SubstringIndex {
    pub fn build(u: &UncertainString, tau_min: f64, cfg: &IndexConfig) -> Result<Self> {
        u.ensure_valid()?;
        let tt = transform_with(u, tau_min, &cfg.transform)?;
        Ok(Self::from_transformed(tt, cfg))
    }

    pub fn from_transformed(tt: TransformedText, cfg: &IndexConfig) -> Self {
        let sa = SuffixArrayIndex::build(tt.text().to_vec());
        let m_short = cfg.m_short.unwrap_or_else(|| default_m_short(tt.len())).max(1);
        let l_max = cfg.l_max.unwrap_or_else(|| tt.longest_factor());
        let mut stamp = vec![u32::MAX; tt.source_len() + 1];
        let mut group_id = 0u32;
        let short = (1..=m_short.min(l_max))
            .map(|i| {
                let mut values = prefix_values(&tt, &sa, i);
                for (s, e) in depth_groups(sa.lcp(), i) {
                    for (v, &o) in values[s..e].iter_mut().zip(&sa.sa()[s..e]) {
                        if *v > 0.0 {
                            let p = tt.pos(o as usize).unwrap();
                            if stamp[p] == group_id {
                                *v = 0.0;
                            } else {
                                stamp[p] = group_id;
                            }
                        }
                    }
                    group_id += 1;
                }
                RmqIndex::new(values)
            })
            .collect();
        let long = (m_short + 1..=l_max)
            .map(|i| {
                let values = prefix_values(&tt, &sa, i);
                RmqIndex::new(
                    values
                        .chunks(i)
                        .map(|b| b.iter().copied().fold(0.0, f64::max))
                        .collect(),
                )
            })
            .collect();
        SubstringIndex {
            tt,
            sa,
            m_short,
            l_max,
            short,
            long,
        }
    }

    pub fn transformed(&self) -> &TransformedText {
        &self.tt
    }

    pub fn suffix_array(&self) -> &SuffixArrayIndex {
        &self.sa
    }

    pub fn tau_min(&self) -> f64 {
        self.tt.tau_min()
    }

    pub fn m_short(&self) -> usize {
        self.m_short
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// `C_i` as stored, after deduplication.
    pub fn short_table(&self, i: usize) -> Option<&[f64]> {
        self.short.get(i.checked_sub(1)?).map(|r| r.values())
    }

    /// `PB_i` block maxima.
    pub fn long_table(&self, i: usize) -> Option<&[f64]> {
        self.long.get(i.checked_sub(self.m_short + 1)?).map(|r| r.values())
    }

    /// Starting positions of `p` with probability at least `tau`, ascending.
    pub fn query(&self, p: &[Symbol], tau: f64) -> Result<Vec<usize>> {
        Ok(self.query_with_stats(p, tau)?.0)
    }

    pub fn query_with_stats(&self, p: &[Symbol], tau: f64) -> Result<(Vec<usize>, QueryStats)> {
        let (hits, stats) = self.query_detailed(p, tau)?;
        Ok((hits.into_iter().map(|(i, _)| i).collect(), stats))
    }

    /// `(position, probability)` pairs sorted by position.
    pub fn query_detailed(&self, p: &[Symbol], tau: f64) -> Result<(Vec<(usize, f64)>, QueryStats)> {
        check_tau(tau, self.tau_min())?;
        if p.is_empty() {
            return Err(Error::Argument("empty pattern".into()));
        }
        let mut stats = QueryStats::default();
        let codes = pattern_codes(p);
        let m = p.len();
        let Some((sp, ep)) = self.sa.suffix_range_counted(&codes, &mut stats.range_steps) else {
            return Ok((Vec::new(), stats));
        };
        let mut out = Vec::new();
        if m <= self.m_short && m <= self.l_max {
            self.short_search(&self.short[m - 1], sp, ep, tau, &mut out, &mut stats);
            debug_assert!({
                let mut seen = HashSet::new();
                out.iter().all(|&(i, _)| seen.insert(i))
            });
        } else if m <= self.l_max {
            self.block_search(m, sp, ep, tau, &mut out, &mut stats);
        } else {
            let mut seen = HashSet::new();
            self.scan(m, sp, ep, tau, &mut seen, &mut out, &mut stats);
        }
        out.sort_unstable_by_key(|&(i, _)| i);
        stats.outputs = out.len() as u64;
        Ok((out, stats))
    }

    fn short_search(
        &self,
        rmq: &RmqIndex,
        sp: usize,
        ep: usize,
        tau: f64,
        out: &mut Vec<(usize, f64)>,
        stats: &mut QueryStats,
    ) {
        let mut stack = vec![(sp, ep)];
        while let Some((l, r)) = stack.pop() {
            stats.rmq_calls += 1;
            let k = rmq.argmax(l, r);
            let v = rmq.value(k);
            if !meets(v, tau) {
                continue;
            }
            out.push((self.tt.pos(self.sa.sa()[k] as usize).unwrap(), v));
            if k > l {
                stack.push((l, k - 1));
            }
            if k < r {
                stack.push((k + 1, r));
            }
        }
    }

    fn block_search(
        &self,
        m: usize,
        sp: usize,
        ep: usize,
        tau: f64,
        out: &mut Vec<(usize, f64)>,
        stats: &mut QueryStats,
    ) {
        let rmq = &self.long[m - self.m_short - 1];
        let mut seen = HashSet::new();
        let mut stack = vec![(sp / m, ep / m)];
        while let Some((l, r)) = stack.pop() {
            stats.rmq_calls += 1;
            let b = rmq.argmax(l, r);
            if !meets(rmq.value(b), tau) {
                continue;
            }
            stats.block_scans += 1;
            let lo = (b * m).max(sp);
            let hi = ((b + 1) * m - 1).min(ep);
            self.scan(m, lo, hi, tau, &mut seen, out, stats);
            if b > l {
                stack.push((l, b - 1));
            }
            if b < r {
                stack.push((b + 1, r));
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn scan(
        &self,
        m: usize,
        lo: usize,
        hi: usize,
        tau: f64,
        seen: &mut HashSet<usize>,
        out: &mut Vec<(usize, f64)>,
        stats: &mut QueryStats,
    ) {
        for k in lo..=hi {
            stats.scanned += 1;
            let o = self.sa.sa()[k] as usize;
            let prob = self.tt.window_probability(o, m);
            if meets(prob, tau) {
                let i = self.tt.pos(o).unwrap();
                if seen.insert(i) {
                    out.push((i, prob));
                }
            }
        }
    }

    pub fn heap_bytes(&self) -> usize {
        self.tt.heap_bytes()
            + self.sa.heap_bytes()
            + self.short.iter().chain(&self.long).map(|r| r.heap_bytes()).sum::<usize>()
    }
}
