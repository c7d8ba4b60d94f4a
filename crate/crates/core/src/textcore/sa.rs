use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// Suffix array, its inverse and the LCP array of a coded text.
///
/// All indices are 0-based: `sa[k]` is the text offset of the `k`-th smallest
/// suffix and `lcp[k]` is the longest common prefix of suffixes `sa[k-1]` and
/// `sa[k]` (`lcp[0] = 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuffixArrayIndex {
    text: Vec<u32>,
    sa: Vec<u32>,
    inverse: Vec<u32>,
    lcp: Vec<u32>,
}

impl SuffixArrayIndex {
    /// Prefix doubling with early exit once all ranks are distinct.
    pub fn build(text: Vec<u32>) -> Self {
        let n = text.len();
        assert!(n < u32::MAX as usize, "text too long for 32-bit suffix array");
        let mut sa: Vec<u32> = (0..n as u32).collect();
        let mut rank: Vec<u32> = vec![0; n];
        if n > 0 {
            sa.sort_unstable_by_key(|&i| text[i as usize]);
            let mut r = 0;
            for k in 0..n {
                if k > 0 && text[sa[k] as usize] != text[sa[k - 1] as usize] {
                    r += 1;
                }
                rank[sa[k] as usize] = r;
            }
            let mut tmp = vec![0u32; n];
            let mut h = 1usize;
            while (rank[sa[n - 1] as usize] as usize) < n - 1 {
                // Key: (rank[i], rank[i+h] + 1 or 0 past the end).
                let key = |i: u32| {
                    let i = i as usize;
                    let second = if i + h < n { rank[i + h] as u64 + 1 } else { 0 };
                    ((rank[i] as u64) << 32) | second
                };
                sa.sort_unstable_by_key(|&i| key(i));
                tmp[sa[0] as usize] = 0;
                for k in 1..n {
                    let bump = (key(sa[k]) != key(sa[k - 1])) as u32;
                    tmp[sa[k] as usize] = tmp[sa[k - 1] as usize] + bump;
                }
                std::mem::swap(&mut rank, &mut tmp);
                h *= 2;
            }
        }
        let mut inverse = vec![0u32; n];
        for (k, &s) in sa.iter().enumerate() {
            inverse[s as usize] = k as u32;
        }
        let lcp = kasai(&text, &sa, &inverse);
        SuffixArrayIndex {
            text,
            sa,
            inverse,
            lcp,
        }
    }

    pub fn len(&self) -> usize {
        self.sa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sa.is_empty()
    }

    pub fn text(&self) -> &[u32] {
        &self.text
    }

    pub fn sa(&self) -> &[u32] {
        &self.sa
    }

    pub fn inverse(&self) -> &[u32] {
        &self.inverse
    }

    pub fn lcp(&self) -> &[u32] {
        &self.lcp
    }

    #[inline]
    pub fn suffix(&self, k: usize) -> &[u32] {
        &self.text[self.sa[k] as usize..]
    }

    /// Compares the length-`|p|` prefix of the `k`-th suffix with `p`,
    /// adding the number of symbol comparisons to `steps`.
    fn cmp_prefix(&self, k: usize, p: &[u32], steps: &mut u64) -> Ordering {
        let suf = self.suffix(k);
        for (i, &c) in p.iter().enumerate() {
            *steps += 1;
            match suf.get(i) {
                None => return Ordering::Less,
                Some(&s) if s != c => return s.cmp(&c),
                _ => {}
            }
        }
        Ordering::Equal
    }

    /// Maximal inclusive range `[sp, ep]` of suffixes prefixed by `p`.
    pub fn suffix_range(&self, p: &[u32]) -> Option<(usize, usize)> {
        self.suffix_range_counted(p, &mut 0)
    }

    pub(crate) fn suffix_range_counted(&self, p: &[u32], steps: &mut u64) -> Option<(usize, usize)> {
        if p.is_empty() {
            return if self.is_empty() { None } else { Some((0, self.len() - 1)) };
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.cmp_prefix(mid, p, steps) == Ordering::Less {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let sp = lo;
        let mut hi = self.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.cmp_prefix(mid, p, steps) == Ordering::Greater {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        (sp < lo).then(|| (sp, lo - 1))
    }

    pub fn heap_bytes(&self) -> usize {
        4 * (self.text.len() + self.sa.len() + self.inverse.len() + self.lcp.len())
    }
}

fn kasai(text: &[u32], sa: &[u32], inverse: &[u32]) -> Vec<u32> {
    let n = text.len();
    let mut lcp = vec![0u32; n];
    let mut h = 0usize;
    for i in 0..n {
        let r = inverse[i] as usize;
        if r > 0 {
            let j = sa[r - 1] as usize;
            while i + h < n && j + h < n && text[i + h] == text[j + h] {
                h += 1;
            }
            lcp[r] = h as u32;
            h = h.saturating_sub(1);
        } else {
            h = 0;
        }
    }
    lcp
}
