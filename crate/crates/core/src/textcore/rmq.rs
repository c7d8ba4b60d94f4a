use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BLOCK: usize = 32;

/// Range-maximum queries over a fixed array of reals.
///
/// Queries return the smallest index holding the maximum. In-block queries
/// use a per-position bitmask of the monotone stack; whole blocks go through
/// a sparse table over block maxima, so every query is O(1) after linear
/// preprocessing (plus `n / 32 * log n` words for the table).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RmqIndex {
    values: Vec<f64>,
    masks: Vec<u32>,
    // sparse[k][b] = argmax over blocks b .. b + 2^k.
    sparse: Vec<Vec<u32>>,
}

impl RmqIndex {
    pub fn new(values: Vec<f64>) -> Self {
        let n = values.len();
        let mut masks = vec![0u32; n];
        let nblocks = n.div_ceil(BLOCK);
        let mut block_max = Vec::with_capacity(nblocks);
        for b in 0..nblocks {
            let start = b * BLOCK;
            let end = (start + BLOCK).min(n);
            let mut stack = 0u32;
            for i in start..end {
                while stack != 0 {
                    let top = start + 31 - stack.leading_zeros() as usize;
                    if values[top] < values[i] {
                        stack &= !(1 << (top - start));
                    } else {
                        break;
                    }
                }
                stack |= 1 << (i - start);
                masks[i] = stack;
            }
            block_max.push((start + masks[end - 1].trailing_zeros() as usize) as u32);
        }
        let mut sparse = vec![block_max];
        let mut width = 1;
        while 2 * width <= nblocks {
            let prev = sparse.last().unwrap();
            let next: Vec<u32> = (0..=nblocks - 2 * width)
                .map(|b| better(&values, prev[b], prev[b + width]))
                .collect();
            sparse.push(next);
            width *= 2;
        }
        RmqIndex {
            values,
            masks,
            sparse,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Index of the maximum in `values[l..=r]`, smallest index on ties.
    pub fn query(&self, l: usize, r: usize) -> Result<usize> {
        if l > r || r >= self.len() {
            return Err(Error::Range(format!(
                "rmq range [{l}, {r}] invalid for length {}",
                self.len()
            )));
        }
        Ok(self.argmax(l, r))
    }

    /// Unchecked variant of [`RmqIndex::query`]; requires `l <= r < len`.
    #[inline]
    pub fn argmax(&self, l: usize, r: usize) -> usize {
        let (bl, br) = (l / BLOCK, r / BLOCK);
        if bl == br {
            return self.in_block(l, r);
        }
        let mut best = self.in_block(l, bl * BLOCK + BLOCK - 1);
        if bl + 1 < br {
            let (lo, hi) = (bl + 1, br - 1);
            let k = (usize::BITS - 1 - (hi - lo + 1).leading_zeros()) as usize;
            let a = self.sparse[k][lo];
            let b = self.sparse[k][hi + 1 - (1 << k)];
            best = better(&self.values, best as u32, better(&self.values, a, b)) as usize;
        }
        let right = self.in_block(br * BLOCK, r);
        better(&self.values, best as u32, right as u32) as usize
    }

    #[inline]
    fn in_block(&self, l: usize, r: usize) -> usize {
        let start = l - l % BLOCK;
        let m = self.masks[r] & (!0u32 << (l - start));
        start + m.trailing_zeros() as usize
    }

    pub fn heap_bytes(&self) -> usize {
        8 * self.values.len()
            + 4 * self.masks.len()
            + 4 * self.sparse.iter().map(|s| s.len()).sum::<usize>()
    }
}

// Prefers the earlier index unless the later one is strictly larger.
#[inline]
fn better(values: &[f64], a: u32, b: u32) -> u32 {
    let (x, y) = if a <= b { (a, b) } else { (b, a) };
    if values[y as usize] > values[x as usize] {
        y
    } else {
        x
    }
}
