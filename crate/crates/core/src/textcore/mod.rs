//! Deterministic-text machinery: suffix array with pattern search, a suffix
//! tree view over it and range-maximum queries.
//!
//! Texts are sequences of `u32` codes. Separators take small codes, one
//! distinct code per occurrence, and alphabet symbols sit above
//! [`SYMBOL_BASE`], so every separator sorts below every symbol and no two
//! suffixes share a separator-containing prefix.

mod rmq;
mod sa;
mod tree;

pub use rmq::RmqIndex;
pub use sa::SuffixArrayIndex;
pub use tree::{NodeId, TreeView, NO_NODE};

use crate::model::Symbol;

pub const SYMBOL_BASE: u32 = 1 << 31;

#[inline]
pub fn symbol_code(s: Symbol) -> u32 {
    SYMBOL_BASE + s.byte() as u32
}

#[inline]
pub fn is_separator(code: u32) -> bool {
    code < SYMBOL_BASE
}

pub fn pattern_codes(p: &[Symbol]) -> Vec<u32> {
    p.iter().map(|&s| symbol_code(s)).collect()
}

/// Encodes a plain string, mapping each `$` to a fresh separator code.
pub fn encode_text(s: &str) -> Vec<u32> {
    let mut next_sep = 0;
    s.bytes()
        .map(|b| {
            if b == Symbol::SEPARATOR {
                next_sep += 1;
                next_sep - 1
            } else {
                SYMBOL_BASE + b as u32
            }
        })
        .collect()
}
