//! Per-context tables drawn on demand from a keyed stream.
//!
//! Nothing is stored per context: each lookup re-derives the entry from
//! `(seed, context)`, which costs one ChaCha block and keeps the tables pure
//! and trivially shareable across threads.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::Stream;

const BERNOULLI_DOMAIN: u64 = 0xb1;
const PERMUTATION_DOMAIN: u64 = 0x9e;
const WINNER_DOMAIN: u64 = 0x31;

/// Largest arm count a lazy table supports (one bit per arm in a `u64`).
pub const MAX_ARMS: usize = 64;

/// `x ↦ ĝ(x) ∈ {0,1}^n` with independent coordinates, bit `i` set with
/// probability `means[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliTable {
    seed: u64,
    means: Arc<[f64]>,
}

impl BernoulliTable {
    pub fn new(seed: u64, means: &[f64]) -> Result<Self> {
        if means.is_empty() || means.len() > MAX_ARMS {
            return Err(Error::Validation(alloc::format!(
                "lazy Bernoulli table needs 1..={MAX_ARMS} arms, got {}",
                means.len()
            )));
        }
        Ok(Self { seed, means: means.into() })
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// All coordinates of `ĝ(x)`, bit `i` of the result is coordinate `i`.
    pub fn bits(&self, x: u64) -> u64 {
        let mut s = Stream::keyed(self.seed, BERNOULLI_DOMAIN, x);
        draw_bits(&mut s, &self.means)
    }

    pub fn bit(&self, x: u64, arm: usize) -> bool {
        (self.bits(x) >> arm) & 1 == 1
    }
}

/// One independent Bernoulli draw per arm, packed little-endian into a word.
pub(crate) fn draw_bits(stream: &mut Stream, means: &[f64]) -> u64 {
    means
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &p)| if stream.bernoulli(p) { acc | (1 << i) } else { acc })
}

/// Per-context uniform permutation of `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationTable {
    seed: u64,
    n: usize,
}

impl PermutationTable {
    pub fn new(seed: u64, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_ARMS {
            return Err(Error::Validation(alloc::format!("permutation size must be 1..={MAX_ARMS}, got {n}")));
        }
        Ok(Self { seed, n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn table(&self, x: u64) -> [u8; MAX_ARMS] {
        let mut perm = [0u8; MAX_ARMS];
        for (i, p) in perm.iter_mut().enumerate().take(self.n) {
            *p = i as u8;
        }
        let mut s = Stream::keyed(self.seed, PERMUTATION_DOMAIN, x);
        for i in (1..self.n).rev() {
            let j = s.below(i as u64 + 1) as usize;
            perm.swap(i, j);
        }
        perm
    }

    /// `π_x(i)`.
    pub fn image(&self, x: u64, i: usize) -> usize {
        self.table(x)[i] as usize
    }

    /// `π_x^{-1}(r)`.
    pub fn preimage(&self, x: u64, r: usize) -> usize {
        let t = self.table(x);
        t[..self.n].iter().position(|&v| v as usize == r).expect("r within permutation range")
    }

    pub fn permutation(&self, x: u64) -> Vec<usize> {
        self.table(x)[..self.n].iter().map(|&v| v as usize).collect()
    }
}

/// Per-context winning action out of two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WinnerTable {
    seed: u64,
}

impl WinnerTable {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn winner(&self, x: u64) -> usize {
        (Stream::keyed(self.seed, WINNER_DOMAIN, x).next_u64() >> 63) as usize
    }
}
