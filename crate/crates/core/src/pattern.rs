//! Noise-pattern enumeration in binary-symmetric-channel likelihood order.
//!
//! Patterns are emitted by nondecreasing Hamming weight; within a weight the
//! flip-position subsets (as indices into the support) come in colexicographic
//! order, i.e. ordered by largest element, then the next largest, and so on.
//! The colex rank of a subset `a_1 < ... < a_w` is `sum_i C(a_i, i)`.

use alloc::vec::Vec;
use core::ops::Range;

use crate::gf2::BitVector;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of patterns of weight at most `w` on a support of `n_support`
/// positions: `sum_{b=0}^{w} C(n_support, b)`. Exact, saturating at `u128::MAX`.
pub fn count_up_to_weight(n_support: usize, w: usize) -> u128 {
    (0..=w.min(n_support)).fold(0u128, |acc, b| acc.saturating_add(binomial(n_support, b)))
}

/// Colex rank of a strictly increasing subset within its weight class.
pub fn colex_rank(subset: &[usize]) -> u128 {
    subset.iter().enumerate().map(|(i, &a)| binomial(a, i + 1)).sum()
}

/// Splits the weight-`w` subsets of `0..l` into at most `parts` contiguous
/// colex ranges, returned as ranges of the largest element. Ranges are
/// balanced by pattern count and listed in colex order.
pub fn colex_ranges(l: usize, w: usize, parts: usize) -> Vec<Range<usize>> {
    if w == 0 || w > l {
        return Vec::new();
    }
    let total = binomial(l, w);
    let parts = parts.max(1) as u128;
    let mut out = Vec::new();
    let mut start = w - 1;
    let mut acc: u128 = 0;
    let mut boundary = 1;
    for top in (w - 1)..l {
        // Subsets with largest element `top`.
        acc += binomial(top, w - 1);
        if acc * parts >= total * boundary || top + 1 == l {
            out.push(start..top + 1);
            start = top + 1;
            while acc * parts >= total * boundary {
                boundary += 1;
            }
        }
    }
    out
}

/// Stateful successor over noise patterns restricted to a support set.
#[derive(Clone, Debug)]
pub struct PatternCursor {
    n: usize,
    support: Vec<usize>,
    weight: usize,
    // Current subset as indices into `support`, strictly increasing.
    subset: Vec<usize>,
    started: bool,
    exhausted: bool,
    delta: Vec<usize>,
}

impl PatternCursor {
    /// Cursor over all `2^n` patterns.
    pub fn full(n: usize) -> Self {
        Self::with_support(n, (0..n).collect())
    }

    /// Cursor whose support is the set bits of `mask` (1 = unreliable).
    pub fn masked(mask: &BitVector) -> Self {
        Self::with_support(mask.len(), mask.iter_ones().collect())
    }

    /// `support` must be strictly increasing positions below `n`.
    pub fn with_support(n: usize, support: Vec<usize>) -> Self {
        debug_assert!(support.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(support.last().is_none_or(|&p| p < n));
        PatternCursor {
            n,
            support,
            weight: 0,
            subset: Vec::new(),
            started: false,
            exhausted: false,
            delta: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Weight of the most recently emitted pattern.
    pub fn weight(&self) -> usize {
        self.weight
    }

    /// Ambient flip positions of the most recently emitted pattern.
    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.subset.iter().map(|&i| self.support[i])
    }

    /// Moves to the next pattern and returns the ambient positions whose bits
    /// differ from the previous pattern (for the first pattern, 0^n, the delta
    /// is empty). Returns `None` once every pattern on the support was emitted.
    pub fn advance(&mut self) -> Option<&[usize]> {
        if self.exhausted {
            return None;
        }
        self.delta.clear();
        if !self.started {
            self.started = true;
            return Some(&self.delta);
        }
        let l = self.support.len();
        let old: Vec<usize> = self.subset.clone();
        if !self.colex_successor() {
            if self.weight == l {
                self.exhausted = true;
                return None;
            }
            self.weight += 1;
            self.subset.clear();
            self.subset.extend(0..self.weight);
        }
        symmetric_difference(&old, &self.subset, &mut self.delta);
        for d in self.delta.iter_mut() {
            *d = self.support[*d];
        }
        Some(&self.delta)
    }

    /// Next pattern as an explicit length-`n` vector.
    pub fn next_pattern(&mut self) -> Option<BitVector> {
        self.advance()?;
        let mut z = BitVector::zeros(self.n);
        for p in self.positions() {
            z.set(p, true);
        }
        Some(z)
    }

    fn colex_successor(&mut self) -> bool {
        let l = self.support.len();
        let w = self.subset.len();
        for i in 0..w {
            let limit = if i + 1 < w { self.subset[i + 1] } else { l };
            if self.subset[i] + 1 < limit {
                self.subset[i] += 1;
                for (j, s) in self.subset.iter_mut().enumerate().take(i) {
                    *s = j;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for PatternCursor {
    type Item = BitVector;

    fn next(&mut self) -> Option<BitVector> {
        self.next_pattern()
    }
}

fn symmetric_difference(a: &[usize], b: &[usize], out: &mut Vec<usize>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                out.push(*x);
                i += 1;
            }
            (Some(_), Some(y)) => {
                out.push(*y);
                j += 1;
            }
            (Some(x), None) => {
                out.push(*x);
                i += 1;
            }
            (None, Some(y)) => {
                out.push(*y);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
}
