//! Bit-packed vectors and dense matrices over GF(2).
//!
//! Bit `i` of a [`BitVector`] lives in word `i / 64` at bit position `i % 64`.
//! Storage past `len` is always zero so that derived equality is bitwise
//! equality.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// Fixed-length binary word.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector { len, words: vec![0; words_for(len)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVector { len, words: vec![u64::MAX; words_for(len)] };
        v.clear_tail();
        v
    }

    /// Unit vector `e_i`.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD == 0 {
                words.push(0);
            }
            if b {
                words[len / WORD] |= 1 << (len % WORD);
            }
            len += 1;
        }
        BitVector { len, words }
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        Self::from_bits((0..len).map(&mut f))
    }

    /// Builds a vector of `len` bits with ones at `positions`.
    pub fn from_positions(len: usize, positions: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &p in positions {
            v.set(p, true);
        }
        v
    }

    /// Builds a vector from raw words; bits past `len` are discarded.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut v = BitVector { len, words };
        v.clear_tail();
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD] ^= 1 << (i % WORD);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &BitVector) -> Result<()> {
        self.check_len(other.len)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn and(&self, other: &BitVector) -> Result<BitVector> {
        self.check_len(other.len)?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        Ok(BitVector { len: self.len, words })
    }

    /// Inner product over GF(2): parity of the bitwise AND.
    pub fn dot(&self, other: &BitVector) -> Result<bool> {
        self.check_len(other.len)?;
        Ok(self.dot_unchecked(other))
    }

    #[inline]
    fn dot_unchecked(&self, other: &BitVector) -> bool {
        let folded = self.words.iter().zip(&other.words).fold(0u64, |acc, (a, b)| acc ^ (a & b));
        folded.count_ones() & 1 == 1
    }

    /// Number of positions where the two vectors differ.
    pub fn distance(&self, other: &BitVector) -> Result<usize> {
        self.check_len(other.len)?;
        Ok(self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum())
    }

    /// Indices of set bits, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            core::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + tz)
            })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Subvector of the bits at `positions`, in the given order.
    pub fn gather(&self, positions: &[usize]) -> BitVector {
        BitVector::from_bits(positions.iter().map(|&p| self.get(p)))
    }

    /// Hex rendering, most significant bit first: bit 0 is the high bit of
    /// the first digit. The final digit is zero-padded on the right.
    pub fn to_hex(&self) -> String {
        const DIGITS: &[u8; 16] = b"0123456789abcdef";
        let mut s = String::with_capacity(self.len.div_ceil(4));
        for chunk in 0..self.len.div_ceil(4) {
            let mut nibble = 0usize;
            for j in 0..4 {
                let i = chunk * 4 + j;
                nibble <<= 1;
                if i < self.len && self.get(i) {
                    nibble |= 1;
                }
            }
            s.push(DIGITS[nibble] as char);
        }
        s
    }

    /// Parses the MSB-first hex format written by [`to_hex`](Self::to_hex).
    /// Exactly `ceil(len / 4)` digits are required and pad bits must be zero.
    pub fn from_hex(len: usize, hex: &str) -> Result<BitVector> {
        let hex = hex.trim();
        let hex = hex.strip_prefix("0x").or_else(|| hex.strip_prefix("0X")).unwrap_or(hex);
        let digits = len.div_ceil(4);
        if hex.len() != digits {
            return Err(Error::Parse(alloc::format!(
                "expected {digits} hex digits for {len} bits, found {}",
                hex.len()
            )));
        }
        let mut v = BitVector::zeros(len);
        for (chunk, c) in hex.chars().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(alloc::format!("invalid hex digit {c:?}")))?;
            for j in 0..4 {
                let bit = (nibble >> (3 - j)) & 1 == 1;
                let i = chunk * 4 + j;
                if i < len {
                    v.set(i, bit);
                } else if bit {
                    return Err(Error::Parse(String::from("nonzero pad bits after the last position")));
                }
            }
        }
        Ok(v)
    }

    #[inline]
    fn check_len(&self, other: usize) -> Result<()> {
        if self.len == other {
            Ok(())
        } else {
            Err(Error::Dimension { expected: self.len, found: other })
        }
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    /// Parses a string of `0`/`1` characters; bit 0 comes first.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                '_' => {}
                other => return Err(Error::Parse(alloc::format!("invalid bit character {other:?}"))),
            }
        }
        Ok(BitVector::from_bits(bits))
    }
}

/// Dense row-major binary matrix; each row is a packed [`BitVector`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix { cols, rows: vec![BitVector::zeros(cols); rows] }
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix { cols: n, rows: (0..n).map(|i| BitVector::unit(n, i)).collect() }
    }

    /// Builds a matrix from rows; `cols` is needed to describe a 0-row matrix.
    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::Dimension { expected: cols, found: bad.len() });
        }
        Ok(BitMatrix { cols, rows })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        BitMatrix { cols, rows: (0..rows).map(|i| BitVector::from_fn(cols, |j| f(i, j))).collect() }
    }

    /// Column-permutation matrix `M` with `(x M)[j] = x[perm[j]]`.
    pub fn gather_permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut m = BitMatrix::zeros(n, n);
        for (j, &src) in perm.iter().enumerate() {
            m.set(src, j, true);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &BitVector> {
        self.rows.iter()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.rows[i].set(j, value)
    }

    pub fn column(&self, j: usize) -> BitVector {
        BitVector::from_fn(self.rows(), |i| self.get(i, j))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVector::is_zero)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows());
        for (i, row) in self.rows.iter().enumerate() {
            for j in row.iter_ones() {
                t.set(j, i, true);
            }
        }
        t
    }

    /// `M v`: bit `i` of the result is the parity of `row_i AND v`.
    pub fn mat_vec_mul(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::Dimension { expected: self.cols, found: v.len() });
        }
        Ok(BitVector::from_bits(self.rows.iter().map(|r| r.dot_unchecked(v))))
    }

    /// Row vector times matrix, `x M`: XOR of the rows selected by `x`.
    pub fn vec_mat_mul(&self, x: &BitVector) -> Result<BitVector> {
        if x.len() != self.rows() {
            return Err(Error::Dimension { expected: self.rows(), found: x.len() });
        }
        let mut acc = BitVector::zeros(self.cols);
        for i in x.iter_ones() {
            for (a, b) in acc.words.iter_mut().zip(&self.rows[i].words) {
                *a ^= b;
            }
        }
        Ok(acc)
    }

    pub fn mat_mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows() {
            return Err(Error::Dimension { expected: self.cols, found: other.rows() });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| other.vec_mat_mul(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(BitMatrix { cols: other.cols, rows })
    }

    /// Reduced row-echelon form and its (strictly increasing) pivot columns.
    /// Zero rows are kept, at the bottom.
    pub fn row_reduce(&self) -> (BitMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..m.cols {
            if next == m.rows() {
                break;
            }
            let Some(p) = (next..m.rows()).find(|&r| m.rows[r].get(col)) else {
                continue;
            };
            m.rows.swap(next, p);
            let pivot_row = m.rows[next].clone();
            for r in 0..m.rows() {
                if r != next && m.rows[r].get(col) {
                    for (a, b) in m.rows[r].words.iter_mut().zip(&pivot_row.words) {
                        *a ^= b;
                    }
                }
            }
            pivots.push(col);
            next += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.row_reduce().1.len()
    }

    /// Basis of the null space `{h : M h^T = 0}` as the rows of a
    /// `(cols - rank) x cols` matrix, one row per free column of the RREF.
    ///
    /// Requires full row rank; the first row that depends on earlier rows is
    /// reported otherwise.
    pub fn null_space_basis(&self) -> Result<BitMatrix> {
        if let Some(row) = self.first_dependent_row() {
            return Err(Error::RankDeficient { row });
        }
        let (rref, pivots) = self.row_reduce();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let basis = (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut h = BitVector::unit(self.cols, f);
                for (i, &p) in pivots.iter().enumerate() {
                    if rref.get(i, f) {
                        h.set(p, true);
                    }
                }
                h
            })
            .collect();
        Ok(BitMatrix { cols: self.cols, rows: basis })
    }

    /// Index of the first row lying in the span of the rows before it.
    pub fn first_dependent_row(&self) -> Option<usize> {
        // Echelon basis keyed by leading (lowest) set bit.
        let mut basis: Vec<(usize, BitVector)> = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            let mut v = row.clone();
            loop {
                let Some(lead) = v.iter_ones().next() else {
                    return Some(i);
                };
                match basis.iter().find(|(l, _)| *l == lead) {
                    Some((_, b)) => {
                        for (a, w) in v.words.iter_mut().zip(&b.words) {
                            *a ^= w;
                        }
                    }
                    None => {
                        basis.push((lead, v));
                        break;
                    }
                }
            }
        }
        None
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    fn mat(rows: &[&str]) -> BitMatrix {
        let rows: Vec<BitVector> = rows.iter().map(|r| bv(r)).collect();
        BitMatrix::from_rows(rows[0].len(), rows).unwrap()
    }

    #[test]
    fn xor_examples() {
        assert_eq!(bv("1011").xor(&bv("0000")).unwrap(), bv("1011"));
        assert_eq!(bv("1011").xor(&bv("1011")).unwrap(), bv("0000"));
        assert_eq!(bv("1011").xor(&bv("0110")).unwrap(), bv("1101"));
        assert_eq!(
            bv("1011").xor(&bv("10110")),
            Err(Error::Dimension { expected: 4, found: 5 })
        );
    }

    #[test]
    fn mat_vec_examples() {
        assert_eq!(BitMatrix::identity(4).mat_vec_mul(&bv("1010")).unwrap(), bv("1010"));
        assert_eq!(mat(&["110", "011"]).mat_vec_mul(&bv("111")).unwrap(), bv("00"));
        assert_eq!(mat(&["110", "011"]).mat_vec_mul(&bv("100")).unwrap(), bv("10"));
        assert!(BitMatrix::identity(4).mat_vec_mul(&bv("101")).is_err());
    }

    #[test]
    fn mat_mul_examples() {
        let a = mat(&["101", "011"]);
        assert_eq!(a.mat_mul(&BitMatrix::identity(3)).unwrap(), a);
        assert_eq!(BitMatrix::identity(2).mat_mul(&a).unwrap(), a);
        // [1 1] x [1 0; 1 1] = [1+1, 0+1] = [0 1]
        assert_eq!(mat(&["11"]).mat_mul(&mat(&["10", "11"])).unwrap(), mat(&["01"]));
        assert!(a.mat_mul(&a).is_err());
    }

    #[test]
    fn row_reduce_examples() {
        let (z, p) = BitMatrix::zeros(3, 4).row_reduce();
        assert!(z.is_zero());
        assert!(p.is_empty());

        let (i, p) = BitMatrix::identity(5).row_reduce();
        assert_eq!(i, BitMatrix::identity(5));
        assert_eq!(p, vec![0, 1, 2, 3, 4]);

        let (r, p) = mat(&["11", "11"]).row_reduce();
        assert_eq!(r, mat(&["11", "00"]));
        assert_eq!(p, vec![0]);
    }

    #[test]
    fn null_space_examples() {
        let h = mat(&["11"]).null_space_basis().unwrap();
        assert_eq!(h, mat(&["11"]));

        let h = BitMatrix::identity(4).null_space_basis().unwrap();
        assert_eq!(h.rows(), 0);
        assert_eq!(h.cols(), 4);

        // Hamming(7,4), systematic generator.
        let g = mat(&["1000110", "0100011", "0010111", "0001101"]);
        let h = g.null_space_basis().unwrap();
        assert_eq!(h.rows(), 3);
        assert_eq!(h.rank(), 3);
        assert!(h.mat_mul(&g.transpose()).unwrap().is_zero());
    }

    #[test]
    fn null_space_rejects_dependent_rows() {
        let g = mat(&["1100", "0110", "1010"]);
        assert_eq!(g.null_space_basis(), Err(Error::RankDeficient { row: 2 }));
    }

    #[test]
    fn hex_round_trip_is_msb_first() {
        let v = bv("10000000011");
        assert_eq!(v.to_hex(), "806");
        assert_eq!(BitVector::from_hex(11, "806").unwrap(), v);
        assert!(BitVector::from_hex(11, "807").is_err());
        assert!(BitVector::from_hex(11, "80").is_err());
    }

    #[test]
    fn canonical_tail_after_ones() {
        let v = BitVector::ones(70);
        assert_eq!(v.weight(), 70);
        assert_eq!(v, BitVector::from_fn(70, |_| true));
    }
}
