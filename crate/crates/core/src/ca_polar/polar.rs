use alloc::vec::Vec;

use super::tables::RELIABILITY_1024;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};

fn check_length(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(())
}

/// Rows `info_set` (ascending) of the `m`-fold Kronecker power of
/// `[[1, 0], [1, 1]]`, in natural (non-bit-reversed) order.
///
/// Entry `(i, j)` of the Kronecker power is set iff the binary digits of `j`
/// are a subset of those of `i`.
pub fn polar_generator(n: usize, info_set: &[usize]) -> Result<BitMatrix> {
    check_length(n)?;
    let mut rows_idx = info_set.to_vec();
    rows_idx.sort_unstable();
    rows_idx.dedup();
    if rows_idx.len() != info_set.len() {
        return Err(Error::InvalidSpec("information set has repeated indices".into()));
    }
    if let Some(&bad) = rows_idx.last().filter(|&&i| i >= n) {
        return Err(Error::InvalidSpec(alloc::format!("polar row {bad} out of range for n = {n}")));
    }
    let rows = rows_idx
        .iter()
        .map(|&i| BitVector::from_fn(n, |j| j & !i == 0))
        .collect();
    BitMatrix::from_rows(n, rows)
}

/// The `size` most reliable sub-channels for block length `n` according to
/// the TS 38.212 reliability sequence, ascending. Requires `n <= 1024`.
pub fn ts38212_info_set(n: usize, size: usize) -> Result<Vec<usize>> {
    check_length(n)?;
    if n > RELIABILITY_1024.len() {
        return Err(Error::InvalidSpec(alloc::format!(
            "the TS 38.212 reliability sequence stops at N = 1024, got n = {n}"
        )));
    }
    if size > n {
        return Err(Error::InvalidSpec(alloc::format!("{size} information rows exceed n = {n}")));
    }
    let ordered: Vec<usize> =
        RELIABILITY_1024.iter().map(|&q| q as usize).filter(|&q| q < n).collect();
    let mut set = ordered[n - size..].to_vec();
    set.sort_unstable();
    Ok(set)
}

/// Bhattacharyya parameters of the `n` synthetic channels for a binary
/// erasure channel with erasure probability `z0`, natural index order. The
/// most significant index bit selects the outermost polarization step.
pub fn bhattacharyya_parameters(n: usize, z0: f64) -> Result<Vec<f64>> {
    check_length(n)?;
    let m = n.trailing_zeros();
    Ok((0..n)
        .map(|i| {
            (0..m).rev().fold(z0, |z, bit| if (i >> bit) & 1 == 1 { z * z } else { 2.0 * z - z * z })
        })
        .collect())
}

/// The `size` sub-channels with the smallest Bhattacharyya parameter
/// (design erasure probability 0.5), ascending. Ties go to the higher index.
pub fn bhattacharyya_info_set(n: usize, size: usize) -> Result<Vec<usize>> {
    let z = bhattacharyya_parameters(n, 0.5)?;
    if size > n {
        return Err(Error::InvalidSpec(alloc::format!("{size} information rows exceed n = {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(b.cmp(&a)));
    let mut set = order[..size].to_vec();
    set.sort_unstable();
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn kronecker(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
        BitMatrix::from_fn(a.rows() * b.rows(), a.cols() * b.cols(), |i, j| {
            a.get(i / b.rows(), j / b.cols()) && b.get(i % b.rows(), j % b.cols())
        })
    }

    fn kernel_power(m: u32) -> BitMatrix {
        let f = BitMatrix::from_fn(2, 2, |i, j| !(i == 0 && j == 1));
        (1..m).fold(f.clone(), |acc, _| kronecker(&acc, &f))
    }

    #[test]
    fn kernel_itself() {
        let g = polar_generator(2, &[0, 1]).unwrap();
        assert_eq!(g.row(0).to_string(), "10");
        assert_eq!(g.row(1).to_string(), "11");
    }

    #[test]
    fn n4_examples() {
        assert_eq!(polar_generator(4, &[3]).unwrap().row(0).to_string(), "1111");
        let g = polar_generator(4, &[0, 1, 2, 3]).unwrap();
        let rows: Vec<_> = g.row_iter().map(|r| r.to_string()).collect();
        assert_eq!(rows, vec!["1000", "1100", "1010", "1111"]);
    }

    #[test]
    fn matches_explicit_kronecker_power() {
        for m in 1..=6u32 {
            let n = 1usize << m;
            let all: Vec<usize> = (0..n).collect();
            assert_eq!(polar_generator(n, &all).unwrap(), kernel_power(m));
        }
    }

    #[test]
    fn rejects_bad_lengths() {
        assert_eq!(polar_generator(12, &[0]), Err(Error::NotPowerOfTwo(12)));
        assert!(polar_generator(8, &[8]).is_err());
        assert!(polar_generator(8, &[1, 1]).is_err());
    }

    #[test]
    fn bhattacharyya_hand_values() {
        let z = bhattacharyya_parameters(4, 0.5).unwrap();
        let expect = [0.9375, 0.5625, 0.4375, 0.0625];
        for (a, b) in z.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(bhattacharyya_info_set(4, 2).unwrap(), vec![2, 3]);
    }

    #[test]
    fn reliability_sequence_is_a_permutation() {
        let mut seen = vec![false; 1024];
        for &q in RELIABILITY_1024.iter() {
            assert!(!seen[q as usize]);
            seen[q as usize] = true;
        }
        assert_eq!(ts38212_info_set(8, 3).unwrap(), vec![5, 6, 7]);
        assert_eq!(ts38212_info_set(128, 128).unwrap(), (0..128).collect::<Vec<_>>());
    }
}
