//! CRC-aided polar codes as single binary linear codes.
//!
//! An information word `x` (k bits) is CRC-encoded, permuted by the input
//! interleaver and polar-transformed, so the whole chain is the product
//! `G = G_crc * M_interleave * G_polar` and decoding only needs the parity
//! check matrix of `G`.

mod crc;
mod polar;
pub mod tables;

use alloc::string::String;
use alloc::vec::Vec;

pub use crc::{crc_generator_matrix, CrcPolynomial};
pub use polar::{bhattacharyya_info_set, bhattacharyya_parameters, polar_generator, ts38212_info_set};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use tables::INTERLEAVER_164;

/// Permutation applied to the CRC-encoded word before polar encoding, with
/// the gather convention `out[i] = in[perm[i]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Interleaver {
    Identity,
    /// The downlink input bit interleaver, defined for lengths up to 164.
    Ts38212,
    Explicit(Vec<usize>),
}

impl Interleaver {
    pub fn permutation(&self, len: usize) -> Result<Vec<usize>> {
        let perm = match self {
            Interleaver::Identity => (0..len).collect(),
            Interleaver::Ts38212 => ts38212_interleaver(len)?,
            Interleaver::Explicit(p) => p.clone(),
        };
        if perm.len() != len {
            return Err(Error::InvalidSpec(alloc::format!(
                "interleaver has {} entries, expected {len}",
                perm.len()
            )));
        }
        let mut seen = alloc::vec![false; len];
        for &p in &perm {
            if p >= len || core::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidSpec("interleaver is not a bijection".into()));
            }
        }
        Ok(perm)
    }
}

/// Input bit interleaver pattern for `len <= 164` payload bits.
pub fn ts38212_interleaver(len: usize) -> Result<Vec<usize>> {
    let max = INTERLEAVER_164.len();
    if len > max {
        return Err(Error::InvalidSpec(alloc::format!(
            "the TS 38.212 input interleaver supports at most {max} bits, got {len}"
        )));
    }
    let offset = max - len;
    Ok(INTERLEAVER_164
        .iter()
        .map(|&p| p as usize)
        .filter(|&p| p >= offset)
        .map(|p| p - offset)
        .collect())
}

/// How the polar information rows are chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InfoSetRule {
    /// Most reliable rows per the TS 38.212 reliability sequence.
    Ts38212,
    /// Smallest Bhattacharyya parameters at erasure probability 0.5.
    Bhattacharyya,
    Explicit(Vec<usize>),
}

/// Parameters of one CA-Polar code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeSpec {
    pub name: Option<String>,
    /// Block length, a power of two.
    pub n: usize,
    /// Information bits before CRC attachment.
    pub k: usize,
    pub crc: CrcPolynomial,
    pub interleaver: Interleaver,
    pub info_set: InfoSetRule,
}

impl CodeSpec {
    /// 5G NR uplink control code: CRC-11, no interleaving, 116 polar rows.
    pub fn uplink_128_105() -> Self {
        CodeSpec {
            name: Some("ul128_105".into()),
            n: 128,
            k: 105,
            crc: CrcPolynomial::CRC11,
            interleaver: Interleaver::Identity,
            info_set: InfoSetRule::Ts38212,
        }
    }

    /// 5G NR downlink control code: CRC-24C with the input interleaver, 123
    /// polar rows.
    pub fn downlink_128_99() -> Self {
        CodeSpec {
            name: Some("dl128_99".into()),
            n: 128,
            k: 99,
            crc: CrcPolynomial::CRC24C,
            interleaver: Interleaver::Ts38212,
            info_set: InfoSetRule::Ts38212,
        }
    }

    /// Looks up a shipped preset by name.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "ul128_105" | "uplink" => Some(Self::uplink_128_105()),
            "dl128_99" | "downlink" => Some(Self::downlink_128_99()),
            _ => None,
        }
    }

    /// CRC-encoded payload length `k + r`.
    pub fn payload_len(&self) -> usize {
        self.k + self.crc.degree()
    }

    /// Polar rows carrying the payload, ascending.
    pub fn resolve_info_set(&self) -> Result<Vec<usize>> {
        let size = self.payload_len();
        let set = match &self.info_set {
            InfoSetRule::Ts38212 => ts38212_info_set(self.n, size)?,
            InfoSetRule::Bhattacharyya => bhattacharyya_info_set(self.n, size)?,
            InfoSetRule::Explicit(rows) => {
                let mut rows = rows.clone();
                rows.sort_unstable();
                rows
            }
        };
        if set.len() != size {
            return Err(Error::InvalidSpec(alloc::format!(
                "information set has {} rows but k + r = {size}",
                set.len()
            )));
        }
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(self.n));
        }
        if self.k == 0 {
            return Err(Error::InvalidSpec("k must be positive".into()));
        }
        if self.payload_len() > self.n {
            return Err(Error::InvalidSpec(alloc::format!(
                "k + r = {} exceeds n = {}",
                self.payload_len(),
                self.n
            )));
        }
        self.interleaver.permutation(self.payload_len())?;
        self.resolve_info_set()?;
        Ok(())
    }
}

/// A binary linear code with generator `G` (`k x n`) and parity check `H`
/// (`(n - k) x n`), `H G^T = 0`.
#[derive(Clone, Debug)]
pub struct Code {
    spec: Option<CodeSpec>,
    generator: BitMatrix,
    parity_check: BitMatrix,
}

impl Code {
    /// Builds `G = G_crc * M_interleave * G_polar` and its parity check.
    pub fn build(spec: &CodeSpec) -> Result<Code> {
        spec.validate()?;
        let g_crc = crc_generator_matrix(spec.k, spec.crc)?;
        let perm = spec.interleaver.permutation(spec.payload_len())?;
        let m_interleave = BitMatrix::gather_permutation(&perm);
        let g_polar = polar_generator(spec.n, &spec.resolve_info_set()?)?;
        let generator = g_crc.mat_mul(&m_interleave)?.mat_mul(&g_polar)?;
        let mut code = Code::from_generator(generator)?;
        code.spec = Some(spec.clone());
        Ok(code)
    }

    /// Any full-rank generator matrix.
    pub fn from_generator(generator: BitMatrix) -> Result<Code> {
        let parity_check = generator.null_space_basis()?;
        Ok(Code { spec: None, generator, parity_check })
    }

    pub fn spec(&self) -> Option<&CodeSpec> {
        self.spec.as_ref()
    }

    pub fn n(&self) -> usize {
        self.generator.cols()
    }

    pub fn k(&self) -> usize {
        self.generator.rows()
    }

    /// Number of parity checks, `n - k`.
    pub fn redundancy(&self) -> usize {
        self.parity_check.rows()
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    pub fn parity_check(&self) -> &BitMatrix {
        &self.parity_check
    }

    /// `x G`.
    pub fn encode(&self, x: &BitVector) -> Result<BitVector> {
        self.generator.vec_mat_mul(x)
    }

    /// `H y^T`.
    pub fn syndrome(&self, y: &BitVector) -> Result<BitVector> {
        self.parity_check.mat_vec_mul(y)
    }

    /// Codebook membership: `H y^T == 0`.
    pub fn is_codeword(&self, y: &BitVector) -> Result<bool> {
        Ok(self.syndrome(y)?.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn full_polar_transform_when_everything_is_trivial() {
        let spec = CodeSpec {
            name: None,
            n: 8,
            k: 8,
            crc: CrcPolynomial::NONE,
            interleaver: Interleaver::Identity,
            info_set: InfoSetRule::Ts38212,
        };
        let code = Code::build(&spec).unwrap();
        assert_eq!(code.generator(), &polar_generator(8, &(0..8).collect::<Vec<_>>()).unwrap());
        assert_eq!(code.redundancy(), 0);
    }

    #[test]
    fn shipped_codes_have_expected_shapes() {
        for (spec, h_rows) in [(CodeSpec::uplink_128_105(), 23), (CodeSpec::downlink_128_99(), 29)] {
            let code = Code::build(&spec).unwrap();
            assert_eq!(code.parity_check().rows(), h_rows);
            assert!(code.parity_check().mat_mul(&code.generator().transpose()).unwrap().is_zero());
        }
    }

    #[test]
    fn interleaver_shortening() {
        let p = ts38212_interleaver(164).unwrap();
        assert_eq!(&p[..4], &[0, 2, 4, 7]);
        // For short payloads only the tail of the table survives.
        assert_eq!(ts38212_interleaver(1).unwrap(), vec![0]);
        let p123 = Interleaver::Ts38212.permutation(123).unwrap();
        assert_eq!(p123.len(), 123);
        assert!(ts38212_interleaver(165).is_err());
    }

    #[test]
    fn interleaver_inverse_restores_payload() {
        let perm = Interleaver::Ts38212.permutation(123).unwrap();
        let m = BitMatrix::gather_permutation(&perm);
        let mut inverse = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        let m_inv = BitMatrix::gather_permutation(&inverse);
        assert_eq!(m.mat_mul(&m_inv).unwrap(), BitMatrix::identity(123));
    }

    #[test]
    fn invalid_specs() {
        let mut spec = CodeSpec::uplink_128_105();
        spec.n = 96;
        assert_eq!(Code::build(&spec).unwrap_err(), Error::NotPowerOfTwo(96));

        let mut spec = CodeSpec::uplink_128_105();
        spec.k = 120;
        assert!(Code::build(&spec).is_err());

        let mut spec = CodeSpec::uplink_128_105();
        spec.interleaver = Interleaver::Explicit(vec![0; 116]);
        assert!(Code::build(&spec).is_err());
    }

    #[test]
    fn rank_deficient_composite_is_reported() {
        // Third row is the sum of the first two.
        let g = BitMatrix::from_rows(
            4,
            vec!["1100".parse().unwrap(), "0011".parse().unwrap(), "1111".parse().unwrap()],
        )
        .unwrap();
        assert_eq!(Code::from_generator(g).unwrap_err(), Error::RankDeficient { row: 2 });
    }

    #[test]
    fn small_code_membership_matches_codebook() {
        let spec = CodeSpec {
            name: None,
            n: 8,
            k: 4,
            crc: CrcPolynomial::NONE,
            interleaver: Interleaver::Identity,
            info_set: InfoSetRule::Bhattacharyya,
        };
        let code = Code::build(&spec).unwrap();
        let mut codebook = alloc::collections::BTreeSet::new();
        for m in 0u32..16 {
            let x = BitVector::from_fn(4, |i| (m >> i) & 1 == 1);
            codebook.insert(code.encode(&x).unwrap());
        }
        assert_eq!(codebook.len(), 16);
        for w in 0u32..256 {
            let y = BitVector::from_fn(8, |i| (w >> i) & 1 == 1);
            assert_eq!(code.is_codeword(&y).unwrap(), codebook.contains(&y));
        }
    }
}
