use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};

/// Binary CRC generator polynomial, stored with the leading term: bit `d` is
/// the coefficient of `x^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CrcPolynomial(u64);

impl CrcPolynomial {
    /// x^11 + x^10 + x^9 + x^5 + 1
    pub const CRC11: CrcPolynomial = CrcPolynomial(0xE21);
    /// x^24 + x^23 + x^21 + x^20 + x^17 + x^15 + x^13 + x^12 + x^8 + x^4 + x^2 + x + 1
    pub const CRC24C: CrcPolynomial = CrcPolynomial(0x1B2_B117);
    /// The trivial polynomial `1`: no CRC bits.
    pub const NONE: CrcPolynomial = CrcPolynomial(1);

    pub fn new(coefficients: u64) -> Result<Self> {
        if coefficients == 0 || coefficients & 1 == 0 {
            return Err(Error::BadPolynomial);
        }
        Ok(CrcPolynomial(coefficients))
    }

    pub fn coefficients(self) -> u64 {
        self.0
    }

    /// Number of CRC bits `r`.
    pub fn degree(self) -> usize {
        63 - self.0.leading_zeros() as usize
    }
}

impl FromStr for CrcPolynomial {
    type Err = Error;

    /// Hex, most significant coefficient first, leading term included.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
        let v = u64::from_str_radix(digits, 16)
            .map_err(|e| Error::Parse(alloc::format!("CRC polynomial {s:?}: {e}")))?;
        CrcPolynomial::new(v)
    }
}

impl fmt::Display for CrcPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:X}", self.0)
    }
}

/// Remainders `x^j mod g(x)` for consecutive `j`, as `r`-bit integers.
struct PowerRemainders {
    poly: u64,
    degree: usize,
    current: u64,
}

impl PowerRemainders {
    fn starting_at_degree(poly: CrcPolynomial) -> Self {
        let degree = poly.degree();
        let low = poly.0 & low_mask(degree);
        // x^r mod g = g - x^r
        PowerRemainders { poly: low, degree, current: low }
    }

    fn step(&mut self) {
        let carry = self.degree > 0 && (self.current >> (self.degree - 1)) & 1 == 1;
        self.current = (self.current << 1) & low_mask(self.degree);
        if carry {
            self.current ^= self.poly;
        }
    }
}

fn low_mask(bits: usize) -> u64 {
    if bits == 0 {
        0
    } else {
        u64::MAX >> (64 - bits)
    }
}

/// Systematic CRC generator: a `k x (k + r)` matrix whose row `i` is the
/// message `e_i` followed by the `r` remainder bits of `x^r m(x) mod g(x)`.
///
/// Message bit 0 is the highest-degree coefficient of `m(x)` and remainder
/// bits are likewise written highest degree first. Zero initial state, no
/// reflection, no final XOR.
pub fn crc_generator_matrix(k: usize, poly: CrcPolynomial) -> Result<BitMatrix> {
    if k == 0 {
        return Err(Error::InvalidSpec("information length must be positive".into()));
    }
    let r = poly.degree();
    let width = k + r;
    // Row i carries x^(r + k - 1 - i); walk the powers upward from x^r.
    let mut parities: Vec<u64> = Vec::with_capacity(k);
    let mut powers = PowerRemainders::starting_at_degree(poly);
    for _ in 0..k {
        parities.push(if r == 0 { 0 } else { powers.current });
        powers.step();
    }
    let rows = (0..k)
        .map(|i| {
            let parity = parities[k - 1 - i];
            let mut row = BitVector::unit(width, i);
            for j in 0..r {
                if (parity >> (r - 1 - j)) & 1 == 1 {
                    row.set(k + j, true);
                }
            }
            row
        })
        .collect();
    BitMatrix::from_rows(width, rows)
}
