//! BPSK over AWGN: SNR and noise level, hard-decision flip probability, the
//! reliability-mask threshold and seeded samplers.
//!
//! SNR here is `-10 log10(sigma^2)` for symbols at `+-1`. This is not Eb/N0.

use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gf2::BitVector;

const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Standard normal CDF `Phi(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal upper tail `1 - Phi(x)`, accurate deep into the tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Inverse of [`normal_cdf`].
///
/// Acklam's rational approximation followed by one Halley step against
/// `erfc`; relative error is at the level of double rounding.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        return -normal_quantile_lower(1.0 - p);
    }
    normal_quantile_lower(p)
}

/// Inverse of [`normal_sf`]: the `x` with `1 - Phi(x) = tail`. Use this
/// instead of `normal_quantile(1 - tail)` when `tail` is tiny.
pub fn normal_isf(tail: f64) -> f64 {
    if tail <= 0.0 {
        return f64::INFINITY;
    }
    if tail >= 1.0 {
        return f64::NEG_INFINITY;
    }
    if tail > 0.5 {
        return normal_quantile_lower(1.0 - tail);
    }
    -normal_quantile_lower(tail)
}

// Quantile for p in (0, 0.5], computed from p itself so small p keeps its
// relative precision.
fn normal_quantile_lower(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let x = if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    // Halley refinement on Phi(x) - p.
    let e = normal_cdf(x) - p;
    let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(x * x / 2.0);
    x - u / (1.0 + x * u / 2.0)
}

/// `C(n, b) p^b (1 - p)^(n - b)`, evaluated in log space.
pub fn binomial_pmf(n: usize, p: f64, b: usize) -> f64 {
    if b > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if b == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if b == n { 1.0 } else { 0.0 };
    }
    let (n_f, b_f) = (n as f64, b as f64);
    let log_choose = libm::lgamma(n_f + 1.0) - libm::lgamma(b_f + 1.0) - libm::lgamma(n_f - b_f + 1.0);
    libm::exp(log_choose + b_f * libm::log(p) + (n_f - b_f) * libm::log1p(-p))
}

/// `P(B > b)` for `B ~ Binomial(n, p)`, summed from the upper end.
pub fn binomial_tail(n: usize, p: f64, b: usize) -> f64 {
    ((b + 1)..=n).rev().map(|j| binomial_pmf(n, p, j)).sum()
}

/// BPSK-AWGN channel at a given SNR for `n`-bit blocks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelModel {
    snr_db: f64,
    sigma: f64,
    n: usize,
}

impl ChannelModel {
    pub fn from_snr_db(snr_db: f64, n: usize) -> Self {
        ChannelModel { snr_db, sigma: libm::pow(10.0, -snr_db / 20.0), n }
    }

    pub fn from_sigma(sigma: f64, n: usize) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!("sigma must be positive, got {sigma}")));
        }
        Ok(ChannelModel { snr_db: -20.0 * libm::log10(sigma), sigma, n })
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Hard-decision flip probability `P(sigma N > 1)`.
    pub fn flip_prob(&self) -> f64 {
        normal_sf(1.0 / self.sigma)
    }

    /// Probability that at least one bit of a block flips.
    pub fn uncoded_bler(&self) -> f64 {
        -libm::expm1(self.n as f64 * libm::log1p(-self.flip_prob()))
    }
}

/// Hard-decision flip probability of a channel.
pub fn flip_prob(ch: &ChannelModel) -> f64 {
    ch.flip_prob()
}

/// Reliability mask for one channel: a received value within `+-tau` of 0
/// marks its bit unreliable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaskSpec {
    /// Target probability that a block contains a bit that is flipped yet
    /// marked reliable.
    pub merr: f64,
    pub tau: f64,
    /// Probability a bit is marked unreliable.
    pub q: f64,
    /// Flip probability of a bit given it is marked unreliable.
    pub p_u: f64,
    /// Probability a single bit is flipped yet marked reliable.
    pub reliable_flip: f64,
}

impl MaskSpec {
    /// Mask error rate actually achieved by `tau`:
    /// `1 - Phi((1 + tau) / sigma)^n`.
    pub fn achieved_merr(&self, ch: &ChannelModel) -> f64 {
        let tail = normal_sf((1.0 + self.tau) / ch.sigma());
        -libm::expm1(ch.n() as f64 * libm::log1p(-tail))
    }

    /// A mask that flags every bit unreliable (`tau` infinite).
    pub fn all_unreliable(ch: &ChannelModel) -> Self {
        MaskSpec { merr: 0.0, tau: f64::INFINITY, q: 1.0, p_u: ch.flip_prob(), reliable_flip: 0.0 }
    }
}

/// Threshold `tau = sigma F^-1((1 - merr)^(1/n)) - 1` and the derived
/// unreliable-bit probability `q` and conditional flip probability `p_u`.
pub fn mask_threshold(ch: &ChannelModel, merr: f64) -> Result<MaskSpec> {
    if !(merr > 0.0 && merr < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("merr must lie in (0, 1), got {merr}")));
    }
    let sigma = ch.sigma();
    // Per-bit tail 1 - (1 - merr)^(1/n), kept accurate when it is tiny.
    let bit_tail = -libm::expm1(libm::log1p(-merr) / ch.n() as f64);
    let mut tau = sigma * normal_isf(bit_tail) - 1.0;
    if tau < 0.0 {
        if tau > -1e-9 {
            tau = 0.0;
        } else {
            return Err(Error::NegativeThreshold { tau });
        }
    }
    let q = normal_cdf((-1.0 + tau) / sigma) - normal_cdf((-1.0 - tau) / sigma);
    let joint = normal_sf(1.0 / sigma) - normal_sf((1.0 + tau) / sigma);
    let p_u = if q > 0.0 { (joint / q).clamp(0.0, 1.0) } else { 0.0 };
    Ok(MaskSpec { merr, tau, q, p_u, reliable_flip: normal_sf((1.0 + tau) / sigma) })
}

/// Deterministic generator for one trial: the stream is selected by
/// `(seed, stratum)` and the position in it by `trial`.
pub fn trial_rng(seed: u64, stratum: u64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = seed ^ stratum.wrapping_mul(0xD1B5_4A32_D192_ED03);
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One transmission through the channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Received {
    /// Hard decisions.
    pub y: BitVector,
    /// Reliability mask, 1 = unreliable. All ones when no mask was requested.
    pub s: BitVector,
    /// Positions the noise flipped.
    pub flips: BitVector,
}

/// Modulates `c` (0 -> +1, 1 -> -1), adds `sigma N` noise and hard-decides.
pub fn sample_received_with<R: Rng>(c: &BitVector, ch: &ChannelModel, mask: Option<&MaskSpec>, rng: &mut R) -> Received {
    let n = c.len();
    let mut y = BitVector::zeros(n);
    let mut s = BitVector::ones(n);
    let mut flips = BitVector::zeros(n);
    for i in 0..n {
        let bit = c.get(i);
        let symbol = if bit { -1.0 } else { 1.0 };
        let noise: f64 = rng.sample(StandardNormal);
        let r = symbol + ch.sigma() * noise;
        let decided = r < 0.0;
        y.set(i, decided);
        flips.set(i, decided != bit);
        if let Some(m) = mask {
            s.set(i, libm::fabs(r) <= m.tau);
        }
    }
    Received { y, s, flips }
}

pub fn sample_received(c: &BitVector, ch: &ChannelModel, mask: Option<&MaskSpec>, seed: u64) -> Received {
    sample_received_with(c, ch, mask, &mut trial_rng(seed, 0, 0))
}

/// Uniformly random subset of `b` of the `n` positions, ascending.
pub fn sample_positions<R: Rng>(n: usize, b: usize, rng: &mut R) -> Vec<usize> {
    let mut v = index::sample(rng, n, b).into_vec();
    v.sort_unstable();
    v
}

/// Uniformly random weight-`b` pattern of length `n`.
pub fn sample_flip_positions(n: usize, b: usize, seed: u64) -> BitVector {
    let mut rng = trial_rng(seed, 0, 0);
    BitVector::from_positions(n, &sample_positions(n, b, &mut rng))
}

pub fn random_word<R: Rng>(len: usize, rng: &mut R) -> BitVector {
    let words = (0..len.div_ceil(64)).map(|_| rng.random::<u64>()).collect();
    BitVector::from_words(len, words)
}
