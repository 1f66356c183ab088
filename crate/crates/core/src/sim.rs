//! Stratified Monte-Carlo evaluation of the decoders.
//!
//! Rare block errors are estimated by conditioning on the number of flipped
//! bits (hard detection) or on the mask length and the flips inside the mask
//! (soft detection). Each stratum is simulated on its own and the conditional
//! estimates are mixed with exact binomial stratum weights.
//!
//! Everything here is serial. Trials are pure functions of
//! `(seed, stratum, trial)`, so callers may farm them out in any order and
//! rebuild identical statistics with [`ConditionalStats::from_outcomes`].

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

use crate::ca_polar::Code;
use crate::channel::{
    binomial_pmf, binomial_tail, random_word, sample_positions, sample_received_with, trial_rng, ChannelModel, MaskSpec,
};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::grand::{DecodeOutcome, Grand, GuessBudget, Serial, WeightSearch};
use crate::pattern::count_up_to_weight;

/// Two-sided 95% normal quantile used for the reported intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Default probability floor below which soft strata are not simulated.
pub const DEFAULT_STRATUM_FLOOR: f64 = 1e-10;

/// Conditional error rate above which decoding is not worth the work.
pub const AB_ERROR_LIMIT: f64 = 1.0 / 3.0;

/// The event a conditional run is restricted to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    /// Exactly `b` flips anywhere in the block.
    Flips { b: usize },
    /// A mask of `l` unreliable bits with exactly `b_u` flips among them and
    /// none elsewhere.
    Masked { l: usize, b_u: usize },
}

impl Condition {
    /// Identifier selecting the random stream of this stratum.
    pub fn stream_id(self) -> u64 {
        match self {
            Condition::Flips { b } => b as u64,
            Condition::Masked { l, b_u } => (1 << 48) | ((l as u64) << 24) | b_u as u64,
        }
    }
}

/// How one trial ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    pub queries: u64,
    /// A codeword other than the transmitted one was returned.
    pub wrong: bool,
    pub abandoned: bool,
}

impl TrialOutcome {
    pub fn judge(sent: &BitVector, outcome: &DecodeOutcome) -> Self {
        match &outcome.codeword {
            Some(c) => TrialOutcome { queries: outcome.queries, wrong: c != sent, abandoned: false },
            None => TrialOutcome { queries: outcome.queries, wrong: false, abandoned: true },
        }
    }

    pub fn is_error(&self) -> bool {
        self.wrong || self.abandoned
    }
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Monte-Carlo estimates for one stratum.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalStats {
    pub condition: Condition,
    pub trials: u64,
    pub wrong: u64,
    pub abandoned: u64,
    pub total_queries: u128,
    /// Distinct query counts with the fraction of trials at or below each.
    pub q_cdf: Vec<(u64, f64)>,
}

impl ConditionalStats {
    pub fn from_outcomes(condition: Condition, outcomes: &[TrialOutcome]) -> Self {
        let mut qs: Vec<u64> = outcomes.iter().map(|o| o.queries).collect();
        qs.sort_unstable();
        let total = qs.len() as f64;
        let mut q_cdf: Vec<(u64, f64)> = Vec::new();
        for (i, &q) in qs.iter().enumerate() {
            let frac = (i + 1) as f64 / total;
            match q_cdf.last_mut() {
                Some(last) if last.0 == q => last.1 = frac,
                _ => q_cdf.push((q, frac)),
            }
        }
        ConditionalStats {
            condition,
            trials: outcomes.len() as u64,
            wrong: outcomes.iter().filter(|o| o.wrong).count() as u64,
            abandoned: outcomes.iter().filter(|o| o.abandoned).count() as u64,
            total_queries: outcomes.iter().map(|o| u128::from(o.queries)).sum(),
            q_cdf,
        }
    }

    pub fn errors(&self) -> u64 {
        self.wrong + self.abandoned
    }

    fn rate(&self, count: u64) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            count as f64 / self.trials as f64
        }
    }

    /// `P(error | condition)`, wrong codewords and abandonments together.
    pub fn cond_bler(&self) -> f64 {
        self.rate(self.errors())
    }

    pub fn cond_wrong(&self) -> f64 {
        self.rate(self.wrong)
    }

    pub fn cond_abandon(&self) -> f64 {
        self.rate(self.abandoned)
    }

    /// `E[Q | condition]`.
    pub fn mean_q(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.total_queries as f64 / self.trials as f64
        }
    }

    /// Variance of the estimate [`Self::cond_bler`].
    pub fn bler_variance(&self) -> f64 {
        if self.trials == 0 {
            return 0.25;
        }
        let p = self.cond_bler();
        p * (1.0 - p) / self.trials as f64
    }

    pub fn bler_interval(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.errors(), self.trials, z)
    }
}

/// Random information word, encoded; returns the codeword.
fn random_codeword<R: Rng>(code: &Code, rng: &mut R) -> Result<BitVector> {
    code.encode(&random_word(code.k(), rng))
}

/// One hard-detection trial: a random codeword with `b` uniformly placed
/// flips, decoded with GRAND under `budget`.
pub fn hard_trial<S: WeightSearch, R: Rng>(
    code: &Code,
    decoder: &Grand,
    b: usize,
    budget: GuessBudget,
    searcher: &S,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let c = random_codeword(code, rng)?;
    let mut y = c.clone();
    for p in sample_positions(code.n(), b, rng) {
        y.flip(p);
    }
    Ok(TrialOutcome::judge(&c, &decoder.decode_with(&y, budget, searcher)?))
}

/// One soft-detection trial: a random codeword, a uniformly random mask of
/// `l` positions and `b_u` flips placed uniformly inside the mask, decoded
/// with SGRANDAB under `budget`.
pub fn soft_trial<S: WeightSearch, R: Rng>(
    code: &Code,
    decoder: &Grand,
    l: usize,
    b_u: usize,
    budget: GuessBudget,
    searcher: &S,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let n = code.n();
    let c = random_codeword(code, rng)?;
    let mask_positions = sample_positions(n, l, rng);
    let mut y = c.clone();
    for i in sample_positions(l, b_u, rng) {
        y.flip(mask_positions[i]);
    }
    let s = BitVector::from_positions(n, &mask_positions);
    Ok(TrialOutcome::judge(&c, &decoder.decode_masked_with(&y, &s, budget, searcher)?))
}

/// One end-to-end trial through the BPSK-AWGN channel, with SGRANDAB when a
/// mask is given and GRANDAB otherwise.
pub fn channel_trial<S: WeightSearch, R: Rng>(
    code: &Code,
    decoder: &Grand,
    ch: &ChannelModel,
    mask: Option<&MaskSpec>,
    budget: GuessBudget,
    searcher: &S,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let c = random_codeword(code, rng)?;
    let rx = sample_received_with(&c, ch, mask, rng);
    let outcome = match mask {
        Some(_) => decoder.decode_masked_with(&rx.y, &rx.s, budget, searcher)?,
        None => decoder.decode_with(&rx.y, budget, searcher)?,
    };
    Ok(TrialOutcome::judge(&c, &outcome))
}

/// Runs trial `t` of `condition` with the stream derived from `seed`.
pub fn conditional_trial<S: WeightSearch>(
    code: &Code,
    decoder: &Grand,
    condition: Condition,
    budget: GuessBudget,
    searcher: &S,
    seed: u64,
    t: u64,
) -> Result<TrialOutcome> {
    let mut rng = trial_rng(seed, condition.stream_id(), t);
    match condition {
        Condition::Flips { b } => hard_trial(code, decoder, b, budget, searcher, &mut rng),
        Condition::Masked { l, b_u } => soft_trial(code, decoder, l, b_u, budget, searcher, &mut rng),
    }
}

fn check_condition(code: &Code, condition: Condition) -> Result<()> {
    let n = code.n();
    let ok = match condition {
        Condition::Flips { b } => b <= n,
        Condition::Masked { l, b_u } => b_u <= l && l <= n,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!("{condition:?} does not fit n = {n}")))
    }
}

/// Serial conditional run over trials `0..trials`.
pub fn run_conditional(
    code: &Code,
    decoder: &Grand,
    condition: Condition,
    budget: GuessBudget,
    trials: u64,
    seed: u64,
) -> Result<ConditionalStats> {
    check_condition(code, condition)?;
    let outcomes = (0..trials)
        .map(|t| conditional_trial(code, decoder, condition, budget, &Serial, seed, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionalStats::from_outcomes(condition, &outcomes))
}

/// Conditional statistics given exactly `b` flips.
pub fn run_conditional_hard(code: &Code, b: usize, budget: GuessBudget, trials: u64, seed: u64) -> Result<ConditionalStats> {
    run_conditional(code, &Grand::new(code), Condition::Flips { b }, budget, trials, seed)
}

/// Conditional statistics given a mask of `l` bits holding `b_u` flips.
pub fn run_conditional_soft(
    code: &Code,
    l: usize,
    b_u: usize,
    budget: GuessBudget,
    trials: u64,
    seed: u64,
) -> Result<ConditionalStats> {
    run_conditional(code, &Grand::new(code), Condition::Masked { l, b_u }, budget, trials, seed)
}

/// Largest `AB` such that every conditional error rate up to `AB` is at most
/// one third. `cond_blers[b]` is the rate given `b` flips.
pub fn select_ab(cond_blers: &[f64]) -> usize {
    cond_blers.iter().take_while(|&&p| p <= AB_ERROR_LIMIT).count().saturating_sub(1)
}

/// Decoder configuration a curve point was computed for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurveConfig {
    Hard { ab: usize, budget: u64 },
    Soft { merr: f64, tau: f64, q: f64, p_u: f64, budget: u64 },
}

/// One point of a BLER / complexity curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub snr_db: f64,
    pub config: CurveConfig,
    pub bler: f64,
    /// Standard error of `bler` from the conditional estimates.
    pub bler_std_error: f64,
    /// Wrong-codeword part of `bler`.
    pub wrong: f64,
    /// Abandonment part of `bler`, including strata that are never simulated
    /// because they exceed the budget.
    pub abandon: f64,
    /// Mask-error part of `bler` (soft only).
    pub mask_error: f64,
    /// Probability mass of strata that were not simulated and are counted as
    /// errors at full budget.
    pub truncated: f64,
    pub mean_q: f64,
    /// `mean_q` plus a full budget charged to every mask error (soft only).
    pub mean_q_upper: f64,
}

fn index_stats(stats: &[ConditionalStats]) -> BTreeMap<Condition, &ConditionalStats> {
    stats.iter().map(|s| (s.condition, s)).collect()
}

fn lookup<'a>(map: &BTreeMap<Condition, &'a ConditionalStats>, condition: Condition) -> Result<&'a ConditionalStats> {
    map.get(&condition)
        .copied()
        .filter(|s| s.trials > 0)
        .ok_or_else(|| Error::MissingStratum(alloc::format!("{condition:?}")))
}

/// Hard-detection mixture: strata `b = 0..=ab` weighted by `P(B = b)`, with
/// every block of more than `ab` flips counted as an abandonment that spent
/// the whole budget.
pub fn combine_hard(n: usize, stats: &[ConditionalStats], ch: &ChannelModel, ab: usize) -> Result<CurvePoint> {
    if ab > n {
        return Err(Error::InvalidArgument(alloc::format!("AB = {ab} exceeds n = {n}")));
    }
    let map = index_stats(stats);
    let p = ch.flip_prob();
    let budget = count_up_to_weight(n, ab) as f64;
    let (mut wrong, mut abandon, mut var, mut mean_q) = (0.0, 0.0, 0.0, 0.0);
    for b in 0..=ab {
        let s = lookup(&map, Condition::Flips { b })?;
        let w = binomial_pmf(n, p, b);
        wrong += w * s.cond_wrong();
        abandon += w * s.cond_abandon();
        var += w * w * s.bler_variance();
        mean_q += w * s.mean_q();
    }
    let tail = binomial_tail(n, p, ab);
    abandon += tail;
    mean_q += budget * tail;
    Ok(CurvePoint {
        snr_db: ch.snr_db(),
        config: CurveConfig::Hard { ab, budget: count_up_to_weight(n, ab) as u64 },
        bler: (wrong + abandon).min(1.0),
        bler_std_error: libm::sqrt(var),
        wrong,
        abandon,
        mask_error: 0.0,
        truncated: 0.0,
        mean_q,
        mean_q_upper: mean_q,
    })
}

/// A soft stratum with its joint probability `P(L = l, B_u = b_u)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SoftCell {
    pub l: usize,
    pub b_u: usize,
    pub weight: f64,
}

/// The soft strata worth simulating for one mask.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftGrid {
    pub cells: Vec<SoftCell>,
    /// Total probability of the strata left out.
    pub truncated: f64,
}

/// Strata `(l, b_u)` with `L ~ Bin(n, q)` and `B_u | L = l ~ Bin(l, p_u)`
/// whose joint probability reaches `floor`.
pub fn soft_grid(n: usize, mask: &MaskSpec, floor: f64) -> SoftGrid {
    let mut cells = Vec::new();
    let mut truncated = 0.0;
    for l in 0..=n {
        let pl = binomial_pmf(n, mask.q, l);
        if pl == 0.0 || pl < floor {
            truncated += pl;
            continue;
        }
        for b_u in 0..=l {
            let weight = pl * binomial_pmf(l, mask.p_u, b_u);
            if weight == 0.0 || weight < floor {
                truncated += weight;
            } else {
                cells.push(SoftCell { l, b_u, weight });
            }
        }
    }
    SoftGrid { cells, truncated }
}

/// Soft-detection mixture over [`soft_grid`]. Blocks with a flipped bit
/// marked reliable are counted as errors through the achieved mask error
/// rate; truncated strata are counted as errors at full budget.
pub fn combine_soft(
    n: usize,
    stats: &[ConditionalStats],
    mask: &MaskSpec,
    ch: &ChannelModel,
    budget: GuessBudget,
    floor: f64,
) -> Result<CurvePoint> {
    let map = index_stats(stats);
    let grid = soft_grid(n, mask, floor);
    let t = budget
        .limit()
        .ok_or_else(|| Error::InvalidArgument("soft curves need a finite budget".into()))? as f64;
    let (mut wrong, mut abandon, mut var, mut mean_q) = (0.0, 0.0, 0.0, 0.0);
    for cell in &grid.cells {
        let s = lookup(&map, Condition::Masked { l: cell.l, b_u: cell.b_u })?;
        wrong += cell.weight * s.cond_wrong();
        abandon += cell.weight * s.cond_abandon();
        var += cell.weight * cell.weight * s.bler_variance();
        mean_q += cell.weight * s.mean_q();
    }
    mean_q += grid.truncated * t;
    let mask_error = if mask.reliable_flip > 0.0 { mask.achieved_merr(ch) } else { 0.0 };
    Ok(CurvePoint {
        snr_db: ch.snr_db(),
        config: CurveConfig::Soft { merr: mask.merr, tau: mask.tau, q: mask.q, p_u: mask.p_u, budget: t as u64 },
        bler: (wrong + abandon + grid.truncated + mask_error).min(1.0),
        bler_std_error: libm::sqrt(var),
        wrong,
        abandon,
        mask_error,
        truncated: grid.truncated,
        mean_q,
        mean_q_upper: mean_q + mask_error * t,
    })
}

/// Aggregate of an end-to-end channel simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct DirectStats {
    pub trials: u64,
    pub wrong: u64,
    pub abandoned: u64,
    pub total_queries: u128,
}

impl DirectStats {
    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> Self {
        outcomes.iter().fold(DirectStats::default(), |mut acc, o| {
            acc.trials += 1;
            acc.wrong += u64::from(o.wrong);
            acc.abandoned += u64::from(o.abandoned);
            acc.total_queries += u128::from(o.queries);
            acc
        })
    }

    pub fn bler(&self) -> f64 {
        (self.wrong + self.abandoned) as f64 / self.trials.max(1) as f64
    }

    pub fn bler_std_error(&self) -> f64 {
        let p = self.bler();
        libm::sqrt(p * (1.0 - p) / self.trials.max(1) as f64)
    }

    pub fn mean_q(&self) -> f64 {
        self.total_queries as f64 / self.trials.max(1) as f64
    }
}

/// Stream identifier of direct channel trials.
pub const DIRECT_STREAM: u64 = 2 << 48;

/// Serial end-to-end simulation over trials `0..trials`.
pub fn run_direct(
    code: &Code,
    decoder: &Grand,
    ch: &ChannelModel,
    mask: Option<&MaskSpec>,
    budget: GuessBudget,
    trials: u64,
    seed: u64,
) -> Result<DirectStats> {
    let outcomes = (0..trials)
        .map(|t| {
            let mut rng = trial_rng(seed, DIRECT_STREAM, t);
            channel_trial(code, decoder, ch, mask, budget, &Serial, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DirectStats::from_outcomes(&outcomes))
}
