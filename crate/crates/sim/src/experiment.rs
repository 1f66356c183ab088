//! The curve and threshold-selection experiments, run on the current rayon
//! pool.

use std::collections::BTreeSet;

use grand_core::channel::{mask_threshold, ChannelModel};
use grand_core::sim::{combine_hard, combine_soft, select_ab, soft_grid, Condition, ConditionalStats, CurvePoint, AB_ERROR_LIMIT};
use grand_core::{Code, Grand, GuessBudget};

use crate::error::{Result, SimError};
use crate::parallel::run_strata;

/// Conditional strata plus the curve mixed from them.
#[derive(Clone, Debug)]
pub struct Curve {
    pub stats: Vec<ConditionalStats>,
    pub points: Vec<CurvePoint>,
}

/// GRANDAB curve: strata `b = 0..=ab` under the budget of all patterns up to
/// weight `ab`, mixed at each SNR.
pub fn hard_curve(code: &Code, decoder: &Grand, ab: usize, snrs: &[f64], trials: u64, seed: u64) -> Result<Curve> {
    let n = code.n();
    if ab > n {
        return Err(SimError::Config(format!("AB = {ab} exceeds n = {n}")));
    }
    let budget = GuessBudget::up_to_weight(n, ab);
    let strata: Vec<_> = (0..=ab).map(|b| (Condition::Flips { b }, budget, trials)).collect();
    let stats = run_strata(code, decoder, &strata, seed)?;
    let points = snrs
        .iter()
        .map(|&snr| combine_hard(n, &stats, &ChannelModel::from_snr_db(snr, n), ab))
        .collect::<grand_core::Result<Vec<_>>>()?;
    Ok(Curve { stats, points })
}

/// Mask and budget of a soft-detection curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SoftSetup {
    pub merr: f64,
    pub budget: GuessBudget,
    /// Strata less likely than this are not simulated.
    pub floor: f64,
}

/// SGRANDAB curve. The strata of every SNR in the grid are simulated once
/// and shared, since a stratum's statistics do not depend on the SNR.
pub fn soft_curve(code: &Code, decoder: &Grand, setup: &SoftSetup, snrs: &[f64], trials: u64, seed: u64) -> Result<Curve> {
    let n = code.n();
    let SoftSetup { merr, budget, floor } = *setup;
    let mut channels = Vec::with_capacity(snrs.len());
    let mut cells = BTreeSet::new();
    for &snr in snrs {
        let ch = ChannelModel::from_snr_db(snr, n);
        let mask = mask_threshold(&ch, merr)?;
        cells.extend(soft_grid(n, &mask, floor).cells.iter().map(|c| Condition::Masked { l: c.l, b_u: c.b_u }));
        channels.push((ch, mask));
    }
    let strata: Vec<_> = cells.into_iter().map(|c| (c, budget, trials)).collect();
    let stats = run_strata(code, decoder, &strata, seed)?;
    let points = channels
        .iter()
        .map(|(ch, mask)| combine_soft(n, &stats, mask, ch, budget, floor))
        .collect::<grand_core::Result<Vec<_>>>()?;
    Ok(Curve { stats, points })
}

/// Conditional error rates by flip count and the abandonment weight they
/// select.
#[derive(Clone, Debug)]
pub struct AbScan {
    pub stats: Vec<ConditionalStats>,
    pub ab: usize,
}

/// Runs strata `b = 0, 1, ...` until one exceeds the one-third error limit
/// or `max_b` is reached. Stratum `b` uses the budget of all patterns up to
/// weight `b`: a `b`-flip word always decodes within it, so this is plain
/// GRAND for that stratum. `trials(b)` sets the trial count per stratum.
pub fn scan_ab(code: &Code, decoder: &Grand, max_b: usize, trials: impl Fn(usize) -> u64, seed: u64) -> Result<AbScan> {
    let n = code.n();
    let mut stats: Vec<ConditionalStats> = Vec::new();
    for b in 0..=max_b.min(n) {
        let run = run_strata(code, decoder, &[(Condition::Flips { b }, GuessBudget::up_to_weight(n, b), trials(b))], seed)?;
        let s = run.into_iter().next().expect("one stratum requested");
        let stop = s.cond_bler() > AB_ERROR_LIMIT;
        stats.push(s);
        if stop {
            break;
        }
    }
    let ab = select_ab(&stats.iter().map(|s| s.cond_bler()).collect::<Vec<_>>());
    Ok(AbScan { stats, ab })
}

/// Parses `start:step:stop` (inclusive), a comma-separated list, or a single
/// value.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || SimError::Config(format!("bad SNR grid {text:?}; expected start:step:stop, a list or a value"));
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
    let parts: Vec<&str> = text.split(':').collect();
    match parts[..] {
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if step <= 0.0 || stop < start {
                return Err(bad());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        [single] => single.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}
