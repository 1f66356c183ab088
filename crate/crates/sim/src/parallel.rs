//! Rayon-backed execution: weight classes split into colex ranges for a
//! single decode, and trials spread across a pool for simulations.
//!
//! Results never depend on the number of workers. A range search keeps the
//! lowest-rank hit, and trial outcomes are collected in trial order before
//! they are aggregated.

use rayon::prelude::*;

use grand_core::grand::{Hit, Space, WeightSearch};
use grand_core::pattern::colex_ranges;
use grand_core::sim::{channel_trial, conditional_trial, Condition, ConditionalStats, DirectStats, DIRECT_STREAM};
use grand_core::channel::{trial_rng, ChannelModel, MaskSpec};
use grand_core::grand::Serial;
use grand_core::{Code, Grand, GuessBudget};

use crate::error::{Result, SimError};

/// Environment variable holding the default worker count.
pub const JOBS_ENV: &str = "GRAND_SIM_JOBS";

/// Worker count from [`JOBS_ENV`], else the available parallelism.
pub fn default_jobs() -> usize {
    std::env::var(JOBS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&j: &usize| j > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn build_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SimError::Pool(e.to_string()))
}

/// Searches each weight class as `parts` colex ranges in parallel.
#[derive(Clone, Copy, Debug)]
pub struct RangeSplit {
    pub parts: usize,
}

impl WeightSearch for RangeSplit {
    fn find<const W: usize>(&self, space: &Space<W>, target: &[u64; W], weight: usize, rank_limit: u128) -> Option<Hit> {
        // Small classes finish faster than the fork.
        if self.parts <= 1 || weight < 3 {
            return space.find(target, weight, 0..space.len(), rank_limit);
        }
        colex_ranges(space.len(), weight, self.parts)
            .into_par_iter()
            .filter_map(|top| space.find(target, weight, top, rank_limit))
            .min_by_key(|hit| hit.rank)
    }
}

/// Conditional run with trials spread over the current rayon pool.
pub fn run_conditional_par(
    code: &Code,
    decoder: &Grand,
    condition: Condition,
    budget: GuessBudget,
    trials: u64,
    seed: u64,
) -> Result<ConditionalStats> {
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| conditional_trial(code, decoder, condition, budget, &Serial, seed, t))
        .collect::<grand_core::Result<Vec<_>>>()?;
    Ok(ConditionalStats::from_outcomes(condition, &outcomes))
}

/// Several strata, each with its own trial count and budget, in order.
pub fn run_strata(
    code: &Code,
    decoder: &Grand,
    strata: &[(Condition, GuessBudget, u64)],
    seed: u64,
) -> Result<Vec<ConditionalStats>> {
    strata
        .par_iter()
        .map(|&(condition, budget, trials)| run_conditional_par(code, decoder, condition, budget, trials, seed))
        .collect()
}

/// End-to-end channel simulation with trials spread over the pool.
pub fn run_direct_par(
    code: &Code,
    decoder: &Grand,
    ch: &ChannelModel,
    mask: Option<&MaskSpec>,
    budget: GuessBudget,
    trials: u64,
    seed: u64,
) -> Result<DirectStats> {
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, DIRECT_STREAM, t);
            channel_trial(code, decoder, ch, mask, budget, &Serial, &mut rng)
        })
        .collect::<grand_core::Result<Vec<_>>>()?;
    Ok(DirectStats::from_outcomes(&outcomes))
}
