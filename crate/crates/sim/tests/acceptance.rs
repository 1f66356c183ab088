//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use grand_core::channel::{mask_threshold, random_word, sample_positions, sample_received_with, trial_rng, ChannelModel};
use grand_core::grand::{grand_decode, sgrandab_budget, sgrandab_decode};
use grand_core::sim::{Condition, DEFAULT_STRATUM_FLOOR};
use grand_core::{BitMatrix, BitVector, Code, CodeSpec, Grand, GuessBudget};
use grand_sim::experiment::{hard_curve, scan_ab, soft_curve, SoftSetup};
use grand_sim::parallel::{run_conditional_par, run_direct_par};

const SEED: u64 = 0x5EED_2026;

type Check = fn(&mut Context) -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }
}

struct Context {
    ul: Code,
    dl: Code,
    ul_decoder: Grand,
    dl_decoder: Grand,
    /// Hard-detection mean query count at 9 dB, filled in by criterion 5.
    hard_mean_q_9db: Option<f64>,
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Exhaustive decoder: the nearest codeword, ties going to the error pattern
/// that comes first in colex order (compare the largest position first).
fn brute_force_nearest(codebook: &[BitVector], y: &BitVector) -> BitVector {
    codebook
        .iter()
        .map(|c| {
            let mut e: Vec<usize> = c.xor(y).unwrap().iter_ones().collect();
            e.reverse();
            (e.len(), e, c)
        })
        .min_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)))
        .map(|(_, _, c)| c.clone())
        .unwrap()
}

fn ml_oracle(_: &mut Context) -> Verdict {
    let mut rng = trial_rng(SEED, 1, 0);
    let mut checked = 0;
    let mut sizes = [(16, 8), (16, 5), (14, 7), (12, 8), (9, 4)].into_iter().peekable();
    while let Some(&(n, k)) = sizes.peek() {
        let g = BitMatrix::from_rows(n, (0..k).map(|_| random_word(n, &mut rng)).collect()).unwrap();
        let Ok(code) = Code::from_generator(g) else { continue };
        sizes.next();
        let codebook: Vec<BitVector> = (0u32..1 << k)
            .map(|m| code.encode(&BitVector::from_fn(k, |i| (m >> i) & 1 == 1)).unwrap())
            .collect();
        for _ in 0..1000 {
            let y = random_word(n, &mut rng);
            let got = grand_decode(&y, &code, GuessBudget::UNBOUNDED).unwrap().codeword;
            let want = brute_force_nearest(&codebook, &y);
            if got.as_ref() != Some(&want) {
                return Verdict::new(false, format!("[{n},{k}] code disagrees on y = {y}"));
            }
            checked += 1;
        }
    }
    Verdict::new(true, format!("{checked} words over 5 codes match the exhaustive decoder"))
}

fn construction(ctx: &mut Context) -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for code in [&ctx.ul, &ctx.dl] {
        let (g, h) = (code.generator(), code.parity_check());
        let dual = h.mat_mul(&g.transpose()).unwrap().is_zero();
        let ok = dual && g.rank() == code.k() && h.rank() == code.n() - code.k();
        pass &= ok;
        parts.push(format!("[{},{}] HG^T=0 {dual}, rank G {}, rank H {}", code.n(), code.k(), g.rank(), h.rank()));
    }
    Verdict::new(pass, parts.join("; "))
}

fn single_flip(ctx: &mut Context) -> Verdict {
    let s = run_conditional_par(&ctx.ul, &ctx.ul_decoder, Condition::Flips { b: 1 }, GuessBudget::up_to_weight(128, 3), 10_000, SEED)
        .unwrap();
    Verdict::new(s.errors() == 0, format!("cond_bler = {} over {} trials", s.cond_bler(), s.trials))
}

fn four_flips(ctx: &mut Context) -> Verdict {
    let s = run_conditional_par(&ctx.ul, &ctx.ul_decoder, Condition::Flips { b: 4 }, GuessBudget::UNBOUNDED, 10_000, SEED).unwrap();
    let p = s.cond_bler();
    Verdict::new((0.50..=0.80).contains(&p), format!("cond_bler = {p:.4} over {} trials", s.trials))
}

fn hard_operating_point(ctx: &mut Context) -> Verdict {
    let curve = hard_curve(&ctx.ul, &ctx.ul_decoder, 3, &[9.0], 10_000, SEED).unwrap();
    let pt = curve.points[0];
    ctx.hard_mean_q_9db = Some(pt.mean_q);
    Verdict::new(
        pt.bler <= 3e-3 && pt.mean_q <= 3e3,
        format!("BLER = {:.3e} (<= 3e-3), E[Q] = {:.1} (<= 3e3)", pt.bler, pt.mean_q),
    )
}

fn ab_selection(ctx: &mut Context) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, code, decoder, expected, trials) in [
        ("[128,105]", &ctx.ul, &ctx.ul_decoder, 3, (|_| 10_000) as fn(usize) -> u64),
        ("[128,99]", &ctx.dl, &ctx.dl_decoder, 4, |b| if b >= 5 { 2_000 } else { 10_000 }),
    ] {
        let scan = scan_ab(code, decoder, 8, trials, SEED).unwrap();
        let rates: Vec<f64> = scan.stats.iter().map(|s| s.cond_bler()).collect();
        // Largest b whose rate and every smaller b's rate are within 1/3.
        let mut rule = None;
        for (b, &p) in rates.iter().enumerate() {
            if 3.0 * p > 1.0 {
                break;
            }
            rule = Some(b);
        }
        let consistent = rule == Some(scan.ab) && rates.len() > scan.ab + 1;
        pass &= consistent;
        let shown: Vec<String> = rates.iter().map(|p| format!("{p:.4}")).collect();
        parts.push(format!(
            "{name} AB = {} (expected {expected}{}) from [{}]",
            scan.ab,
            if scan.ab == expected { ", matches" } else { ", differs" },
            shown.join(", ")
        ));
    }
    Verdict::new(pass, parts.join("; "))
}

fn worst_case_queries(ctx: &mut Context) -> Verdict {
    let t: u64 = (0..=3).map(|b| binomial(128, b)).sum();
    let outcomes: Vec<(bool, u64)> = (0..3000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(SEED, 7, i);
            let c = ctx.ul.encode(&random_word(105, &mut rng)).unwrap();
            let mut y = c;
            for p in sample_positions(128, 2 + (i % 5) as usize, &mut rng) {
                y.flip(p);
            }
            let out = ctx.ul_decoder.decode_ab(&y, 3).unwrap();
            (out.success(), out.queries)
        })
        .collect();
    let abandoned: Vec<u64> = outcomes.iter().filter(|o| !o.0).map(|o| o.1).collect();
    let max_q = outcomes.iter().map(|o| o.1).max().unwrap();
    let exact = abandoned.iter().all(|&q| q == t);
    Verdict::new(
        t == 349_633 && exact && max_q <= t && !abandoned.is_empty(),
        format!("T = {t}; {} abandonments all at Q = T: {exact}; max Q = {max_q}", abandoned.len()),
    )
}

fn sgrandab_reduction(ctx: &mut Context) -> Verdict {
    let budget = sgrandab_budget(128, 3);
    let ones = BitVector::ones(128);
    let mismatches = (0..1000u64)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = trial_rng(SEED, 8, i);
            let c = ctx.ul.encode(&random_word(105, &mut rng)).unwrap();
            let ch = ChannelModel::from_snr_db(4.0 + (i % 5) as f64, 128);
            let y = sample_received_with(&c, &ch, None, &mut rng).y;
            grand_decode(&y, &ctx.ul, budget).unwrap() != sgrandab_decode(&y, &ones, &ctx.ul, budget).unwrap()
        })
        .count();
    Verdict::new(mismatches == 0, format!("{mismatches} of 1000 outcomes differ"))
}

fn soft_operating_point(ctx: &mut Context) -> Verdict {
    let budget = sgrandab_budget(128, 3);
    let setup = SoftSetup { merr: 1e-4, budget, floor: DEFAULT_STRATUM_FLOOR };
    let curve = soft_curve(&ctx.ul, &ctx.ul_decoder, &setup, &[9.0], 2_000, SEED).unwrap();
    let pt = curve.points[0];
    let hard = ctx.hard_mean_q_9db.expect("criterion 5 runs first");
    let ratio = hard / pt.mean_q;
    Verdict::new(
        pt.bler <= 3e-4 && pt.mean_q <= 36.0 && ratio >= 3.0,
        format!(
            "BLER = {:.3e} (<= 3e-4), E[Q] = {:.2} (<= 36), hard/soft E[Q] = {:.1} (>= 3) over {} strata",
            pt.bler,
            pt.mean_q,
            ratio,
            curve.stats.len()
        ),
    )
}

fn combiner_vs_direct(ctx: &mut Context) -> Verdict {
    let curve = hard_curve(&ctx.ul, &ctx.ul_decoder, 3, &[7.0], 10_000, SEED).unwrap();
    let pt = curve.points[0];
    let ch = ChannelModel::from_snr_db(7.0, 128);
    let direct = run_direct_par(&ctx.ul, &ctx.ul_decoder, &ch, None, GuessBudget::up_to_weight(128, 3), 100_000, SEED).unwrap();
    let se = (pt.bler_std_error.powi(2) + direct.bler_std_error().powi(2)).sqrt();
    let gap = (pt.bler - direct.bler()).abs();
    Verdict::new(
        gap <= 2.0 * se,
        format!("combiner {:.5}, direct {:.5}, |diff| = {:.2} combined SE", pt.bler, direct.bler(), gap / se),
    )
}

fn mask_threshold_check(_: &mut Context) -> Verdict {
    let (n, merr) = (128usize, 1e-4);
    let ch = ChannelModel::from_snr_db(9.0, n);
    let sigma = ch.sigma();
    let mask = mask_threshold(&ch, merr).unwrap();
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    let block_merr = |tau: f64| -(n as f64 * (-std_normal.sf((1.0 + tau) / sigma)).ln_1p()).exp_m1();
    let residual = (block_merr(mask.tau) - merr).abs() / merr;
    let (mut lo, mut hi) = (0.0f64, 10.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if block_merr(mid) > merr {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let tau_rel = (mask.tau - root).abs() / root;

    let blocks = 1_000_000u64;
    let zeros = BitVector::zeros(n);
    let hits = (0..blocks)
        .into_par_iter()
        .filter(|&i| {
            let rx = sample_received_with(&zeros, &ch, Some(&mask), &mut trial_rng(SEED, 11, i));
            let missed = rx.flips.iter_ones().any(|j| !rx.s.get(j));
            missed
        })
        .count() as f64;
    let freq = hits / blocks as f64;
    let se = (merr * (1.0 - merr) / blocks as f64).sqrt();
    Verdict::new(
        residual <= 1e-9 && tau_rel <= 1e-9 && (freq - merr).abs() <= 3.0 * se,
        format!(
            "tau = {:.10}, bisection {:.10} (rel {tau_rel:.1e}), merr residual {residual:.1e}, sampled {freq:.2e} vs {merr:.0e} +- {:.1e}",
            mask.tau,
            root,
            3.0 * se
        ),
    )
}

fn main() {
    let ul = Code::build(&CodeSpec::uplink_128_105()).unwrap();
    let dl = Code::build(&CodeSpec::downlink_128_99()).unwrap();
    let mut ctx = Context { ul_decoder: Grand::new(&ul), dl_decoder: Grand::new(&dl), ul, dl, hard_mean_q_9db: None };
    let criteria: [(&str, Check); 11] = [
        ("ML-oracle equivalence", ml_oracle),
        ("construction sanity", construction),
        ("single-flip conditional BLER", single_flip),
        ("four-flip conditional BLER", four_flips),
        ("hard-detection operating point", hard_operating_point),
        ("AB selection", ab_selection),
        ("worst-case query bound", worst_case_queries),
        ("SGRANDAB reduction", sgrandab_reduction),
        ("soft-detection operating point", soft_operating_point),
        ("combiner vs direct", combiner_vs_direct),
        ("mask threshold", mask_threshold_check),
    ];
    let mut failed = 0;
    let mut stdout = std::io::stdout();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check(&mut ctx);
        failed += usize::from(!v.pass);
        let status = if v.pass { "PASS" } else { "FAIL" };
        writeln!(stdout, "criterion {:>2} {status} {name}: {} [{:.1}s]", i + 1, v.detail, start.elapsed().as_secs_f64()).unwrap();
        stdout.flush().unwrap();
    }
    if failed > 0 {
        writeln!(stdout, "{failed} criteria failed").unwrap();
        std::process::exit(1);
    }
}
