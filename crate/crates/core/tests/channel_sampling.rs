//! Sampling checks for the BPSK-AWGN channel against its closed forms.

use grand_core::channel::{
    binomial_pmf, binomial_tail, mask_threshold, sample_flip_positions, sample_positions, sample_received_with, trial_rng,
    ChannelModel,
};
use grand_core::BitVector;

fn within_three_se(count: u64, trials: u64, p: f64) -> bool {
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    (count as f64 / trials as f64 - p).abs() <= 3.0 * se
}

#[test]
fn flip_rate_matches_closed_form() {
    let ch = ChannelModel::from_snr_db(4.0, 128);
    let c = BitVector::zeros(128);
    let mut rng = trial_rng(20, 0, 0);
    let mut flips = 0u64;
    let blocks = 8000u64;
    for _ in 0..blocks {
        flips += sample_received_with(&c, &ch, None, &mut rng).flips.weight() as u64;
    }
    assert!(within_three_se(flips, blocks * 128, ch.flip_prob()));
}

#[test]
fn mask_rates_match_q_and_p_u() {
    let ch = ChannelModel::from_snr_db(3.0, 128);
    let mask = mask_threshold(&ch, 0.2).unwrap();
    let c = BitVector::zeros(128);
    let mut rng = trial_rng(21, 0, 0);
    let (mut bits, mut unreliable, mut unreliable_flips) = (0u64, 0u64, 0u64);
    for _ in 0..8000 {
        let rx = sample_received_with(&c, &ch, Some(&mask), &mut rng);
        bits += 128;
        unreliable += rx.s.weight() as u64;
        unreliable_flips += rx.s.and(&rx.flips).unwrap().weight() as u64;
    }
    assert!(within_three_se(unreliable, bits, mask.q));
    assert!(within_three_se(unreliable_flips, unreliable, mask.p_u));
}

#[test]
fn tail_of_flip_count_matches_sampling() {
    let ch = ChannelModel::from_snr_db(7.0, 128);
    let c = BitVector::zeros(128);
    let mut rng = trial_rng(22, 0, 0);
    let trials = 40_000u64;
    let over = (0..trials).filter(|_| sample_received_with(&c, &ch, None, &mut rng).flips.weight() > 3).count() as u64;
    assert!(within_three_se(over, trials, binomial_tail(128, ch.flip_prob(), 3)));
}

#[test]
fn binomial_pmf_is_normalized() {
    for &(n, p) in &[(128usize, 0.0024), (16, 0.5), (1, 0.3), (200, 0.9)] {
        let total: f64 = (0..=n).map(|b| binomial_pmf(n, p, b)).sum();
        assert!((total - 1.0).abs() < 1e-12, "n={n} p={p}");
    }
}

#[test]
fn flip_positions_are_uniform() {
    // Chi-square over the 28 weight-2 patterns of length 8.
    let draws = 100_000u64;
    let mut counts = std::collections::HashMap::new();
    let mut rng = trial_rng(23, 0, 0);
    for _ in 0..draws {
        *counts.entry(sample_positions(8, 2, &mut rng)).or_insert(0u64) += 1;
    }
    assert_eq!(counts.len(), 28);
    let expected = draws as f64 / 28.0;
    let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 27 degrees of freedom; 0.999 quantile is about 55.5.
    assert!(chi2 < 55.5, "chi2 = {chi2}");
    assert_eq!(sample_flip_positions(8, 0, 1), BitVector::zeros(8));
    assert_eq!(sample_flip_positions(8, 8, 1), BitVector::ones(8));
    assert_eq!(sample_flip_positions(50, 7, 99), sample_flip_positions(50, 7, 99));
}
