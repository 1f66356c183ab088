use grand_core::ca_polar::{Interleaver, ts38212_interleaver};
use grand_core::channel::{random_word, sample_positions, trial_rng};
use grand_core::grand::{grandab_decode, sgrandab_decode};
use grand_core::{BitMatrix, BitVector, Code, CodeSpec, Grand, GuessBudget};

fn shipped() -> Vec<(CodeSpec, Code)> {
    [CodeSpec::uplink_128_105(), CodeSpec::downlink_128_99()]
        .into_iter()
        .map(|s| {
            let c = Code::build(&s).unwrap();
            (s, c)
        })
        .collect()
}

#[test]
fn encoded_words_are_codewords() {
    for (spec, code) in shipped() {
        assert_eq!(code.k(), spec.k);
        for t in 0..1000 {
            let mut rng = trial_rng(10, 0, t);
            let x = random_word(code.k(), &mut rng);
            let c = code.encode(&x).unwrap();
            assert!(code.is_codeword(&c).unwrap());
            assert!(code.syndrome(&c).unwrap().is_zero());
        }
        assert!(code.is_codeword(&BitVector::zeros(128)).unwrap());
    }
}

#[test]
fn single_flips_are_detected() {
    // Equivalent to every column of H being nonzero.
    for (_, code) in shipped() {
        for j in 0..128 {
            assert!(!code.parity_check().column(j).is_zero(), "column {j}");
        }
    }
}

#[test]
fn single_flip_decodes_within_n_plus_one_queries() {
    for (_, code) in shipped() {
        let decoder = Grand::new(&code);
        let mut rng = trial_rng(11, 0, 0);
        let c = code.encode(&random_word(code.k(), &mut rng)).unwrap();
        for i in 0..128 {
            let mut y = c.clone();
            y.flip(i);
            let out = decoder.decode(&y, GuessBudget::UNBOUNDED).unwrap();
            assert_eq!(out.codeword.as_ref(), Some(&c));
            assert!(out.queries <= 129);
        }
    }
}

#[test]
fn free_functions_agree_with_decoder() {
    let (_, code) = shipped().remove(0);
    let decoder = Grand::new(&code);
    let mut rng = trial_rng(12, 0, 0);
    let c = code.encode(&random_word(code.k(), &mut rng)).unwrap();
    let mut y = c.clone();
    for p in sample_positions(128, 2, &mut rng) {
        y.flip(p);
    }
    assert_eq!(grandab_decode(&y, &code, 2).unwrap(), decoder.decode_ab(&y, 2).unwrap());
    let none = BitVector::zeros(128);
    let out = sgrandab_decode(&y, &none, &code, GuessBudget::UNBOUNDED).unwrap();
    assert_eq!((out.success(), out.queries), (false, 1));
    assert_eq!(sgrandab_decode(&c, &none, &code, GuessBudget::UNBOUNDED).unwrap().queries, 1);
}

#[test]
fn masked_single_flip_costs_at_most_one_plus_l() {
    let (_, code) = shipped().remove(0);
    let decoder = Grand::new(&code);
    for t in 0..200 {
        let mut rng = trial_rng(13, 0, t);
        let c = code.encode(&random_word(code.k(), &mut rng)).unwrap();
        let mask = sample_positions(128, 16, &mut rng);
        let mut y = c.clone();
        y.flip(mask[t as usize % 16]);
        let out = decoder.decode_masked(&y, &BitVector::from_positions(128, &mask), GuessBudget::UNBOUNDED).unwrap();
        assert_eq!(out.codeword.as_ref(), Some(&c));
        assert!(out.queries <= 17);
    }
}

#[test]
fn downlink_interleaver_round_trips() {
    let perm = Interleaver::Ts38212.permutation(123).unwrap();
    assert_eq!(perm, ts38212_interleaver(123).unwrap());
    let mut inverse = vec![0; 123];
    for (i, &p) in perm.iter().enumerate() {
        inverse[p] = i;
    }
    let m = BitMatrix::gather_permutation(&perm);
    let m_inv = BitMatrix::gather_permutation(&inverse);
    let mut rng = trial_rng(14, 0, 0);
    for _ in 0..50 {
        let v = random_word(123, &mut rng);
        assert_eq!(m_inv.vec_mat_mul(&m.vec_mat_mul(&v).unwrap()).unwrap(), v);
    }
}

#[test]
fn codebooks_have_two_to_the_k_words() {
    // Rank of G decides the codebook size for the large codes.
    for (_, code) in shipped() {
        assert_eq!(code.generator().rank(), code.k());
        assert_eq!(code.parity_check().rank(), 128 - code.k());
    }
}
