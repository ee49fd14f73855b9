use hybridfb::channel::complex_gaussian;
use hybridfb::numerics::{inner, norm, normalized};
use hybridfb::precoder::{generalized_principal_vector, generalized_rayleigh, instantaneous_slnr, statistical_slnr};
use hybridfb::rate::sinr_single_cell;
use hybridfb::scenario::drop_single_cell;
use hybridfb::{
    seed, slnr_precoders_hybrid, slnr_precoders_multicell, ArrayConfig, ComplexMatrix, FeedbackState, StatisticalCsi,
    C64,
};
use proptest::prelude::*;
use rand::Rng;

fn unit(m: usize, rng: &mut impl Rng) -> Vec<C64> {
    normalized(&(0..m).map(|_| complex_gaussian(rng)).collect::<Vec<_>>()).unwrap()
}

fn covariances(m: usize, k: usize, s: u64) -> Vec<StatisticalCsi> {
    let drop = drop_single_cell(k, ArrayConfig::half_wavelength(m).unwrap(), 0.2, 20, s).unwrap();
    (0..k).map(|u| drop.model.link(0, 0, u).statistical().unwrap().clone()).collect()
}

/// Numerator and leakage-plus-noise matrices of every user, class-I first.
fn problems(state: &FeedbackState, leakage: Option<&ComplexMatrix>) -> Vec<(ComplexMatrix, ComplexMatrix)> {
    let m = state.quantized.first().map(Vec::len).unwrap_or_else(|| state.statistical[0].antennas());
    let den = |skip_i: Option<usize>, skip_s: Option<usize>| {
        let mut d = ComplexMatrix::identity(m).scaled(1.0 / state.p_d);
        for (_, h) in state.quantized.iter().enumerate().filter(|(j, _)| Some(*j) != skip_i) {
            d.add_outer(h, 1.0);
        }
        for (_, s) in state.statistical.iter().enumerate().filter(|(j, _)| Some(*j) != skip_s) {
            d.add_scaled(&s.spatial, 1.0);
        }
        if let Some(l) = leakage {
            d.add_scaled(l, 1.0);
        }
        d
    };
    let mut out = Vec::new();
    for (i, h) in state.quantized.iter().enumerate() {
        out.push((ComplexMatrix::outer(h), den(Some(i), None)));
    }
    for (n, s) in state.statistical.iter().enumerate() {
        out.push((s.spatial.clone(), den(None, Some(n))));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hybrid_precoders_maximize_their_quotients(
        k_i in 0usize..=3,
        k_s in 0usize..=3,
        db in -5.0f64..25.0,
        s in any::<u64>(),
    ) {
        prop_assume!(k_i + k_s > 0);
        let m = 8;
        let mut rng = seed::rng(s);
        let state = FeedbackState {
            quantized: (0..k_i).map(|_| unit(m, &mut rng)).collect(),
            statistical: if k_s > 0 { covariances(m, k_s, s) } else { vec![] },
            p_d: 10f64.powf(db / 10.0),
        };
        let bank = slnr_precoders_hybrid(&state).unwrap();
        let ws: Vec<&Vec<C64>> = bank.all().collect();
        for ((num, den), w) in problems(&state, None).iter().zip(&ws) {
            prop_assert!((norm(w) - 1.0).abs() < 1e-10);
            let ours = generalized_rayleigh(w, num, den);
            let oracle = generalized_rayleigh(&generalized_principal_vector(num, den).unwrap(), num, den);
            prop_assert!(ours >= oracle * (1.0 - 1e-9), "{ours} < {oracle}");
            for _ in 0..500 {
                prop_assert!(ours >= generalized_rayleigh(&unit(m, &mut rng), num, den) * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn generalized_eigen_equation_holds(k_s in 1usize..=3, s in any::<u64>()) {
        let stats = covariances(8, k_s + 1, s);
        let state = FeedbackState { quantized: vec![], statistical: stats, p_d: 10.0 };
        for (num, den) in problems(&state, None) {
            let u = generalized_principal_vector(&num, &den).unwrap();
            let lambda = generalized_rayleigh(&u, &num, &den);
            let nu = num.matvec(&u).unwrap();
            let du = den.matvec(&u).unwrap();
            let diff: Vec<C64> = nu.iter().zip(&du).map(|(a, b)| a - b * lambda).collect();
            prop_assert!(norm(&diff) < 1e-6 * num.frobenius_norm());
        }
    }

    /// Two cells: each cell's precoders are optimal against a denominator
    /// that includes the other cell's users.
    #[test]
    fn multicell_precoders_include_leakage(s in any::<u64>(), db in 0.0f64..20.0) {
        let m = 8;
        let mut rng = seed::rng(s);
        let stats = covariances(m, 4, s);
        let states = vec![
            FeedbackState { quantized: vec![unit(m, &mut rng)], statistical: vec![stats[0].clone()], p_d: 10f64.powf(db / 10.0) },
            FeedbackState { quantized: vec![unit(m, &mut rng)], statistical: vec![stats[1].clone()], p_d: 10f64.powf(db / 10.0) },
        ];
        let cross = vec![
            vec![stats[2].spatial.scaled(0.3), stats[3].spatial.scaled(0.1)],
            vec![stats[3].spatial.scaled(0.5)],
        ];
        let banks = slnr_precoders_multicell(&states, &cross).unwrap();
        for (l, bank) in banks.iter().enumerate() {
            let mut leak = cross[l][0].clone();
            for c in &cross[l][1..] {
                leak.add_scaled(c, 1.0);
            }
            for ((num, den), w) in problems(&states[l], Some(&leak)).iter().zip(bank.all()) {
                let ours = generalized_rayleigh(w, num, den);
                let oracle = generalized_rayleigh(&generalized_principal_vector(num, den).unwrap(), num, den);
                prop_assert!(ours >= oracle * (1.0 - 1e-9));
            }
        }
    }
}

#[test]
fn reductions_match_classical_precoders() {
    let mut rng = seed::rng(4);
    for s in 0..10 {
        let q: Vec<Vec<C64>> = (0..3).map(|_| unit(16, &mut rng)).collect();
        let stats = covariances(16, 3, s);
        let inst = FeedbackState { quantized: q.clone(), statistical: vec![], p_d: 3.0 };
        let stat = FeedbackState { quantized: vec![], statistical: stats.clone(), p_d: 3.0 };
        assert_eq!(slnr_precoders_hybrid(&inst).unwrap().class_i, instantaneous_slnr(&q, 3.0).unwrap());
        assert_eq!(slnr_precoders_hybrid(&stat).unwrap().class_s, statistical_slnr(&stats, 3.0).unwrap());
    }
}

#[test]
fn sinr_matches_scalar_formula() {
    let mut rng = seed::rng(12);
    let m = 6;
    let h: Vec<C64> = (0..m).map(|_| complex_gaussian(&mut rng)).collect();
    let ws: Vec<Vec<C64>> = (0..3).map(|_| unit(m, &mut rng)).collect();
    let p_d = 2.5;
    for target in 0..3 {
        let gains: Vec<f64> = ws.iter().map(|w| inner(&h, w).norm_sqr()).collect();
        let interference: f64 = gains.iter().enumerate().filter(|(i, _)| *i != target).map(|(_, g)| g).sum();
        let expected = gains[target] / (interference + 1.0 / p_d);
        assert!((sinr_single_cell(&h, &ws, target, p_d) - expected).abs() < 1e-12 * expected.max(1.0));
    }
}
