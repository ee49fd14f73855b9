use hybridfb::classifier::conventional_bits;
use hybridfb::codebook::CodebookKind;
use hybridfb::numerics::normalized;
use hybridfb::rate::{draw_trial, sinr_single_cell, GridBounds};
use hybridfb::scenario::{
    conventional_baseline, drop_multicell, drop_single_cell, evaluate_split, CellTopology, LargeScaleModel,
};
use hybridfb::{
    monte_carlo, multicell_bound, slnr_precoders_hybrid, sum_rate_lower_bound, ArrayConfig, BoundProblem, CellClasses,
    Codebook, CodebookChoice, CsiMode, EvalSettings, FeedbackState, NetworkBeams,
};
use proptest::prelude::*;

/// Straight-line evaluation of the covariance-only bound for one network,
/// written independently of the library: `links[bs][cell][user][beam]`.
fn oracle_bound(links: &[Vec<Vec<Vec<f64>>>], classes: &[CellClasses], p_d: f64, bits: u32) -> f64 {
    let l_cells = links.len();
    let m = links[0][0][0].len();
    let x = 1u64 << bits;
    let predict = |beams: &[f64]| -> usize {
        let mut best = (f64::NEG_INFINITY, 0);
        for u in 1..=x {
            let pos = (1.0 + u as f64 * (m as f64 - 1.0) / x as f64).round().clamp(1.0, m as f64) as usize;
            if beams[pos - 1] > best.0 {
                best = (beams[pos - 1], pos);
            }
        }
        best.1
    };
    let mut beam: Vec<Vec<usize>> = links.iter().enumerate().map(|(l, bs)| vec![0; bs[l].len()]).collect();
    for l in 0..l_cells {
        for &i in &classes[l].class_i {
            beam[l][i] = predict(&links[l][l][i]);
        }
        for &n in &classes[l].class_s {
            let mut best = (f64::NEG_INFINITY, 0);
            for t in 0..m {
                let mut den = 1.0 / p_d;
                for &q in classes[l].class_s.iter().filter(|&&q| q != n) {
                    den += links[l][l][q][t];
                }
                den += classes[l].class_i.iter().filter(|&&i| beam[l][i] == t + 1).count() as f64;
                for (_, cell) in links[l].iter().enumerate().filter(|(j, _)| *j != l) {
                    den += cell.iter().map(|b| b[t]).sum::<f64>();
                }
                let ratio = links[l][l][n][t] / den;
                if ratio > best.0 {
                    best = (ratio, t + 1);
                }
            }
            beam[l][n] = best.1;
        }
    }
    let mut total = 0.0;
    for j in 0..l_cells {
        for k in 0..links[j][j].len() {
            let own = &links[j][j][k];
            let mut interference = 0.0;
            for (o, &b) in beam[j].iter().enumerate() {
                if o != k {
                    interference += own[b - 1];
                }
            }
            for l in (0..l_cells).filter(|&l| l != j) {
                for &b in &beam[l] {
                    interference += links[l][j][k][b - 1];
                }
            }
            total += (1.0 + own[beam[j][k] - 1] / (interference + 1.0 / p_d)).log2();
        }
    }
    total
}

fn split_from_mask(k: usize, mask: u32) -> CellClasses {
    CellClasses {
        class_i: (0..k).filter(|u| mask & (1 << u) == 0).collect(),
        class_s: (0..k).filter(|u| mask & (1 << u) != 0).collect(),
    }
}

fn settings(p_d: f64, trials: usize) -> EvalSettings {
    EvalSettings {
        p_d,
        trials,
        codebook: CodebookChoice::Dft,
        max_codebook_bits: 10,
        grid: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_cell_bound_matches_oracle(
        k in 1usize..=5,
        mask in any::<u32>(),
        bits in 0u32..=8,
        db in -10.0f64..30.0,
        s in any::<u64>(),
    ) {
        let drop = drop_single_cell(k, ArrayConfig::half_wavelength(16).unwrap(), 0.17, 20, s).unwrap();
        let beams: Vec<Vec<f64>> = (0..k).map(|u| drop.model.link(0, 0, u).covariance.beam_diag.clone()).collect();
        let classes = split_from_mask(k, mask);
        let p_d = 10f64.powf(db / 10.0);
        let ours = sum_rate_lower_bound(&beams, &classes, p_d, bits).unwrap().bound;
        let oracle = oracle_bound(&[vec![beams]], &[classes], p_d, bits);
        prop_assert!((ours - oracle).abs() <= 1e-9 * oracle.max(1.0), "{ours} vs {oracle}");
        prop_assert!(ours.is_finite() && ours >= 0.0);
    }

    #[test]
    fn network_bound_matches_oracle(masks in any::<[u32; 3]>(), bits in 0u32..=6, s in any::<u64>(), cells in 2usize..=3) {
        let ls = LargeScaleModel::new(8.0, 2.2, 100.0).unwrap();
        let mut topo = CellTopology::three_cell();
        topo.bs_positions.truncate(cells);
        topo.boresights.truncate(cells);
        let drop = drop_multicell(&topo, &ls, 2, ArrayConfig::half_wavelength(16).unwrap(), 0.17, 20, s).unwrap();
        let beams = drop.beams().unwrap();
        let links: Vec<Vec<Vec<Vec<f64>>>> = (0..cells)
            .map(|l| (0..cells).map(|j| (0..2).map(|k| beams.link(l, j, k).to_vec()).collect()).collect())
            .collect();
        let classes: Vec<CellClasses> = masks[..cells].iter().map(|&m| split_from_mask(2, m)).collect();
        let ours = multicell_bound(&beams, &classes, 10.0, bits).unwrap().bound;
        let oracle = oracle_bound(&links, &classes, 10.0, bits);
        prop_assert!((ours - oracle).abs() <= 1e-9 * oracle.max(1.0), "{ours} vs {oracle}");
    }
}

#[test]
fn zero_coupling_decouples_network_bound() {
    let array = ArrayConfig::half_wavelength(16).unwrap();
    let cells: Vec<Vec<Vec<f64>>> = (0..2)
        .map(|c| {
            let d = drop_single_cell(3, array, 0.17, 20, 40 + c).unwrap();
            (0..3).map(|k| d.model.link(0, 0, k).covariance.beam_diag.clone()).collect()
        })
        .collect();
    let links = vec![vec![cells[0].clone(), vec![vec![0.0; 16]; 3]], vec![vec![vec![0.0; 16]; 3], cells[1].clone()]];
    let net = NetworkBeams::new(links).unwrap();
    for mask in 0..8 {
        let classes = vec![split_from_mask(3, mask), split_from_mask(3, 7 - mask)];
        let joint = multicell_bound(&net, &classes, 5.0, 4).unwrap().bound;
        let apart: f64 = (0..2).map(|c| sum_rate_lower_bound(&cells[c], &classes[c], 5.0, 4).unwrap().bound).sum();
        assert!((joint - apart).abs() < 1e-9);
    }
}

#[test]
fn custom_grid_changes_only_prediction_support() {
    let drop = drop_single_cell(3, ArrayConfig::half_wavelength(16).unwrap(), 0.17, 20, 3).unwrap();
    let full = drop.bound_problem(10.0).unwrap();
    let same = drop.bound_problem_on(10.0, GridBounds::full_span(16)).unwrap();
    let all_i = [CellClasses::all_class_i(3)];
    assert_eq!(full.evaluate(&all_i, 5).unwrap(), same.evaluate(&all_i, 5).unwrap());
    let narrow = drop.bound_problem_on(10.0, GridBounds { x_min: 4.0, x_max: 6.0 }).unwrap();
    for beam in narrow.predict_all(5).unwrap()[0].iter() {
        assert!((4..=6).contains(beam));
    }
}

#[test]
fn vanishing_power_gives_vanishing_rate() {
    let drop = drop_single_cell(4, ArrayConfig::half_wavelength(16).unwrap(), 0.17, 20, 1).unwrap();
    let classes = [split_from_mask(4, 0b0101)];
    let r = evaluate_split(&drop, &classes, 4, &settings(1e-12, 50), "proposed").unwrap();
    assert!(r.sum_rate < 1e-9, "{}", r.sum_rate);
    assert!(r.per_user_rates.iter().all(|&x| x >= 0.0));
    assert!((r.sum_rate - r.per_user_rates.iter().sum::<f64>()).abs() < 1e-9);
}

/// One trial equals a hand-built single-shot evaluation: draw the same
/// fading, quantize, precode, and score each user.
#[test]
fn single_trial_matches_direct_evaluation() {
    let m = 16;
    let drop = drop_single_cell(4, ArrayConfig::half_wavelength(m).unwrap(), 0.17, 20, 2).unwrap();
    let classes = CellClasses {
        class_i: vec![0, 2],
        class_s: vec![1, 3],
    };
    let p_d = 10.0;
    let report = evaluate_split(&drop, std::slice::from_ref(&classes), 4, &settings(p_d, 1), "proposed").unwrap();

    let h = &draw_trial(&drop.model, drop.trial_seed(), 0)[0][0];
    let book = hybridfb::dft_codebook(m, 4).unwrap();
    let quantized: Vec<_> = classes.class_i.iter().map(|&i| hybridfb::quantize(&h[i], &book).unwrap().word).collect();
    let statistical = classes.class_s.iter().map(|&n| drop.model.link(0, 0, n).statistical().unwrap().clone()).collect();
    let bank = slnr_precoders_hybrid(&FeedbackState { quantized, statistical, p_d }).unwrap();
    let mut order = classes.class_i.clone();
    order.extend(&classes.class_s);
    let ws: Vec<_> = bank.all().cloned().collect();
    let mut expected = 0.0;
    for (slot, &user) in order.iter().enumerate() {
        expected += (1.0 + sinr_single_cell(&h[user], &ws, slot, p_d)).log2();
    }
    assert!((report.sum_rate - expected).abs() < 1e-10, "{} vs {expected}", report.sum_rate);
    assert_eq!(report.ci95, 0.0);
}

/// A codebook holding the exact channel direction reproduces perfect CSI.
#[test]
fn exact_codebook_equals_perfect_csi() {
    let m = 16;
    let drop = drop_single_cell(3, ArrayConfig::half_wavelength(m).unwrap(), 0.17, 20, 5).unwrap();
    let classes = [CellClasses::all_class_i(3)];
    let h = &draw_trial(&drop.model, drop.trial_seed(), 0)[0][0];
    let books: Vec<Codebook> = h
        .iter()
        .map(|hk| Codebook {
            kind: CodebookKind::Dft,
            bits: 0,
            antennas: m,
            words: vec![normalized(hk).unwrap()],
        })
        .collect();
    let refs = [books.iter().collect::<Vec<_>>()];
    let q = monte_carlo(&drop.model, &classes, CsiMode::Quantized(&refs), 10.0, 1, drop.trial_seed(), "q").unwrap();
    let p = monte_carlo(&drop.model, &classes, CsiMode::Perfect, 10.0, 1, drop.trial_seed(), "p").unwrap();
    for (a, b) in q.per_user_rates.iter().zip(&p.per_user_rates) {
        assert!((a - b).abs() < 1e-9);
    }
}

/// Both schemes on a fixed drop with common fading, over the standard grid.
/// The proposed scheme re-classifies at every power level.
#[test]
fn rates_grow_with_power() {
    for s in 0..2 {
        let drop = drop_single_cell(6, ArrayConfig::half_wavelength(16).unwrap(), 0.17, 20, 70 + s).unwrap();
        let mut last = (0.0, 0.0);
        for db in [0.0, 5.0, 10.0, 15.0, 20.0] {
            let p_d = 10f64.powf(db / 10.0);
            let cfg = settings(p_d, 500);
            let c = hybridfb::classifier::greedy(&drop.bound_problem(p_d).unwrap(), 24).unwrap();
            let proposed = hybridfb::scenario::evaluate_classification(&drop, &c, &cfg, "proposed").unwrap().sum_rate;
            let conventional = conventional_baseline(&drop, 24, &cfg).unwrap().sum_rate;
            assert!(
                proposed >= last.0 && conventional >= last.1,
                "drop {s} at {db} dB: {last:?} -> {:?}",
                (proposed, conventional)
            );
            last = (proposed, conventional);
        }
    }
}

#[test]
fn conventional_is_the_all_class_i_path() {
    let drop = drop_single_cell(5, ArrayConfig::half_wavelength(16).unwrap(), 0.17, 20, 9).unwrap();
    let cfg = settings(10.0, 80);
    let conv = conventional_baseline(&drop, 22, &cfg).unwrap();
    let hybrid = evaluate_split(&drop, &[CellClasses::all_class_i(5)], conventional_bits(22, 5), &cfg, "conventional").unwrap();
    assert_eq!(conv, hybrid);
}

#[test]
fn reports_are_reproducible() {
    let drop = drop_single_cell(4, ArrayConfig::half_wavelength(16).unwrap(), 0.17, 20, 10).unwrap();
    let cfg = settings(10.0, 60);
    let a = evaluate_split(&drop, &[split_from_mask(4, 0b1001)], 5, &cfg, "x").unwrap();
    let b = evaluate_split(&drop, &[split_from_mask(4, 0b1001)], 5, &cfg, "x").unwrap();
    assert_eq!(a, b);
}

#[test]
fn bound_problem_validates_split() {
    let drop = drop_single_cell(3, ArrayConfig::half_wavelength(8).unwrap(), 0.17, 20, 11).unwrap();
    let problem: BoundProblem = drop.bound_problem(1.0).unwrap();
    let bad = CellClasses {
        class_i: vec![0, 1],
        class_s: vec![1, 2],
    };
    assert!(problem.evaluate(&[bad], 3).is_err());
}
