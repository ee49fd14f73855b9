//! Desk-scale validation suite.
//!
//! Each check returns a [`CheckResult`] with a one-line summary. The suite is
//! shared by the command-line `validate` driver and the acceptance tests.

use std::time::{Duration, Instant};

use rand::Rng;

use crate::channel::{complex_gaussian, ArrayConfig};
use crate::classifier::{exhaustive, greedy, multicell_classify};
use crate::codebook::{dft_codebook, quantize, skewed_codebook};
use crate::error::Result;
use crate::numerics::{dft_matrix, hermitian_eig, normalized, ComplexMatrix, C64};
use crate::precoder::{
    generalized_rayleigh, instantaneous_slnr, slnr_precoders_hybrid, slnr_precoders_multicell, statistical_slnr,
    FeedbackState,
};
use crate::rate::{multicell_bound, sum_rate_lower_bound, BoundProblem, CellClasses, NetworkBeams, RateReport};
use crate::scenario::{
    conventional_baseline, drop_multicell, drop_single_cell, evaluate_classification, perfect_csi, CellTopology,
    CodebookChoice, EvalSettings, LargeScaleModel, DEFAULT_PATH_COUNT,
};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {}: {} ({:.1} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Options shared by the checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Fading trials per drop in the Monte Carlo checks.
    pub trials: usize,
    /// Drops in the Monte Carlo checks.
    pub drops: usize,
    pub max_codebook_bits: u32,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 2024,
            trials: 500,
            drops: 10,
            max_codebook_bits: 12,
        }
    }
}

fn timed(id: u32, name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        id,
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn random_unit(m: usize, rng: &mut impl Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..m).map(|_| complex_gaussian(rng)).collect();
    normalized(&v).expect("nonzero gaussian draw")
}

fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let mut a = g.matmul(&g.adjoint()).expect("square");
    a.add_scaled(&ComplexMatrix::from_fn(n, n, |r, c| if r == c { C64::new(-(n as f64), 0.0) } else { C64::new(0.0, 0.0) }), 1.0);
    a.hermitize();
    a
}

fn deg(x: f64) -> f64 {
    x.to_radians()
}

/// Mean over drops and the half-width of that mean, from per-drop reports.
fn pooled(reports: &[RateReport]) -> (f64, f64) {
    let n = reports.len() as f64;
    let mean = reports.iter().map(|r| r.sum_rate).sum::<f64>() / n;
    let hw = reports.iter().map(|r| r.ci95 * r.ci95).sum::<f64>().sqrt() / n;
    (mean, hw)
}

/// DFT unitarity and Hermitian eigen reconstruction.
pub fn numerics(opts: &SuiteOptions) -> CheckResult {
    timed(1, "numerics", || {
        let mut worst_dft: f64 = 0.0;
        for m in [8, 32, 128] {
            let v = dft_matrix(m)?;
            let g = v.adjoint().matmul(&v)?;
            worst_dft = worst_dft.max(g.sub(&ComplexMatrix::identity(m)).frobenius_norm());
        }
        let mut rng = seed::rng(seed::derive(opts.seed, 1));
        let mut worst_eig: f64 = 0.0;
        for i in 0..100 {
            let n = 2 + (i * 62) / 99;
            let a = random_hermitian(n, &mut rng);
            let e = hermitian_eig(&a)?;
            let mut rec = ComplexMatrix::zeros(n, n);
            for (c, &l) in e.values.iter().enumerate() {
                rec.add_outer(&e.vectors.column(c), l);
            }
            worst_eig = worst_eig.max(rec.sub(&a).frobenius_norm() / a.frobenius_norm());
        }
        Ok((
            worst_dft < 1e-10 && worst_eig < 1e-8,
            format!("max |V^H V - I|_F = {worst_dft:.2e}, max relative reconstruction error = {worst_eig:.2e}"),
        ))
    })
}

/// Beam-domain covariance sums to `M`.
pub fn trace_identity(opts: &SuiteOptions) -> CheckResult {
    timed(2, "trace identity", || {
        let mut worst: f64 = 0.0;
        for m in [16, 64, 128] {
            let array = ArrayConfig::half_wavelength(m)?;
            for d in 0..50 {
                let drop = drop_single_cell(4, array, deg(10.0), DEFAULT_PATH_COUNT, seed::derive(opts.seed, 200 + d))?;
                for k in 0..4 {
                    let s: f64 = drop.model.link(0, 0, k).covariance.beam_diag.iter().sum();
                    worst = worst.max((s - m as f64).abs() / m as f64);
                }
            }
        }
        Ok((worst < 1e-6, format!("max relative deviation of sum(beam_diag) from M = {worst:.2e}")))
    })
}

/// Precoder maximality against random sampling, and the two reductions.
pub fn precoder_maximality(opts: &SuiteOptions) -> CheckResult {
    timed(3, "precoder maximality", || {
        let m = 8;
        let array = ArrayConfig::half_wavelength(m)?;
        let mut rng = seed::rng(seed::derive(opts.seed, 3));
        let mut failures = 0;
        let mut min_margin = f64::INFINITY;
        let mut reductions_ok = true;
        for inst in 0..50u64 {
            let drop = drop_single_cell(2, array, deg(10.0), DEFAULT_PATH_COUNT, seed::derive(opts.seed, 300 + inst))?;
            let stats = (0..2)
                .map(|k| drop.model.link(0, 0, k).statistical().cloned())
                .collect::<Result<Vec<_>>>()?;
            let quantized: Vec<Vec<C64>> = (0..2).map(|_| random_unit(m, &mut rng)).collect();
            let p_d = db_to_linear(rng.gen_range(0.0..20.0));
            let state = FeedbackState {
                quantized: quantized.clone(),
                statistical: stats.clone(),
                p_d,
            };
            let bank = slnr_precoders_hybrid(&state)?;

            let samples: Vec<Vec<C64>> = (0..10_000).map(|_| random_unit(m, &mut rng)).collect();
            let mut users: Vec<(ComplexMatrix, ComplexMatrix, &Vec<C64>)> = Vec::new();
            let denominator = |skip_i: Option<usize>, skip_s: Option<usize>| {
                let mut d = ComplexMatrix::identity(m).scaled(1.0 / p_d);
                for (j, h) in quantized.iter().enumerate() {
                    if Some(j) != skip_i {
                        d.add_outer(h, 1.0);
                    }
                }
                for (j, s) in stats.iter().enumerate() {
                    if Some(j) != skip_s {
                        d.add_scaled(&s.spatial, 1.0);
                    }
                }
                d
            };
            for (i, (h, w)) in quantized.iter().zip(&bank.class_i).enumerate() {
                users.push((ComplexMatrix::outer(h), denominator(Some(i), None), w));
            }
            for (n, (s, w)) in stats.iter().zip(&bank.class_s).enumerate() {
                users.push((s.spatial.clone(), denominator(None, Some(n)), w));
            }
            for (num, den, w) in &users {
                let ours = generalized_rayleigh(w, num, den);
                let best = samples
                    .iter()
                    .map(|v| generalized_rayleigh(v, num, den))
                    .fold(f64::NEG_INFINITY, f64::max);
                let margin = (ours - best) / best.abs().max(1e-300);
                min_margin = min_margin.min(margin);
                if ours < best * (1.0 - 1e-12) {
                    failures += 1;
                }
            }

            let inst_only = slnr_precoders_hybrid(&FeedbackState {
                quantized: quantized.clone(),
                statistical: vec![],
                p_d,
            })?;
            let stat_only = slnr_precoders_hybrid(&FeedbackState {
                quantized: vec![],
                statistical: stats.clone(),
                p_d,
            })?;
            reductions_ok &= inst_only.class_i == instantaneous_slnr(&quantized, p_d)?;
            reductions_ok &= stat_only.class_s == statistical_slnr(&stats, p_d)?;
        }
        Ok((
            failures == 0 && reductions_ok,
            format!(
                "{failures} of 200 precoders beaten by sampling (min relative margin {min_margin:.3e}); reductions bit-exact: {reductions_ok}"
            ),
        ))
    })
}

/// Bound and proposed-scheme Monte Carlo both increase with power; the bound
/// stays below the perfect-CSI curve.
pub fn bound_vs_monte_carlo(opts: &SuiteOptions) -> CheckResult {
    timed(4, "bound vs Monte Carlo", || {
        let (m, k, b_total) = (32, 6, 24);
        let grid = [0.0, 5.0, 10.0, 15.0, 20.0];
        let array = ArrayConfig::half_wavelength(m)?;
        let drops = (0..opts.drops as u64)
            .map(|d| drop_single_cell(k, array, deg(10.0), DEFAULT_PATH_COUNT, seed::derive(opts.seed, 400 + d)))
            .collect::<Result<Vec<_>>>()?;
        let mut bound = Vec::new();
        let mut proposed = Vec::new();
        let mut perfect = Vec::new();
        for &db in &grid {
            let p_d = db_to_linear(db);
            let settings = EvalSettings {
                p_d,
                trials: opts.trials,
                codebook: CodebookChoice::Dft,
                max_codebook_bits: opts.max_codebook_bits,
                grid: None,
            };
            let (mut b, mut pr, mut pf) = (Vec::new(), Vec::new(), Vec::new());
            for drop in &drops {
                let c = greedy(&drop.bound_problem(p_d)?, b_total)?;
                b.push(c.bound());
                pr.push(evaluate_classification(drop, &c, &settings, "proposed")?);
                pf.push(perfect_csi(drop, &settings)?);
            }
            bound.push(b.iter().sum::<f64>() / b.len() as f64);
            proposed.push(pooled(&pr).0);
            perfect.push(pooled(&pf).0);
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        let below = bound.iter().zip(&perfect).all(|(b, p)| b < p);
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join("/");
        Ok((
            increasing(&bound) && increasing(&proposed) && below,
            format!(
                "bound {} | proposed MC {} | perfect-CSI MC {} (p_d 0..20 dB)",
                fmt(&bound),
                fmt(&proposed),
                fmt(&perfect)
            ),
        ))
    })
}

/// Proposed beats conventional with a DFT codebook.
pub fn scheme_comparison(opts: &SuiteOptions) -> CheckResult {
    timed(5, "scheme comparison", || {
        let (m, k, b_total, p_d) = (64, 10, 40, db_to_linear(10.0));
        let array = ArrayConfig::half_wavelength(m)?;
        let settings = EvalSettings {
            p_d,
            trials: opts.trials,
            codebook: CodebookChoice::Dft,
            max_codebook_bits: opts.max_codebook_bits,
                grid: None,
        };
        let (mut pr, mut cv, mut f) = (Vec::new(), Vec::new(), Vec::new());
        for d in 0..opts.drops as u64 {
            let drop = drop_single_cell(k, array, deg(10.0), DEFAULT_PATH_COUNT, seed::derive(opts.seed, 500 + d))?;
            let c = greedy(&drop.bound_problem(p_d)?, b_total)?;
            f.push(c.chosen_f);
            pr.push(evaluate_classification(&drop, &c, &settings, "proposed")?);
            cv.push(conventional_baseline(&drop, b_total, &settings)?);
        }
        let (mp, hp) = pooled(&pr);
        let (mc, hc) = pooled(&cv);
        Ok((
            mp - mc > hp + hc,
            format!("proposed {mp:.3} +/- {hp:.3}, conventional {mc:.3} +/- {hc:.3}; K_I per drop {f:?}"),
        ))
    })
}

/// With few users and many bits everyone is class-I.
pub fn few_user_regime(opts: &SuiteOptions) -> CheckResult {
    timed(6, "few-user regime", || {
        let (m, k, b_total, p_d) = (64, 4, 40, db_to_linear(10.0));
        let array = ArrayConfig::half_wavelength(m)?;
        let settings = EvalSettings {
            p_d,
            trials: opts.trials,
            codebook: CodebookChoice::Dft,
            max_codebook_bits: opts.max_codebook_bits,
                grid: None,
        };
        let mut all_i = 0;
        let mut agree = true;
        for d in 0..opts.drops as u64 {
            let drop = drop_single_cell(k, array, deg(10.0), DEFAULT_PATH_COUNT, seed::derive(opts.seed, 600 + d))?;
            let c = greedy(&drop.bound_problem(p_d)?, b_total)?;
            if c.chosen_f == k {
                all_i += 1;
                let p = evaluate_classification(&drop, &c, &settings, "proposed")?;
                let q = conventional_baseline(&drop, b_total, &settings)?;
                agree &= (p.sum_rate - q.sum_rate).abs() <= p.ci95 + q.ci95;
            }
        }
        let needed = (opts.drops * 8).div_ceil(10);
        Ok((
            all_i >= needed && agree,
            format!("all class-I in {all_i} of {} drops; rates agree within half-widths: {agree}", opts.drops),
        ))
    })
}

/// Greedy dominates the endpoints; the exhaustive oracle dominates greedy.
pub fn classifier_guarantees(opts: &SuiteOptions) -> CheckResult {
    timed(7, "classifier guarantees", || {
        let (m, k, b_total) = (16, 6, 24);
        let array = ArrayConfig::half_wavelength(m)?;
        let mut rng = seed::rng(seed::derive(opts.seed, 7));
        let (mut endpoint_ok, mut oracle_ok) = (0, 0);
        let mut ratios = Vec::new();
        for inst in 0..100u64 {
            let drop = drop_single_cell(k, array, deg(10.0), DEFAULT_PATH_COUNT, seed::derive(opts.seed, 700 + inst))?;
            let problem = drop.bound_problem(db_to_linear(rng.gen_range(0.0..20.0)))?;
            let g = greedy(&problem, b_total)?;
            let e = exhaustive(&problem, b_total)?;
            let ends = g.candidate_bounds[0].max(g.candidate_bounds[k]);
            endpoint_ok += usize::from(g.bound() >= ends);
            oracle_ok += usize::from(e.bound() >= g.bound());
            ratios.push(g.bound() / e.bound());
        }
        ratios.sort_by(f64::total_cmp);
        let optimal = ratios.iter().filter(|&&r| r == 1.0).count();
        Ok((
            endpoint_ok == 100 && oracle_ok == 100,
            format!(
                "greedy >= endpoints {endpoint_ok}/100, exhaustive >= greedy {oracle_ok}/100; greedy/exhaustive min {:.4} median {:.4}, optimal in {optimal}/100",
                ratios[0], ratios[50]
            ),
        ))
    })
}

/// Alignment grows with bits; the skewed book beats the DFT book.
pub fn codebook_quality(opts: &SuiteOptions) -> CheckResult {
    timed(8, "codebook quality", || {
        let m = 32;
        let array = ArrayConfig::half_wavelength(m)?;
        let books: Vec<_> = (1..=6).map(|b| dft_codebook(m, b)).collect::<Result<_>>()?;
        let (users, per_user) = (200u64, 5);
        let mut dft_means = [0.0; 6];
        let (mut skewed, mut dft4) = (Vec::new(), Vec::new());
        for u in 0..users {
            let drop = drop_single_cell(1, array, deg(10.0), DEFAULT_PATH_COUNT, seed::derive(opts.seed, 800 + u))?;
            let link = drop.model.link(0, 0, 0);
            let sk = skewed_codebook(&link.covariance, 4, seed::derive(opts.seed, 900 + u))?;
            let mut rng = seed::rng(seed::derive(opts.seed, 1000 + u));
            for _ in 0..per_user {
                let h = link.generator.draw(&mut rng).h;
                for (b, book) in books.iter().enumerate() {
                    let a = quantize(&h, book)?.alignment;
                    dft_means[b] += a;
                    if b == 3 {
                        dft4.push(a);
                    }
                }
                skewed.push(quantize(&h, &sk)?.alignment);
            }
        }
        let n = (users as usize * per_user) as f64;
        for v in dft_means.iter_mut() {
            *v /= n;
        }
        let stats = |v: &[f64]| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
            (mean, (var / v.len() as f64).sqrt())
        };
        let (ms, ss) = stats(&skewed);
        let (md, sd) = stats(&dft4);
        let monotone = dft_means.windows(2).all(|w| w[1] >= w[0]);
        Ok((
            monotone && ms - md > ss + sd,
            format!(
                "DFT alignment by B=1..6: {}; B=4 skewed {ms:.4} (se {ss:.4}) vs DFT {md:.4} (se {sd:.4})",
                dft_means.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join("/")
            ),
        ))
    })
}

/// Single-cell reductions, decoupling, and the 3-cell comparison.
pub fn multicell_consistency(opts: &SuiteOptions) -> CheckResult {
    timed(9, "multi-cell consistency", || {
        let m = 32;
        let array = ArrayConfig::half_wavelength(m)?;
        let p_d = db_to_linear(10.0);

        // L = 1 against the single-cell paths.
        let drop = drop_single_cell(4, array, deg(10.0), DEFAULT_PATH_COUNT, seed::derive(opts.seed, 901))?;
        let beams: Vec<Vec<f64>> = (0..4).map(|k| drop.model.link(0, 0, k).covariance.beam_diag.clone()).collect();
        let net = NetworkBeams::single_cell(beams.clone())?;
        let mut single_ok = true;
        let split = CellClasses {
            class_i: vec![0, 2],
            class_s: vec![1, 3],
        };
        single_ok &= multicell_bound(&net, std::slice::from_ref(&split), p_d, 5)?
            == sum_rate_lower_bound(&beams, &split, p_d, 5)?;
        single_ok &= multicell_classify(&net, 16, p_d)? == crate::classifier::greedy_classify(&beams, 16, p_d)?;
        let mut rng = seed::rng(seed::derive(opts.seed, 9));
        let state = FeedbackState {
            quantized: (0..2).map(|_| random_unit(m, &mut rng)).collect(),
            statistical: vec![drop.model.link(0, 0, 1).statistical()?.clone()],
            p_d,
        };
        single_ok &= slnr_precoders_multicell(std::slice::from_ref(&state), &[vec![]])?[0] == slnr_precoders_hybrid(&state)?;

        // Zero coupling decouples the network bound.
        let cells: Vec<Vec<Vec<f64>>> = (0..3)
            .map(|c| {
                let d = drop_single_cell(3, array, deg(10.0), DEFAULT_PATH_COUNT, seed::derive(opts.seed, 910 + c))?;
                Ok((0..3).map(|k| d.model.link(0, 0, k).covariance.beam_diag.clone()).collect())
            })
            .collect::<Result<_>>()?;
        let links: Vec<Vec<Vec<Vec<f64>>>> = (0..3)
            .map(|l| {
                (0..3)
                    .map(|j| if l == j { cells[l].clone() } else { vec![vec![0.0; m]; 3] })
                    .collect()
            })
            .collect();
        let classes = vec![
            CellClasses {
                class_i: vec![0, 1],
                class_s: vec![2],
            },
            CellClasses::all_class_s(3),
            CellClasses {
                class_i: vec![2],
                class_s: vec![0, 1],
            },
        ];
        let network = BoundProblem::new(NetworkBeams::new(links)?, p_d)?.evaluate(&classes, 6)?.bound;
        let per_cell: f64 = (0..3)
            .map(|c| sum_rate_lower_bound(&cells[c], &classes[c], p_d, 6).map(|r| r.bound))
            .sum::<Result<f64>>()?;
        let decoupled = (network - per_cell).abs() <= 1e-9 * per_cell.abs().max(1.0);

        // 3-cell desk-scale comparison.
        let b_total = 27;
        let topo = CellTopology::three_cell();
        let ls = LargeScaleModel::new(8.0, 2.2, 100.0)?;
        let settings = EvalSettings {
            p_d,
            trials: opts.trials,
            codebook: CodebookChoice::Dft,
            max_codebook_bits: opts.max_codebook_bits,
                grid: None,
        };
        let (mut pr, mut cv) = (Vec::new(), Vec::new());
        for d in 0..opts.drops as u64 {
            let drop = drop_multicell(&topo, &ls, 3, array, deg(10.0), DEFAULT_PATH_COUNT, seed::derive(opts.seed, 950 + d))?;
            let c = multicell_classify(&drop.beams()?, b_total, p_d)?;
            pr.push(evaluate_classification(&drop, &c, &settings, "proposed")?);
            cv.push(conventional_baseline(&drop, b_total, &settings)?);
        }
        let (mp, hp) = pooled(&pr);
        let (mc, hc) = pooled(&cv);
        Ok((
            single_ok && decoupled && mp >= mc,
            format!(
                "L=1 bit-match {single_ok}; decoupled |diff| = {:.1e}; 3-cell proposed {mp:.3} +/- {hp:.3} vs conventional {mc:.3} +/- {hc:.3}",
                (network - per_cell).abs()
            ),
        ))
    })
}

/// Checks 1 to 9, in order.
pub const CHECKS: [fn(&SuiteOptions) -> CheckResult; 9] = [
    numerics,
    trace_identity,
    precoder_maximality,
    bound_vs_monte_carlo,
    scheme_comparison,
    few_user_regime,
    classifier_guarantees,
    codebook_quality,
    multicell_consistency,
];

pub fn run_all(opts: &SuiteOptions) -> Vec<CheckResult> {
    CHECKS.iter().map(|c| c(opts)).collect()
}
