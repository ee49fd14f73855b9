//! Sweep runner and CSV emission.
//!
//! A run covers the cartesian product of the config's list-valued fields.
//! Each `(K, SAoA, drop)` combination is one job: the drop is built once and
//! reused across the power grid, budgets and codebooks, so every scheme sees
//! the same geometry and, through the drop's trial seed, the same fading.
//! Jobs may run on several threads; rows are sorted before writing so the
//! files do not depend on scheduling.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use hybridfb::channel::ArrayConfig;
use hybridfb::classifier::{conventional_bits, exhaustive, greedy, Classification, MAX_EXHAUSTIVE_USERS};
use hybridfb::rate::{CellClasses, GridBounds, RateReport};
use hybridfb::scenario::{
    conventional_baseline, drop_multicell, drop_single_cell, evaluate_classification, perfect_csi, CellTopology,
    Drop, EvalSettings, LargeScaleModel,
};
use hybridfb::seed;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;

pub const DROPS_HEADER: &str =
    "scheme,codebook,p_d_dB,L,K,B_total,M,SAoA_deg,drop,K_I,bits_per_user,bound,sum_rate,ci95,trials,seed";
pub const SUMMARY_HEADER: &str = "scheme,codebook,p_d_dB,L,K,B_total,M,SAoA_deg,drops,mean_K_I,bound,sum_rate,ci95,trials";
pub const CLASSIFICATION_HEADER: &str = "method,p_d_dB,L,K,B_total,SAoA_deg,drop,user_id,class,B_bits,chosen_f,bound_value";

/// Sort key: `(K, SAoA, p_d, B_total, codebook, scheme)` indices.
type Key = [usize; 6];

#[derive(Debug, Clone)]
struct Row {
    key: Key,
    drop: usize,
    scheme: &'static str,
    codebook: &'static str,
    k_i: usize,
    bits: u32,
    bound: Option<f64>,
    report: RateReport,
    seed: u64,
}

#[derive(Debug, Default)]
struct JobOutput {
    rows: Vec<Row>,
    classification: Vec<(Key, usize, String)>,
}

/// Paths of the files a run wrote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

fn cells(cfg: &ExperimentConfig) -> usize {
    if cfg.experiment == Experiment::MulticellPowerSweep {
        3
    } else {
        1
    }
}

/// Seed of drop `d`. Shared across `K` and SAoA so that grids reuse user
/// draws where the geometry allows.
pub fn drop_seed(base: u64, d: usize) -> u64 {
    seed::derive(base, d as u64)
}

fn build_drop(cfg: &ExperimentConfig, k: usize, saoa: f64, d: usize) -> Result<Drop, CliError> {
    let array = ArrayConfig::new(cfg.antennas, cfg.spacing)?;
    let spread = saoa.to_radians();
    let s = drop_seed(cfg.seed, d);
    Ok(if cells(cfg) > 1 {
        let ls = LargeScaleModel::new(cfg.shadow_sigma_db, cfg.pathloss_exponent, cfg.reference_distance)?;
        drop_multicell(&CellTopology::three_cell(), &ls, k, array, spread, cfg.paths, s)?
    } else {
        drop_single_cell(k, array, spread, cfg.paths, s)?
    })
}

fn run_job(cfg: &ExperimentConfig, ki: usize, si: usize, d: usize) -> Result<JobOutput, CliError> {
    let (k, saoa) = (cfg.users[ki], cfg.saoa_deg[si]);
    let drop = build_drop(cfg, k, saoa, d)?;
    let per_cell = drop.users_per_cell();
    let total = drop.total_users();
    let grid = GridBounds {
        x_min: cfg.x_min,
        x_max: cfg.x_max,
    };
    let mut out = JobOutput::default();

    for (pi, &db) in cfg.p_d_grid_db.iter().enumerate() {
        let p_d = db_to_linear(db);
        let problem = drop.bound_problem_on(p_d, grid)?;
        for (bi, &b_total) in cfg.b_total.iter().enumerate() {
            let mut methods: Vec<(&'static str, Classification)> = vec![("greedy", greedy(&problem, b_total)?)];
            if cfg.experiment == Experiment::BitAllocationCompare && total <= MAX_EXHAUSTIVE_USERS {
                methods.push(("exhaustive", exhaustive(&problem, b_total)?));
            }
            let conv_bits = conventional_bits(b_total, total);
            let all_i: Vec<CellClasses> = per_cell.iter().map(|&n| CellClasses::all_class_i(n)).collect();
            let conv_bound = problem.evaluate(&all_i, conv_bits)?.bound;

            let prefix = |method: &str| format!("{method},{db},{},{k},{b_total},{saoa},{d}", per_cell.len());
            for (mi, (method, c)) in methods.iter().enumerate() {
                for r in c.csv_rows(&per_cell) {
                    out.classification.push(([ki, si, pi, bi, 0, mi], d, format!("{},{r}", prefix(method))));
                }
            }

            for (ci, &codebook) in cfg.codebooks.iter().enumerate() {
                let settings = EvalSettings {
                    p_d,
                    trials: cfg.trials,
                    codebook,
                    max_codebook_bits: cfg.max_codebook_bits,
                    grid: Some(grid),
                };
                let mut push = |scheme_idx: usize, scheme: &'static str, cb: &'static str, k_i, bits, bound, report| {
                    out.rows.push(Row {
                        key: [ki, si, pi, bi, ci, scheme_idx],
                        drop: d,
                        scheme,
                        codebook: cb,
                        k_i,
                        bits,
                        bound,
                        report,
                        seed: drop.seed,
                    });
                };
                let proposed_label = if cfg.experiment == Experiment::BitAllocationCompare { "greedy" } else { "proposed" };
                let (_, g) = &methods[0];
                push(
                    0,
                    proposed_label,
                    codebook.name(),
                    g.class_i.len(),
                    g.bits_per_i_user,
                    Some(g.bound()),
                    evaluate_classification(&drop, g, &settings, proposed_label)?,
                );
                if let Some((_, e)) = methods.get(1) {
                    push(
                        1,
                        "exhaustive",
                        codebook.name(),
                        e.class_i.len(),
                        e.bits_per_i_user,
                        Some(e.bound()),
                        evaluate_classification(&drop, e, &settings, "exhaustive")?,
                    );
                }
                push(
                    2,
                    "conventional",
                    codebook.name(),
                    total,
                    conv_bits,
                    Some(conv_bound),
                    conventional_baseline(&drop, b_total, &settings)?,
                );
                if cfg.experiment == Experiment::BoundVsMc && ci == 0 {
                    push(3, "perfect-csi", "none", total, 0, None, perfect_csi(&drop, &settings)?);
                }
            }
        }
    }
    Ok(out)
}

fn parallel_jobs<T: Send>(
    count: usize,
    threads: usize,
    job: impl Fn(usize) -> Result<T, CliError> + Sync,
) -> Result<Vec<T>, CliError> {
    let slots: Vec<Mutex<Option<Result<T, CliError>>>> = (0..count).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, count.max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let r = job(i);
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot lock").expect("every job ran"))
        .collect()
}

/// Writes a CSV file: a timestamp comment, the header, then `rows`.
pub fn write_csv(path: &Path, experiment: &str, header: &str, rows: &[String]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut f = std::io::BufWriter::new(fs::File::create(path).map_err(io)?);
    writeln!(f, "# hybridfb {experiment} generated at unix time {stamp}").map_err(io)?;
    writeln!(f, "{header}").map_err(io)?;
    for r in rows {
        writeln!(f, "{r}").map_err(io)?;
    }
    f.flush().map_err(io)
}

/// Runs a sweep experiment and writes its CSV files into `out_dir`.
///
/// `validate` is not a sweep; use [`crate::validation::run_validation`].
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path, threads: usize) -> Result<RunOutput, CliError> {
    if cfg.experiment == Experiment::Validate {
        return Err(CliError::Usage("the validate experiment has no sweep; run the validation suite instead".into()));
    }
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;

    let jobs: Vec<(usize, usize, usize)> = (0..cfg.users.len())
        .flat_map(|ki| (0..cfg.saoa_deg.len()).flat_map(move |si| (0..cfg.drops).map(move |d| (ki, si, d))))
        .collect();
    let outputs = parallel_jobs(jobs.len(), threads, |j| {
        let (ki, si, d) = jobs[j];
        run_job(cfg, ki, si, d)
    })?;

    let mut rows: Vec<Row> = Vec::new();
    let mut class_rows = Vec::new();
    for o in outputs {
        rows.extend(o.rows);
        class_rows.extend(o.classification);
    }
    rows.sort_by_key(|r| (r.key, r.drop));
    class_rows.sort_by_key(|r| (r.0, r.1));

    let l = cells(cfg);
    let m = cfg.antennas;
    let line = |r: &Row| {
        let [ki, si, pi, bi, _, _] = r.key;
        format!(
            "{},{},{},{l},{},{},{m},{},{},{},{},{},{:.6},{:.6},{},{}",
            r.scheme,
            r.codebook,
            cfg.p_d_grid_db[pi],
            cfg.users[ki],
            cfg.b_total[bi],
            cfg.saoa_deg[si],
            r.drop,
            r.k_i,
            r.bits,
            opt(r.bound),
            r.report.sum_rate,
            r.report.ci95,
            r.report.trials,
            r.seed
        )
    };
    let drop_lines: Vec<String> = rows.iter().map(line).collect();

    let mut summary = Vec::new();
    for group in rows.chunk_by(|a, b| a.key == b.key) {
        let r = &group[0];
        let [ki, si, pi, bi, _, _] = r.key;
        let n = group.len() as f64;
        let mean_ki = group.iter().map(|g| g.k_i as f64).sum::<f64>() / n;
        let bound = r.bound.map(|_| group.iter().filter_map(|g| g.bound).sum::<f64>() / n);
        let rate = group.iter().map(|g| g.report.sum_rate).sum::<f64>() / n;
        let ci = group.iter().map(|g| g.report.ci95 * g.report.ci95).sum::<f64>().sqrt() / n;
        summary.push(format!(
            "{},{},{},{l},{},{},{m},{},{},{mean_ki:.3},{},{rate:.6},{ci:.6},{}",
            r.scheme,
            r.codebook,
            cfg.p_d_grid_db[pi],
            cfg.users[ki],
            cfg.b_total[bi],
            cfg.saoa_deg[si],
            group.len(),
            opt(bound),
            r.report.trials
        ));
    }

    let name = cfg.experiment.name();
    let files = vec![
        out_dir.join(format!("{name}_drops.csv")),
        out_dir.join(format!("{name}_summary.csv")),
        out_dir.join(format!("{name}_classification.csv")),
    ];
    write_csv(&files[0], name, DROPS_HEADER, &drop_lines)?;
    write_csv(&files[1], name, SUMMARY_HEADER, &summary)?;
    let class_lines: Vec<String> = class_rows.into_iter().map(|(_, _, s)| s).collect();
    write_csv(&files[2], name, CLASSIFICATION_HEADER, &class_lines)?;
    Ok(RunOutput { files })
}

/// File contents without `#` comment lines.
pub fn csv_body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

