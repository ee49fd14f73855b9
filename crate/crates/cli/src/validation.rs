//! Validation suite driver: the core checks plus a determinism check on the
//! experiment runner.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use hybridfb::scenario::CodebookChoice;
use hybridfb::validate::{self, CheckResult, SuiteOptions};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;
use crate::experiment::{csv_body, run_experiment};

/// Wall-clock budget for the whole suite.
pub const SUITE_BUDGET: Duration = Duration::from_secs(600);

/// Small configs covering single-cell, skewed codebooks, the bound/perfect
/// path and the multi-cell runner.
pub fn determinism_configs(seed: u64) -> Vec<ExperimentConfig> {
    let base = ExperimentConfig {
        antennas: 16,
        users: vec![4],
        b_total: vec![16],
        p_d_grid_db: vec![0.0, 10.0],
        trials: 40,
        drops: 3,
        seed,
        x_max: 16.0,
        ..ExperimentConfig::default()
    };
    vec![
        ExperimentConfig {
            experiment: Experiment::BoundVsMc,
            codebooks: vec![CodebookChoice::Dft, CodebookChoice::Skewed, CodebookChoice::PredictionGrid],
            ..base.clone()
        },
        ExperimentConfig {
            experiment: Experiment::MulticellPowerSweep,
            users: vec![2],
            ..base
        },
    ]
}

fn scratch_dir(tag: &str) -> PathBuf {
    static NEXT: AtomicUsize = AtomicUsize::new(0);
    let n = NEXT.fetch_add(1, Ordering::Relaxed);
    std::env::temp_dir().join(format!("hybridfb-determinism-{}-{n}-{tag}", std::process::id()))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs each config twice, on one thread and on two, and compares the CSV
/// bodies byte for byte.
pub fn compare_runs(configs: &[ExperimentConfig]) -> Result<(usize, Vec<String>), CliError> {
    let (a, b) = (scratch_dir("a"), scratch_dir("b"));
    let mut compared = 0;
    let mut mismatched = Vec::new();
    let result = (|| {
        for cfg in configs {
            let first = run_experiment(cfg, &a, 1)?;
            let second = run_experiment(cfg, &b, 2)?;
            for (x, y) in first.files.iter().zip(&second.files) {
                compared += 1;
                if csv_body(&read(x)?) != csv_body(&read(y)?) {
                    mismatched.push(x.file_name().unwrap_or_default().to_string_lossy().into_owned());
                }
            }
        }
        Ok::<_, CliError>(())
    })();
    let _ = fs::remove_dir_all(&a);
    let _ = fs::remove_dir_all(&b);
    result.map(|_| (compared, mismatched))
}

/// Determinism of the runner, plus the suite's total runtime so far.
pub fn determinism(seed: u64, suite_elapsed: Duration) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = match compare_runs(&determinism_configs(seed)) {
        Ok((n, bad)) => {
            let total = suite_elapsed + start.elapsed();
            (
                bad.is_empty() && total < SUITE_BUDGET,
                format!(
                    "{} of {n} CSV bodies identical across repeated runs; suite time {:.0} s of {} s budget",
                    n - bad.len(),
                    total.as_secs_f64(),
                    SUITE_BUDGET.as_secs()
                ),
            )
        }
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        id: 10,
        name: "determinism",
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

/// Every check, printing each line as it completes.
pub fn run_validation(opts: &SuiteOptions, mut report: impl FnMut(&CheckResult)) -> Vec<CheckResult> {
    let start = Instant::now();
    let mut results = Vec::new();
    for check in validate::CHECKS {
        let r = check(opts);
        report(&r);
        results.push(r);
    }
    let r = determinism(opts.seed, start.elapsed());
    report(&r);
    results.push(r);
    results
}

/// `criterion,name,status,seconds` rows for the validation CSV.
pub fn validation_rows(results: &[CheckResult]) -> Vec<String> {
    results
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{:.3}",
                r.id,
                r.name,
                if r.passed { "PASS" } else { "FAIL" },
                r.elapsed.as_secs_f64()
            )
        })
        .collect()
}
