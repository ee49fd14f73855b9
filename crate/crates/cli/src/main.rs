use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hybridfb::validate::SuiteOptions;
use hybridfb_cli::experiment::write_csv;
use hybridfb_cli::validation::validation_rows;
use hybridfb_cli::{load_config, run_experiment, run_validation, CliError, Experiment, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "hybridfb", version, about = "Hybrid statistical/instantaneous CSI feedback simulator")]
struct Cli {
    /// Base seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config's `output`.
    #[arg(long, global = true, env = "HYBRIDFB_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Worker threads for drops.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Run the validation suite; exits non-zero if any check fails.
    Validate {
        /// Fading trials per drop in the Monte Carlo checks.
        #[arg(long, default_value_t = SuiteOptions::default().trials)]
        trials: usize,
        /// Drops in the Monte Carlo checks.
        #[arg(long, default_value_t = SuiteOptions::default().drops)]
        drops: usize,
    },
    /// Print the default config.
    PrintDefaults,
}

fn validate(opts: &SuiteOptions, out_dir: Option<&Path>) -> Result<bool, CliError> {
    let results = run_validation(opts, |r| println!("{}", r.line()));
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed} of {} checks passed", results.len());
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = dir.join("validate_summary.csv");
        write_csv(&path, "validate", "criterion,name,status,seconds", &validation_rows(&results))?;
        println!("wrote {}", path.display());
    }
    Ok(passed == results.len())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::PrintDefaults => {
            print!("{}", ExperimentConfig::default().to_text());
            Ok(true)
        }
        Command::Validate { trials, drops } => {
            if trials == 0 || drops == 0 {
                return Err(CliError::Usage("--trials and --drops must be at least 1".into()));
            }
            let opts = SuiteOptions {
                seed: cli.seed.unwrap_or(SuiteOptions::default().seed),
                trials,
                drops,
                ..SuiteOptions::default()
            };
            validate(&opts, cli.out_dir.as_deref())
        }
        Command::Run { config } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let out_dir = cli.out_dir.unwrap_or_else(|| cfg.output.clone());
            if cfg.experiment == Experiment::Validate {
                let opts = SuiteOptions {
                    seed: cfg.seed,
                    trials: cfg.trials,
                    drops: cfg.drops,
                    max_codebook_bits: cfg.max_codebook_bits,
                };
                return validate(&opts, Some(&out_dir));
            }
            let out = run_experiment(&cfg, &out_dir, cli.threads)?;
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
