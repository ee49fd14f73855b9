//! Plain-text experiment configuration.
//!
//! One `key = value` pair per line. `#` starts a comment. Lists are comma
//! separated. Unknown keys and malformed values are rejected with the line
//! number and key.

use std::path::{Path, PathBuf};

use hybridfb::scenario::CodebookChoice;

use crate::error::{CliError, ConfigError};

/// Experiment selected by the `experiment` key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    PowerSweep,
    UserSweep,
    BudgetSweep,
    SaoaSweep,
    BoundVsMc,
    BitAllocationCompare,
    MulticellPowerSweep,
    Validate,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Self::PowerSweep,
        Self::UserSweep,
        Self::BudgetSweep,
        Self::SaoaSweep,
        Self::BoundVsMc,
        Self::BitAllocationCompare,
        Self::MulticellPowerSweep,
        Self::Validate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::PowerSweep => "power-sweep",
            Self::UserSweep => "user-sweep",
            Self::BudgetSweep => "budget-sweep",
            Self::SaoaSweep => "saoa-sweep",
            Self::BoundVsMc => "bound-vs-mc",
            Self::BitAllocationCompare => "bit-allocation-compare",
            Self::MulticellPowerSweep => "multicell-power-sweep",
            Self::Validate => "validate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

/// Fully validated experiment parameters.
///
/// Every list-valued field is a sweep axis; runs cover the cartesian product.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub antennas: usize,
    /// Users per cell.
    pub users: Vec<usize>,
    pub b_total: Vec<u32>,
    pub p_d_grid_db: Vec<f64>,
    pub saoa_deg: Vec<f64>,
    pub codebooks: Vec<CodebookChoice>,
    pub trials: usize,
    pub drops: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub paths: usize,
    pub spacing: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub max_codebook_bits: u32,
    pub shadow_sigma_db: f64,
    pub pathloss_exponent: f64,
    pub reference_distance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::PowerSweep,
            antennas: 32,
            users: vec![8],
            b_total: vec![40],
            p_d_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            saoa_deg: vec![10.0],
            codebooks: vec![CodebookChoice::Dft],
            trials: 500,
            drops: 10,
            seed: 1,
            output: PathBuf::from("results"),
            paths: 20,
            spacing: 0.5,
            x_min: 1.0,
            x_max: 32.0,
            max_codebook_bits: 12,
            shadow_sigma_db: 8.0,
            pathloss_exponent: 2.2,
            reference_distance: 100.0,
        }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// The config in file syntax; parsing it yields `self` again.
    pub fn to_text(&self) -> String {
        let codebooks: Vec<&str> = self.codebooks.iter().map(|c| c.name()).collect();
        format!(
            "# hybridfb experiment configuration\n\
             experiment = {}\n\
             M = {}\n\
             K = {}\n\
             B_total = {}\n\
             p_d_grid = {}\n\
             SAoA = {}\n\
             codebook = {}\n\
             trials = {}\n\
             drops = {}\n\
             seed = {}\n\
             output = {}\n\
             paths = {}\n\
             spacing = {}\n\
             x_min = {}\n\
             x_max = {}\n\
             max_codebook_bits = {}\n\
             shadow_sigma_db = {}\n\
             pathloss_exponent = {}\n\
             reference_distance = {}\n",
            self.experiment.name(),
            self.antennas,
            join(&self.users),
            join(&self.b_total),
            join(&self.p_d_grid_db),
            join(&self.saoa_deg),
            codebooks.join(","),
            self.trials,
            self.drops,
            self.seed,
            self.output.display(),
            self.paths,
            self.spacing,
            self.x_min,
            self.x_max,
            self.max_codebook_bits,
            self.shadow_sigma_db,
            self.pathloss_exponent,
            self.reference_distance,
        )
    }
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn err(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            line: self.line,
            key: self.key.to_string(),
            message: message.into(),
        }
    }

    fn scalar<T: std::str::FromStr>(&self, what: &str) -> Result<T, ConfigError> {
        self.value
            .parse()
            .map_err(|_| self.err(format!("expected {what}, got '{}'", self.value)))
    }

    fn list<T: std::str::FromStr>(&self, what: &str) -> Result<Vec<T>, ConfigError> {
        let items: Vec<&str> = self.value.split(',').map(str::trim).collect();
        if items.iter().any(|s| s.is_empty()) {
            return Err(self.err("empty list element"));
        }
        items
            .iter()
            .map(|s| s.parse().map_err(|_| self.err(format!("expected a list of {what}, got '{s}'"))))
            .collect()
    }
}

/// Parses config text. Missing keys take their defaults; `x_max` defaults
/// to `M`.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut x_max = None;
    let mut line_of = std::collections::HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or(ConfigError::Syntax { line, text: content.to_string() })?;
        let e = Entry {
            line,
            key: key.trim(),
            value: value.trim(),
        };
        if e.value.is_empty() {
            return Err(e.err("missing value"));
        }
        if let Some(first) = line_of.insert(e.key.to_string(), line) {
            return Err(e.err(format!("duplicate key, first set on line {first}")));
        }
        match e.key {
            "experiment" => {
                cfg.experiment = Experiment::parse(e.value).ok_or_else(|| {
                    let names: Vec<&str> = Experiment::ALL.iter().map(|x| x.name()).collect();
                    e.err(format!("unknown experiment '{}', expected one of {}", e.value, names.join(", ")))
                })?
            }
            "M" => cfg.antennas = e.scalar("a positive integer")?,
            "K" => cfg.users = e.list("positive integers")?,
            "B_total" => cfg.b_total = e.list("non-negative integers")?,
            "p_d_grid" => cfg.p_d_grid_db = e.list("numbers (dB)")?,
            "SAoA" => cfg.saoa_deg = e.list("numbers (degrees)")?,
            "codebook" => {
                cfg.codebooks = e
                    .value
                    .split(',')
                    .map(|s| CodebookChoice::parse(s.trim()).map_err(|_| e.err(format!("unknown codebook kind '{}'", s.trim()))))
                    .collect::<Result<_, _>>()?
            }
            "trials" => cfg.trials = e.scalar("a positive integer")?,
            "drops" => cfg.drops = e.scalar("a positive integer")?,
            "seed" => cfg.seed = e.scalar("an unsigned 64-bit integer")?,
            "output" => cfg.output = PathBuf::from(e.value),
            "paths" => cfg.paths = e.scalar("a positive integer")?,
            "spacing" => cfg.spacing = e.scalar("a number")?,
            "x_min" => cfg.x_min = e.scalar("a number")?,
            "x_max" => x_max = Some(e.scalar("a number")?),
            "max_codebook_bits" => cfg.max_codebook_bits = e.scalar("a positive integer")?,
            "shadow_sigma_db" => cfg.shadow_sigma_db = e.scalar("a number")?,
            "pathloss_exponent" => cfg.pathloss_exponent = e.scalar("a number")?,
            "reference_distance" => cfg.reference_distance = e.scalar("a number")?,
            _ => return Err(ConfigError::UnknownKey { line, key: e.key.to_string() }),
        }
    }
    cfg.x_max = x_max.unwrap_or(cfg.antennas as f64);

    let range = |key: &str, message: String| ConfigError::Invalid {
        line: line_of.get(key).copied().unwrap_or(0),
        key: key.to_string(),
        message,
    };
    if !(2..=256).contains(&cfg.antennas) {
        return Err(range("M", format!("{} is outside 2..=256", cfg.antennas)));
    }
    if cfg.users.contains(&0) {
        return Err(range("K", "user counts must be at least 1".into()));
    }
    if cfg.trials == 0 {
        return Err(range("trials", "must be at least 1".into()));
    }
    if cfg.drops == 0 {
        return Err(range("drops", "must be at least 1".into()));
    }
    if cfg.paths == 0 {
        return Err(range("paths", "must be at least 1".into()));
    }
    if cfg.spacing != 0.5 {
        return Err(range("spacing", "only half-wavelength spacing (0.5) is supported".into()));
    }
    if cfg.p_d_grid_db.iter().any(|x| !x.is_finite()) {
        return Err(range("p_d_grid", "values must be finite".into()));
    }
    if cfg.saoa_deg.iter().any(|&x| !(x > 0.0 && x <= 180.0)) {
        return Err(range("SAoA", "values must lie in (0, 180] degrees".into()));
    }
    if !(1.0 <= cfg.x_min && cfg.x_min < cfg.x_max && cfg.x_max <= cfg.antennas as f64) {
        let key = if line_of.contains_key("x_max") { "x_max" } else { "x_min" };
        return Err(range(key, format!("need 1 <= x_min < x_max <= M, got {} and {}", cfg.x_min, cfg.x_max)));
    }
    if !(1..=20).contains(&cfg.max_codebook_bits) {
        return Err(range("max_codebook_bits", "must lie in 1..=20".into()));
    }
    if !(cfg.shadow_sigma_db >= 0.0 && cfg.pathloss_exponent > 0.0 && cfg.reference_distance > 0.0) {
        return Err(range("shadow_sigma_db", "large-scale parameters must be positive".into()));
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_config(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), ExperimentConfig::default());
        assert_eq!(parse_config("# only a comment\n\n").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn power_grid() {
        let cfg = parse_config("p_d_grid = 0,5,10,15,20").unwrap();
        assert_eq!(cfg.p_d_grid_db, vec![0.0, 5.0, 10.0, 15.0, 20.0]);
    }

    #[test]
    fn malformed_value_names_key_and_line() {
        let err = parse_config("M = 16\n\ntrials = lots\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::Invalid {
                line: 3,
                key: "trials".into(),
                message: "expected a positive integer, got 'lots'".into()
            }
        );
        assert!(err.to_string().contains("line 3"));
        assert!(err.to_string().contains("trials"));
    }

    #[test]
    fn unknown_key_and_syntax() {
        assert_eq!(
            parse_config("M = 8\nbogus = 1").unwrap_err(),
            ConfigError::UnknownKey { line: 2, key: "bogus".into() }
        );
        assert!(matches!(parse_config("just words"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn out_of_range_values() {
        assert!(matches!(parse_config("trials = 0"), Err(ConfigError::Invalid { key, .. }) if key == "trials"));
        assert!(matches!(parse_config("K = 4, 0"), Err(ConfigError::Invalid { key, .. }) if key == "K"));
        assert!(matches!(parse_config("M = 16\nx_max = 17"), Err(ConfigError::Invalid { line: 2, .. })));
        assert!(matches!(parse_config("spacing = 0.25"), Err(ConfigError::Invalid { key, .. }) if key == "spacing"));
    }

    #[test]
    fn x_max_tracks_m() {
        assert_eq!(parse_config("M = 64").unwrap().x_max, 64.0);
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = parse_config("experiment = saoa-sweep\nK = 4,6\ncodebook = dft, skewed\nSAoA = 5,10.5").unwrap();
        cfg.seed = 99;
        assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(parse_config(&ExperimentConfig::default().to_text()).unwrap(), ExperimentConfig::default());
    }
}
