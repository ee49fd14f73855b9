//! Scenario assembly: single-cell and 3-cell user drops, large-scale fading,
//! codebook selection, and the conventional all-class-I baseline.
//!
//! In the 3-cell layout the BSs sit on the vertices of an equilateral
//! triangle of side `500 * sqrt(3)` m, each 500 m from the centroid, and each
//! serves the 120-degree sector facing the centroid. Users are uniform in area
//! within that sector between `r_h` and the cell radius. The AoA from a BS to
//! a user is the angle off its boresight folded into `[-pi/2, pi/2]` (a ULA
//! cannot tell front from back).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::channel::{
    analytical_beam_covariance, draw_paths, AngularProfile, ArrayConfig, ChannelGenerator, PathSet,
};
use crate::classifier::{conventional_bits, Classification};
use crate::codebook::{dft_codebook, prediction_grid_codebook, skewed_codebook, Codebook};
use crate::error::{Error, Result};
use crate::rate::{
    monte_carlo, BoundProblem, CellClasses, CsiMode, GridBounds, Link, NetworkBeams, NetworkModel, RateReport,
};
use crate::seed::{self, stream};

/// Paths per user in every scenario of the evaluation.
pub const DEFAULT_PATH_COUNT: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct CellTopology {
    pub bs_positions: Vec<[f64; 2]>,
    /// Direction each BS array faces, radians.
    pub boresights: Vec<f64>,
    pub cell_radius: f64,
    /// No user is closer than this to its BS.
    pub min_distance: f64,
    /// Users lie within this angle of the serving BS's boresight.
    pub sector_half_width: f64,
}

impl CellTopology {
    /// The three adjacent sectors around a common centroid at the origin.
    pub fn three_cell() -> Self {
        let radius = 500.0;
        let angles = [FRAC_PI_2, FRAC_PI_2 + 2.0 * PI / 3.0, FRAC_PI_2 + 4.0 * PI / 3.0];
        Self {
            bs_positions: angles.iter().map(|a| [radius * a.cos(), radius * a.sin()]).collect(),
            boresights: angles.iter().map(|a| wrap_angle(a + PI)).collect(),
            cell_radius: radius,
            min_distance: 100.0,
            sector_half_width: FRAC_PI_3,
        }
    }

    pub fn cells(&self) -> usize {
        self.bs_positions.len()
    }

    /// Whether `p` is a valid position for a user of `cell`.
    pub fn contains(&self, cell: usize, p: [f64; 2]) -> bool {
        let d = distance(self.bs_positions[cell], p);
        let off = wrap_angle(bearing(self.bs_positions[cell], p) - self.boresights[cell]);
        d >= self.min_distance - 1e-9 && d <= self.cell_radius + 1e-9 && off.abs() <= self.sector_half_width + 1e-12
    }

    /// Direction of `p` off BS `bs`'s boresight, folded into `[-pi/2, pi/2]`.
    pub fn aoa(&self, bs: usize, p: [f64; 2]) -> f64 {
        let off = bearing(self.bs_positions[bs], p) - self.boresights[bs];
        off.sin().asin()
    }

    pub fn distance(&self, bs: usize, p: [f64; 2]) -> f64 {
        distance(self.bs_positions[bs], p)
    }

    /// Uniform-in-area position in `cell`'s sector.
    pub fn place_user<R: Rng + ?Sized>(&self, cell: usize, rng: &mut R) -> [f64; 2] {
        let (r0, r1) = (self.min_distance, self.cell_radius);
        let u: f64 = rng.gen();
        let r = (r0 * r0 + u * (r1 * r1 - r0 * r0)).sqrt();
        let phi = self.boresights[cell] + self.sector_half_width * (2.0 * rng.gen::<f64>() - 1.0);
        let b = self.bs_positions[cell];
        [b[0] + r * phi.cos(), b[1] + r * phi.sin()]
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

fn bearing(from: [f64; 2], to: [f64; 2]) -> f64 {
    (to[1] - from[1]).atan2(to[0] - from[0])
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Path loss with log-normal shadowing: `z (d / r_h)^{-nu}`,
/// `10 log10 z ~ N(0, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeScaleModel {
    pub shadow_sigma_db: f64,
    pub pathloss_exponent: f64,
    pub reference_distance: f64,
}

impl Default for LargeScaleModel {
    fn default() -> Self {
        Self {
            shadow_sigma_db: 8.0,
            pathloss_exponent: 2.2,
            reference_distance: 100.0,
        }
    }
}

impl LargeScaleModel {
    pub fn new(shadow_sigma_db: f64, pathloss_exponent: f64, reference_distance: f64) -> Result<Self> {
        if !(shadow_sigma_db >= 0.0 && pathloss_exponent > 0.0 && reference_distance > 0.0) {
            return Err(Error::InvalidInput("large-scale parameters must be positive".into()));
        }
        Ok(Self {
            shadow_sigma_db,
            pathloss_exponent,
            reference_distance,
        })
    }

    pub fn gain(&self, distance: f64, shadow_db: f64) -> f64 {
        10f64.powf(shadow_db / 10.0) * (distance / self.reference_distance).powf(-self.pathloss_exponent)
    }

    /// One shadowing value in dB.
    pub fn draw_shadow_db<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.shadow_sigma_db == 0.0 {
            return 0.0;
        }
        Normal::new(0.0, self.shadow_sigma_db).expect("valid deviation").sample(rng)
    }
}

/// Geometry and statistics of one link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub profile: AngularProfile,
    pub paths: PathSet,
    pub gain: f64,
}

/// One user drop: geometry, per-link statistics, and the ready-to-simulate
/// network model.
#[derive(Debug, Clone)]
pub struct Drop {
    pub seed: u64,
    pub array: ArrayConfig,
    /// `[cell][user]`; `None` for the single-cell scenario, which has no
    /// geometry beyond the AoAs.
    pub positions: Option<Vec<Vec<[f64; 2]>>>,
    /// `[bs][cell][user]`.
    pub specs: Vec<Vec<Vec<LinkSpec>>>,
    pub model: NetworkModel,
}

impl Drop {
    /// Builds the drop from link statistics, computing covariances.
    pub fn from_specs(
        seed: u64,
        array: ArrayConfig,
        positions: Option<Vec<Vec<[f64; 2]>>>,
        specs: Vec<Vec<Vec<LinkSpec>>>,
    ) -> Result<Self> {
        let cells = specs.len();
        if cells == 0 || specs.iter().any(|bs| bs.len() != cells) {
            return Err(Error::InvalidInput("link table must be L x L x K".into()));
        }
        let users: Vec<usize> = specs[0].iter().map(Vec::len).collect();
        if specs.iter().any(|bs| bs.iter().map(Vec::len).ne(users.iter().copied())) {
            return Err(Error::InvalidInput("inconsistent users per cell".into()));
        }
        let links = specs
            .iter()
            .map(|bs| {
                bs.iter()
                    .map(|cell| {
                        cell.iter()
                            .map(|s| {
                                let cov = analytical_beam_covariance(&array, &s.paths)?;
                                let cov = if s.gain == 1.0 { cov } else { cov.scaled(s.gain) };
                                Ok(Link::new(ChannelGenerator::new(&array, &s.paths), s.gain, cov))
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            seed,
            array,
            positions,
            specs,
            model: NetworkModel {
                antennas: array.antennas,
                links,
            },
        })
    }

    pub fn cells(&self) -> usize {
        self.model.cells()
    }

    pub fn users_per_cell(&self) -> Vec<usize> {
        (0..self.cells()).map(|c| self.model.users_in(c)).collect()
    }

    pub fn total_users(&self) -> usize {
        self.model.total_users()
    }

    pub fn beams(&self) -> Result<NetworkBeams> {
        self.model.beams()
    }

    pub fn bound_problem(&self, p_d: f64) -> Result<BoundProblem> {
        BoundProblem::new(self.beams()?, p_d)
    }

    /// Bound problem with every user's prediction grid set to `grid`.
    pub fn bound_problem_on(&self, p_d: f64, grid: GridBounds) -> Result<BoundProblem> {
        let grids = self.users_per_cell().iter().map(|&k| vec![grid; k]).collect();
        BoundProblem::with_grids(self.beams()?, grids, p_d)
    }

    /// Seed of the Monte Carlo fading draws for this drop.
    pub fn trial_seed(&self) -> u64 {
        seed::derive(self.seed, stream::TRIALS)
    }

    /// Plain-text manifest: `key = value` header lines, then one
    /// `position cell user x y` line per user (multi-cell only) and one
    /// `link bs cell user mean_aoa spread gain aoa_1 ... aoa_P` line per link.
    pub fn to_manifest(&self) -> String {
        let mut out = String::from("# hybridfb drop manifest v1\n");
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("antennas = {}\n", self.array.antennas));
        out.push_str(&format!("spacing_ratio = {}\n", self.array.spacing_ratio));
        let users: Vec<String> = self.users_per_cell().iter().map(usize::to_string).collect();
        out.push_str(&format!("users = {}\n", users.join(",")));
        if let Some(pos) = &self.positions {
            for (j, cell) in pos.iter().enumerate() {
                for (k, p) in cell.iter().enumerate() {
                    out.push_str(&format!("position {j} {k} {} {}\n", p[0], p[1]));
                }
            }
        }
        for (l, bs) in self.specs.iter().enumerate() {
            for (j, cell) in bs.iter().enumerate() {
                for (k, s) in cell.iter().enumerate() {
                    out.push_str(&format!(
                        "link {l} {j} {k} {} {} {}",
                        s.profile.mean_aoa, s.profile.spread, s.gain
                    ));
                    for a in &s.paths.aoas {
                        out.push_str(&format!(" {a}"));
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn from_manifest(text: &str) -> Result<Self> {
        let mut seed_v = None;
        let mut antennas = None;
        let mut spacing = None;
        let mut users: Option<Vec<usize>> = None;
        let mut positions: Vec<(usize, usize, [f64; 2])> = Vec::new();
        let mut links: Vec<(usize, usize, usize, LinkSpec)> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |what: &str| Error::Parse(format!("manifest line {}: {what}", n + 1));
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((k, v)) = line.split_once('=') {
                let v = v.trim();
                match k.trim() {
                    "seed" => seed_v = Some(v.parse::<u64>().map_err(|_| err("bad seed"))?),
                    "antennas" => antennas = Some(v.parse::<usize>().map_err(|_| err("bad antennas"))?),
                    "spacing_ratio" => spacing = Some(v.parse::<f64>().map_err(|_| err("bad spacing_ratio"))?),
                    "users" => {
                        users = Some(
                            v.split(',')
                                .map(|s| s.trim().parse::<usize>())
                                .collect::<std::result::Result<_, _>>()
                                .map_err(|_| err("bad users"))?,
                        )
                    }
                    other => return Err(err(&format!("unknown key '{other}'"))),
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let idx = |i: usize| -> Result<usize> {
                fields
                    .get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err("bad index"))
            };
            let num = |i: usize| -> Result<f64> {
                fields
                    .get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err("bad number"))
            };
            match fields[0] {
                "position" => positions.push((idx(1)?, idx(2)?, [num(3)?, num(4)?])),
                "link" => {
                    let aoas = (7..fields.len()).map(num).collect::<Result<Vec<f64>>>()?;
                    let profile = AngularProfile::new(num(4)?, num(5)?, aoas.len())?;
                    links.push((
                        idx(1)?,
                        idx(2)?,
                        idx(3)?,
                        LinkSpec {
                            profile,
                            paths: PathSet { aoas },
                            gain: num(6)?,
                        },
                    ));
                }
                other => return Err(err(&format!("unknown record '{other}'"))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("manifest lacks '{k}'"));
        let users = users.ok_or_else(|| missing("users"))?;
        let array = ArrayConfig::new(
            antennas.ok_or_else(|| missing("antennas"))?,
            spacing.ok_or_else(|| missing("spacing_ratio"))?,
        )?;
        let cells = users.len();
        let mut table: Vec<Vec<Vec<Option<LinkSpec>>>> =
            (0..cells).map(|_| users.iter().map(|&k| vec![None; k]).collect()).collect();
        for (l, j, k, s) in links {
            let slot = table
                .get_mut(l)
                .and_then(|b| b.get_mut(j))
                .and_then(|c| c.get_mut(k))
                .ok_or_else(|| Error::Parse(format!("link {l} {j} {k} outside the declared users")))?;
            *slot = Some(s);
        }
        let specs = table
            .into_iter()
            .map(|bs| {
                bs.into_iter()
                    .map(|cell| {
                        cell.into_iter()
                            .collect::<Option<Vec<_>>>()
                            .ok_or_else(|| Error::Parse("manifest is missing links".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let positions = if positions.is_empty() {
            None
        } else {
            let mut grid: Vec<Vec<[f64; 2]>> = users.iter().map(|&k| vec![[f64::NAN; 2]; k]).collect();
            for (j, k, p) in positions {
                *grid
                    .get_mut(j)
                    .and_then(|c| c.get_mut(k))
                    .ok_or_else(|| Error::Parse(format!("position {j} {k} outside the declared users")))? = p;
            }
            Some(grid)
        };
        Self::from_specs(seed_v.ok_or_else(|| missing("seed"))?, array, positions, specs)
    }
}

/// `K` users with uniform mean AoAs on `[-pi/2, pi/2]`, fixed spread, and
/// unit large-scale gain.
pub fn drop_single_cell(k: usize, array: ArrayConfig, spread: f64, path_count: usize, seed: u64) -> Result<Drop> {
    if k == 0 {
        return Err(Error::InvalidInput("a drop needs at least one user".into()));
    }
    let cell = (0..k)
        .map(|u| {
            let mut rng = seed::rng(seed::derive(seed, stream::MEAN_AOA + u as u64));
            let mean = rng.gen_range(-FRAC_PI_2..=FRAC_PI_2);
            let profile = AngularProfile::new(mean, spread, path_count)?;
            let paths = draw_paths(&profile, seed::derive(seed, stream::PATHS + u as u64));
            Ok(LinkSpec {
                profile,
                paths,
                gain: 1.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Drop::from_specs(seed, array, None, vec![vec![cell]])
}

/// Users placed in each cell's sector; every BS-user link gets its own AoA
/// geometry, path draw and shadowing.
pub fn drop_multicell(
    topology: &CellTopology,
    large_scale: &LargeScaleModel,
    users_per_cell: usize,
    array: ArrayConfig,
    spread: f64,
    path_count: usize,
    seed: u64,
) -> Result<Drop> {
    if users_per_cell == 0 {
        return Err(Error::InvalidInput("a drop needs at least one user per cell".into()));
    }
    let cells = topology.cells();
    let total = cells * users_per_cell;
    let positions: Vec<Vec<[f64; 2]>> = (0..cells)
        .map(|j| {
            (0..users_per_cell)
                .map(|k| {
                    let pooled = (j * users_per_cell + k) as u64;
                    topology.place_user(j, &mut seed::rng(seed::derive(seed, stream::POSITIONS + pooled)))
                })
                .collect()
        })
        .collect();
    let specs = (0..cells)
        .map(|l| {
            (0..cells)
                .map(|j| {
                    (0..users_per_cell)
                        .map(|k| {
                            let link = (l * total + j * users_per_cell + k) as u64;
                            let p = positions[j][k];
                            let shadow =
                                large_scale.draw_shadow_db(&mut seed::rng(seed::derive(seed, stream::SHADOWING + link)));
                            let gain = large_scale.gain(topology.distance(l, p), shadow);
                            let profile = AngularProfile::new(topology.aoa(l, p), spread, path_count)?;
                            let paths = draw_paths(&profile, seed::derive(seed, stream::PATHS + link));
                            Ok(LinkSpec { profile, paths, gain })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Drop::from_specs(seed, array, Some(positions), specs)
}

/// Codebook family used for class-I feedback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookChoice {
    Dft,
    Skewed,
    PredictionGrid,
}

impl CodebookChoice {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Dft => "dft",
            Self::Skewed => "skewed",
            Self::PredictionGrid => "prediction-grid",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dft" => Ok(Self::Dft),
            "skewed" => Ok(Self::Skewed),
            "prediction-grid" => Ok(Self::PredictionGrid),
            other => Err(Error::Parse(format!("unknown codebook kind '{other}'"))),
        }
    }
}

/// Codebooks for every class-I user, `[cell][position in class_i]`.
pub fn build_codebooks(
    drop: &Drop,
    classes: &[CellClasses],
    bits: u32,
    choice: CodebookChoice,
    grid: Option<GridBounds>,
) -> Result<Vec<Vec<Codebook>>> {
    let m = drop.array.antennas;
    let grid = grid.unwrap_or_else(|| GridBounds::full_span(m));
    let shared = match choice {
        CodebookChoice::Dft => Some(dft_codebook(m, bits)?),
        CodebookChoice::PredictionGrid => Some(prediction_grid_codebook(m, bits, grid.x_min, grid.x_max)?),
        CodebookChoice::Skewed => None,
    };
    let users = drop.users_per_cell();
    classes
        .iter()
        .enumerate()
        .map(|(l, cls)| {
            cls.class_i
                .iter()
                .map(|&i| match &shared {
                    Some(b) => Ok(b.clone()),
                    None => {
                        let pooled = users[..l].iter().sum::<usize>() + i;
                        let cov = &drop.model.link(l, l, i).covariance;
                        skewed_codebook(cov, bits, seed::derive(drop.seed, stream::CODEBOOK + pooled as u64))
                    }
                })
                .collect()
        })
        .collect()
}

/// Settings shared by scheme evaluations on one drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSettings {
    pub p_d: f64,
    pub trials: usize,
    pub codebook: CodebookChoice,
    /// Largest codebook materialized for Monte Carlo; larger budgets are
    /// quantized with this many bits.
    pub max_codebook_bits: u32,
    /// Support interval of the prediction-grid codebook; full span when unset.
    pub grid: Option<GridBounds>,
}

/// Monte Carlo rate of a class split with `bits` per class-I user.
pub fn evaluate_split(
    drop: &Drop,
    classes: &[CellClasses],
    bits: u32,
    settings: &EvalSettings,
    scheme: &str,
) -> Result<RateReport> {
    let bits = bits.min(settings.max_codebook_bits);
    let books = build_codebooks(drop, classes, bits, settings.codebook, settings.grid)?;
    let refs: Vec<Vec<&Codebook>> = books.iter().map(|c| c.iter().collect()).collect();
    monte_carlo(
        &drop.model,
        classes,
        CsiMode::Quantized(&refs),
        settings.p_d,
        settings.trials,
        drop.trial_seed(),
        scheme,
    )
}

/// Monte Carlo rate of a classifier's split.
pub fn evaluate_classification(drop: &Drop, c: &Classification, settings: &EvalSettings, scheme: &str) -> Result<RateReport> {
    evaluate_split(drop, &c.cell_classes(&drop.users_per_cell()), c.bits_per_i_user, settings, scheme)
}

/// Every user class-I with `ceil(B_total / K)` bits.
pub fn conventional_baseline(drop: &Drop, b_total: u32, settings: &EvalSettings) -> Result<RateReport> {
    let classes: Vec<CellClasses> = drop.users_per_cell().iter().map(|&k| CellClasses::all_class_i(k)).collect();
    evaluate_split(drop, &classes, conventional_bits(b_total, drop.total_users()), settings, "conventional")
}

/// Everyone class-I with unquantized channel directions.
pub fn perfect_csi(drop: &Drop, settings: &EvalSettings) -> Result<RateReport> {
    let classes: Vec<CellClasses> = drop.users_per_cell().iter().map(|&k| CellClasses::all_class_i(k)).collect();
    monte_carlo(
        &drop.model,
        &classes,
        CsiMode::Perfect,
        settings.p_d,
        settings.trials,
        drop.trial_seed(),
        "perfect-csi",
    )
}
