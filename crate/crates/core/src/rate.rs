//! Sum-rate evaluation: Monte Carlo over fast fading, and the covariance-only
//! lower bound.
//!
//! Networks are described per link: `links[l][j][k]` is the channel from BS
//! `l` to user `k` of cell `j`. A single cell is the `L = 1` case, and every
//! single-cell entry point runs the network code with one cell.
//!
//! Rates are in bits/s/Hz (`log2`).

use std::sync::OnceLock;

use crate::channel::{ChannelGenerator, CovariancePair};
use crate::codebook::{predict_feedback, quantize, Codebook};
use crate::error::{Error, Result};
use crate::numerics::{inner, normalized, ComplexMatrix, C64};
use crate::precoder::{leakage_sum, PrecoderBank, PrecoderPlan, StatisticalCsi};
use crate::seed;

/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

/// Prediction-grid support of one user, in beam units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBounds {
    pub x_min: f64,
    pub x_max: f64,
}

impl GridBounds {
    /// `x_min = 1`, `x_max = M`.
    pub fn full_span(m: usize) -> Self {
        Self {
            x_min: 1.0,
            x_max: m as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UserClass {
    /// Feeds back quantized instantaneous CSI.
    I,
    /// Known to the BS through its covariance only.
    S,
}

impl UserClass {
    pub fn label(&self) -> &'static str {
        match self {
            Self::I => "I",
            Self::S => "S",
        }
    }
}

/// Class split of one cell's users (0-based user ids).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellClasses {
    pub class_i: Vec<usize>,
    pub class_s: Vec<usize>,
}

impl CellClasses {
    pub fn all_class_i(k: usize) -> Self {
        Self {
            class_i: (0..k).collect(),
            class_s: Vec::new(),
        }
    }

    pub fn all_class_s(k: usize) -> Self {
        Self {
            class_i: Vec::new(),
            class_s: (0..k).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.class_i.len() + self.class_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Both lists sorted ascending.
    pub fn canonical(&self) -> Self {
        let mut c = self.clone();
        c.class_i.sort_unstable();
        c.class_s.sort_unstable();
        c
    }

    /// Checks the split is a partition of `0..k`.
    pub fn validate(&self, k: usize) -> Result<()> {
        let mut seen = vec![false; k];
        for &u in self.class_i.iter().chain(&self.class_s) {
            if u >= k || seen[u] {
                return Err(Error::InvalidInput(format!("classes do not partition users 0..{k}")));
            }
            seen[u] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidInput(format!("classes do not cover users 0..{k}")));
        }
        Ok(())
    }
}

/// `|h^H w_self|^2 / (sum_{o != self} |h^H w_o|^2 + 1/p_d)`.
///
/// `precoders` holds every user's precoder; `target` indexes the user's own.
pub fn sinr_single_cell(h: &[C64], precoders: &[Vec<C64>], target: usize, p_d: f64) -> f64 {
    let signal = inner(h, &precoders[target]).norm_sqr();
    let mut interference = 0.0;
    for (o, w) in precoders.iter().enumerate() {
        if o != target {
            interference += inner(h, w).norm_sqr();
        }
    }
    signal / (interference + 1.0 / p_d)
}

// ---------------------------------------------------------------------------
// Covariance-only bound

/// Beam-domain covariances of every link, `[bs][cell][user]`, already scaled
/// by large-scale gain.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkBeams {
    links: Vec<Vec<Vec<Vec<f64>>>>,
    /// `inter_cell[l][t]`: total beam power BS `l` sends toward other cells'
    /// users in beam `t`. `None` for a single cell.
    inter_cell: Option<Vec<Vec<f64>>>,
}

impl NetworkBeams {
    pub fn new(links: Vec<Vec<Vec<Vec<f64>>>>) -> Result<Self> {
        let cells = links.len();
        if cells == 0 {
            return Err(Error::InvalidInput("network with no cells".into()));
        }
        let users: Vec<usize> = links[0].iter().map(Vec::len).collect();
        if users.len() != cells {
            return Err(Error::DimensionMismatch {
                context: "beam covariances per BS",
                expected: cells,
                got: users.len(),
            });
        }
        let m = links[0].iter().flatten().next().map(Vec::len).unwrap_or(0);
        if m == 0 {
            return Err(Error::InvalidInput("network with no users".into()));
        }
        for bs in &links {
            if bs.len() != cells || bs.iter().map(Vec::len).ne(users.iter().copied()) {
                return Err(Error::InvalidInput("inconsistent cell/user indexing".into()));
            }
            for beams in bs.iter().flatten() {
                if beams.len() != m {
                    return Err(Error::DimensionMismatch {
                        context: "beam covariance length",
                        expected: m,
                        got: beams.len(),
                    });
                }
                if beams.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidInput("beam covariance must be finite and non-negative".into()));
                }
            }
        }
        let inter_cell = (cells > 1).then(|| {
            (0..cells)
                .map(|l| {
                    let mut sum = vec![0.0; m];
                    for (j, cell) in links[l].iter().enumerate() {
                        if j == l {
                            continue;
                        }
                        for beams in cell {
                            for (s, b) in sum.iter_mut().zip(beams) {
                                *s += b;
                            }
                        }
                    }
                    sum
                })
                .collect()
        });
        Ok(Self { links, inter_cell })
    }

    pub fn single_cell(beams: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(vec![vec![beams]])
    }

    pub fn cells(&self) -> usize {
        self.links.len()
    }

    pub fn users_in(&self, cell: usize) -> usize {
        self.links[0][cell].len()
    }

    pub fn total_users(&self) -> usize {
        (0..self.cells()).map(|c| self.users_in(c)).sum()
    }

    pub fn antennas(&self) -> usize {
        self.links[0].iter().flatten().next().map_or(0, Vec::len)
    }

    pub fn link(&self, bs: usize, cell: usize, user: usize) -> &[f64] {
        &self.links[bs][cell][user]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEntry {
    pub cell: usize,
    pub user: usize,
    pub class: UserClass,
    /// 1-based DFT beam of the approximate precoder.
    pub beam: usize,
    pub sinr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// Cell-major, users ascending.
    pub entries: Vec<BoundEntry>,
    pub bound: f64,
}

/// Everything the bound needs besides the class split and the bit budget.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundProblem {
    pub beams: NetworkBeams,
    /// `[cell][user]`.
    pub grids: Vec<Vec<GridBounds>>,
    pub p_d: f64,
}

impl BoundProblem {
    /// Full-span prediction grids for every user.
    pub fn new(beams: NetworkBeams, p_d: f64) -> Result<Self> {
        let m = beams.antennas();
        let grids = (0..beams.cells())
            .map(|c| vec![GridBounds::full_span(m); beams.users_in(c)])
            .collect();
        Self::with_grids(beams, grids, p_d)
    }

    pub fn with_grids(beams: NetworkBeams, grids: Vec<Vec<GridBounds>>, p_d: f64) -> Result<Self> {
        if !(p_d > 0.0 && p_d.is_finite()) {
            return Err(Error::InvalidInput(format!("transmit power must be positive and finite, got {p_d}")));
        }
        if grids.len() != beams.cells() || (0..beams.cells()).any(|c| grids[c].len() != beams.users_in(c)) {
            return Err(Error::InvalidInput("grid bounds must be given for every user".into()));
        }
        Ok(Self { beams, grids, p_d })
    }

    /// Predicted feedback beam of every user at `bits` bits, `[cell][user]`.
    pub fn predict_all(&self, bits: u32) -> Result<Vec<Vec<usize>>> {
        (0..self.beams.cells())
            .map(|c| {
                (0..self.beams.users_in(c))
                    .map(|k| {
                        let g = self.grids[c][k];
                        predict_feedback(self.beams.link(c, c, k), bits, g.x_min, g.x_max).map(|p| p.beam_index)
                    })
                    .collect()
            })
            .collect()
    }

    /// Bound for a class split at `bits` bits per class-I user.
    pub fn evaluate(&self, classes: &[CellClasses], bits: u32) -> Result<BoundReport> {
        let any_class_i = classes.iter().any(|c| !c.class_i.is_empty());
        let predicted = if any_class_i {
            self.predict_all(bits)?
        } else {
            Vec::new()
        };
        self.evaluate_with(classes, &predicted)
    }

    /// Bound for a class split given precomputed predicted beams (only the
    /// class-I entries are read).
    pub fn evaluate_with(&self, classes: &[CellClasses], predicted: &[Vec<usize>]) -> Result<BoundReport> {
        let cells = self.beams.cells();
        if classes.len() != cells {
            return Err(Error::DimensionMismatch {
                context: "classes per cell",
                expected: cells,
                got: classes.len(),
            });
        }
        for (c, cls) in classes.iter().enumerate() {
            cls.validate(self.beams.users_in(c))?;
        }

        // Beam of every user's approximate precoder.
        let mut beam: Vec<Vec<usize>> = (0..cells).map(|c| vec![0; self.beams.users_in(c)]).collect();
        let mut class: Vec<Vec<UserClass>> = (0..cells).map(|c| vec![UserClass::I; self.beams.users_in(c)]).collect();
        for (l, cls) in classes.iter().enumerate() {
            let m_tilde: Vec<usize> = cls.class_i.iter().map(|&i| predicted[l][i]).collect();
            let own: Vec<&[f64]> = cls.class_s.iter().map(|&n| self.beams.link(l, l, n)).collect();
            let extra = self.beams.inter_cell.as_ref().map(|v| v[l].as_slice());
            let idx = crate::precoder::approx_precoder_indices(&own, &m_tilde, extra, self.p_d)?;
            for (&i, &b) in cls.class_i.iter().zip(&idx.class_i) {
                beam[l][i] = b;
            }
            for (&n, &b) in cls.class_s.iter().zip(&idx.class_s) {
                beam[l][n] = b;
                class[l][n] = UserClass::S;
            }
        }

        let noise = 1.0 / self.p_d;
        let mut entries = Vec::with_capacity(self.beams.total_users());
        let mut bound = 0.0;
        for j in 0..cells {
            for k in 0..self.beams.users_in(j) {
                let own = self.beams.link(j, j, k);
                let signal = own[beam[j][k] - 1];
                let mut interference = 0.0;
                for (o, &b) in beam[j].iter().enumerate() {
                    if o != k {
                        interference += own[b - 1];
                    }
                }
                for l in (0..cells).filter(|&l| l != j) {
                    let cross = self.beams.link(l, j, k);
                    for &b in &beam[l] {
                        interference += cross[b - 1];
                    }
                }
                let sinr = signal / (interference + noise);
                bound += (1.0 + sinr).log2();
                entries.push(BoundEntry {
                    cell: j,
                    user: k,
                    class: class[j][k],
                    beam: beam[j][k],
                    sinr,
                });
            }
        }
        Ok(BoundReport { entries, bound })
    }
}

/// Single-cell bound with full-span prediction grids.
pub fn sum_rate_lower_bound(beams: &[Vec<f64>], classes: &CellClasses, p_d: f64, bits: u32) -> Result<BoundReport> {
    BoundProblem::new(NetworkBeams::single_cell(beams.to_vec())?, p_d)?.evaluate(std::slice::from_ref(classes), bits)
}

/// Network bound with full-span prediction grids.
pub fn multicell_bound(beams: &NetworkBeams, classes: &[CellClasses], p_d: f64, bits: u32) -> Result<BoundReport> {
    BoundProblem::new(beams.clone(), p_d)?.evaluate(classes, bits)
}

// ---------------------------------------------------------------------------
// Monte Carlo

/// One BS-to-user link: fading generator, large-scale gain `s` (the channel
/// is `sqrt(s) h`), and the gain-scaled covariance.
#[derive(Debug, Clone)]
pub struct Link {
    pub generator: ChannelGenerator,
    pub gain: f64,
    pub covariance: CovariancePair,
    statistical: OnceLock<StatisticalCsi>,
}

impl Link {
    pub fn new(generator: ChannelGenerator, gain: f64, covariance: CovariancePair) -> Self {
        Self {
            generator,
            gain,
            covariance,
            statistical: OnceLock::new(),
        }
    }

    /// Covariance with its steering-vector factor, built on first use.
    pub fn statistical(&self) -> Result<&StatisticalCsi> {
        if let Some(s) = self.statistical.get() {
            return Ok(s);
        }
        let root = self.gain.sqrt();
        let cols: Vec<Vec<C64>> = self
            .generator
            .scaled_steering()
            .iter()
            .map(|a| a.iter().map(|z| z * root).collect())
            .collect();
        let csi = StatisticalCsi::from_factor(self.covariance.spatial.clone(), ComplexMatrix::from_columns(&cols)?)?;
        Ok(self.statistical.get_or_init(|| csi))
    }
}

/// Every link of a drop, `[bs][cell][user]`.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    pub antennas: usize,
    pub links: Vec<Vec<Vec<Link>>>,
}

impl NetworkModel {
    pub fn cells(&self) -> usize {
        self.links.len()
    }

    pub fn users_in(&self, cell: usize) -> usize {
        self.links[0][cell].len()
    }

    pub fn total_users(&self) -> usize {
        (0..self.cells()).map(|c| self.users_in(c)).sum()
    }

    pub fn link(&self, bs: usize, cell: usize, user: usize) -> &Link {
        &self.links[bs][cell][user]
    }

    pub fn beams(&self) -> Result<NetworkBeams> {
        NetworkBeams::new(
            self.links
                .iter()
                .map(|bs| {
                    bs.iter()
                        .map(|cell| cell.iter().map(|l| l.covariance.beam_diag.clone()).collect())
                        .collect()
                })
                .collect(),
        )
    }

    /// Covariances of other cells' users as seen from BS `l`, in cell/user
    /// order.
    pub fn cross_covariances(&self, l: usize) -> Vec<ComplexMatrix> {
        let mut out = Vec::new();
        for (j, cell) in self.links[l].iter().enumerate() {
            if j != l {
                out.extend(cell.iter().map(|link| link.covariance.spatial.clone()));
            }
        }
        out
    }
}

/// How class-I users' feedback is formed.
#[derive(Debug, Clone, Copy)]
pub enum CsiMode<'a> {
    /// Quantized against the given codebooks, `[cell][position in class_i]`.
    Quantized(&'a [Vec<&'a Codebook>]),
    /// Unquantized direction `h / |h|`.
    Perfect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Cell-major, users ascending.
    pub per_user_rates: Vec<f64>,
    pub sum_rate: f64,
    pub trials: usize,
    pub seed: u64,
    pub scheme: String,
    /// 95% half-width of the sum-rate mean.
    pub ci95: f64,
}

impl RateReport {
    pub const CSV_HEADER: &'static str = "scheme,p_d_dB,K,B_total,M,sum_rate,ci95,trials,seed";

    pub fn csv_row(&self, p_d_db: f64, k: usize, b_total: u32, m: usize) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.6},{},{}",
            self.scheme, p_d_db, k, b_total, m, self.sum_rate, self.ci95, self.trials, self.seed
        )
    }
}

/// Seed of the fading draw on link `(bs, cell, user)` in `trial`.
///
/// It does not depend on the class split, so different schemes evaluated
/// with the same seed see the same channels.
pub fn trial_link_seed(base: u64, trial: usize, bs: usize, cell: usize, user: usize) -> u64 {
    let t = seed::derive(base, trial as u64);
    seed::derive(seed::derive(seed::derive(t, bs as u64), cell as u64), user as u64)
}

/// Draws every link's channel for one trial, `[bs][cell][user]`.
pub fn draw_trial(model: &NetworkModel, base: u64, trial: usize) -> Vec<Vec<Vec<Vec<C64>>>> {
    model
        .links
        .iter()
        .enumerate()
        .map(|(l, bs)| {
            bs.iter()
                .enumerate()
                .map(|(j, cell)| {
                    cell.iter()
                        .enumerate()
                        .map(|(k, link)| {
                            let mut rng = seed::rng(trial_link_seed(base, trial, l, j, k));
                            let root = link.gain.sqrt();
                            let mut h = link.generator.draw(&mut rng).h;
                            if root != 1.0 {
                                for z in h.iter_mut() {
                                    *z *= root;
                                }
                            }
                            h
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Ergodic rates of a network under hybrid feedback, by Monte Carlo.
///
/// Each trial redraws fading on every link, forms class-I feedback, builds
/// the per-cell SLNR precoders (with inter-cell leakage when `L > 1`), and
/// accumulates `log2(1 + SINR)` for every user.
pub fn monte_carlo(
    model: &NetworkModel,
    classes: &[CellClasses],
    csi: CsiMode<'_>,
    p_d: f64,
    trials: usize,
    seed: u64,
    scheme: &str,
) -> Result<RateReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let cells = model.cells();
    if classes.len() != cells {
        return Err(Error::DimensionMismatch {
            context: "classes per cell",
            expected: cells,
            got: classes.len(),
        });
    }
    for (c, cls) in classes.iter().enumerate() {
        cls.validate(model.users_in(c))?;
    }
    if let CsiMode::Quantized(books) = csi {
        if books.len() != cells || books.iter().zip(classes).any(|(b, c)| b.len() != c.class_i.len()) {
            return Err(Error::InvalidInput("one codebook is required per class-I user".into()));
        }
    }

    let mut plans = Vec::with_capacity(cells);
    for (l, cls) in classes.iter().enumerate() {
        let statistical = cls
            .class_s
            .iter()
            .map(|&n| model.link(l, l, n).statistical().cloned())
            .collect::<Result<Vec<_>>>()?;
        let leakage = leakage_sum(&model.cross_covariances(l))?;
        plans.push(PrecoderPlan::new(model.antennas, &statistical, leakage.as_ref(), p_d)?);
    }
    // Cells without class-I users have trial-independent precoders.
    let fixed: Vec<Option<PrecoderBank>> = plans
        .iter()
        .zip(classes)
        .map(|(plan, cls)| cls.class_i.is_empty().then(|| plan.precoders(&[])).transpose())
        .collect::<Result<_>>()?;

    let total = model.total_users();
    let mut rate_sums = vec![0.0; total];
    let mut sum_samples = Vec::with_capacity(trials);
    let noise = 1.0 / p_d;

    for t in 0..trials {
        let g = draw_trial(model, seed, t);
        // Precoders per cell, indexed by user id.
        let mut w: Vec<Vec<Vec<C64>>> = Vec::with_capacity(cells);
        for (l, cls) in classes.iter().enumerate() {
            let bank = match &fixed[l] {
                Some(b) => b.clone(),
                None => {
                    let feedback = cls
                        .class_i
                        .iter()
                        .enumerate()
                        .map(|(pos, &i)| {
                            let h = &g[l][l][i];
                            match csi {
                                CsiMode::Quantized(books) => quantize(h, books[l][pos]).map(|q| q.word),
                                CsiMode::Perfect => normalized(h).ok_or(Error::NonFinite("zero channel")),
                            }
                        })
                        .collect::<Result<Vec<_>>>()?;
                    plans[l].precoders(&feedback)?
                }
            };
            let mut by_user = vec![Vec::new(); model.users_in(l)];
            for (&i, wi) in cls.class_i.iter().zip(bank.class_i) {
                by_user[i] = wi;
            }
            for (&n, wn) in cls.class_s.iter().zip(bank.class_s) {
                by_user[n] = wn;
            }
            w.push(by_user);
        }

        let mut flat = 0;
        let mut trial_sum = 0.0;
        for j in 0..cells {
            for k in 0..model.users_in(j) {
                let h = &g[j][j][k];
                let signal = inner(h, &w[j][k]).norm_sqr();
                let mut interference = 0.0;
                for (o, wo) in w[j].iter().enumerate() {
                    if o != k {
                        interference += inner(h, wo).norm_sqr();
                    }
                }
                for l in (0..cells).filter(|&l| l != j) {
                    let cross = &g[l][j][k];
                    for wt in &w[l] {
                        interference += inner(cross, wt).norm_sqr();
                    }
                }
                let r = (1.0 + signal / (interference + noise)).log2();
                rate_sums[flat] += r;
                trial_sum += r;
                flat += 1;
            }
        }
        sum_samples.push(trial_sum);
    }

    let n = trials as f64;
    let per_user_rates: Vec<f64> = rate_sums.iter().map(|s| s / n).collect();
    let sum_rate = per_user_rates.iter().sum();
    Ok(RateReport {
        per_user_rates,
        sum_rate,
        trials,
        seed,
        scheme: scheme.to_string(),
        ci95: ci95(&sum_samples),
    })
}

/// Single-cell Monte Carlo; `codebooks` follows `classes.class_i`.
pub fn monte_carlo_sum_rate(
    model: &NetworkModel,
    classes: &CellClasses,
    codebooks: &[&Codebook],
    p_d: f64,
    trials: usize,
    seed: u64,
    scheme: &str,
) -> Result<RateReport> {
    if model.cells() != 1 {
        return Err(Error::InvalidInput("single-cell evaluation of a multi-cell model".into()));
    }
    let books = [codebooks.to_vec()];
    monte_carlo(model, std::slice::from_ref(classes), CsiMode::Quantized(&books), p_d, trials, seed, scheme)
}

/// `1.96 * sd / sqrt(n)` with the unbiased sample deviation; zero for one sample.
pub fn ci95(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Z95 * var.sqrt() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lone_user_sinr_is_snr_times_gain() {
        let h = vec![C64::new(1.0, 1.0), C64::new(0.0, 2.0)];
        let w = normalized(&h).unwrap();
        let s = sinr_single_cell(&h, &[w], 0, 5.0);
        assert!((s - 5.0 * 6.0).abs() < 1e-12);
    }

    #[test]
    fn null_beam_gives_zero_sinr() {
        let h = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let w = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        assert_eq!(sinr_single_cell(&h, &[w], 0, 5.0), 0.0);
    }

    #[test]
    fn ci_of_constant_samples_is_zero() {
        assert_eq!(ci95(&[2.0; 10]), 0.0);
        assert_eq!(ci95(&[1.0]), 0.0);
        let c = ci95(&[1.0, 3.0]);
        assert!((c - 1.96 * 2f64.sqrt() / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lone_class_i_bound() {
        let beams = vec![vec![0.0, 4.0, 0.0, 0.0]];
        let r = sum_rate_lower_bound(&beams, &CellClasses::all_class_i(1), 10.0, 2).unwrap();
        assert_eq!(r.entries[0].beam, 2);
        assert!((r.bound - (1.0f64 + 40.0).log2()).abs() < 1e-12);
    }

    #[test]
    fn colliding_statistical_users() {
        let g = 3.0;
        let beams = vec![vec![0.0, g, 0.0], vec![0.0, g, 0.0]];
        let p_d = 2.0;
        let r = sum_rate_lower_bound(&beams, &CellClasses::all_class_s(2), p_d, 0).unwrap();
        for e in &r.entries {
            assert!((e.sinr - g / (g + 1.0 / p_d)).abs() < 1e-12);
            assert!(e.sinr < 1.0);
        }
    }

    #[test]
    fn classes_must_partition() {
        let c = CellClasses {
            class_i: vec![0, 1],
            class_s: vec![1],
        };
        assert!(c.validate(2).is_err());
        assert!(CellClasses::all_class_i(3).validate(3).is_ok());
        assert!(CellClasses::all_class_i(2).validate(3).is_err());
    }

    #[test]
    fn csv_row_layout() {
        let r = RateReport {
            per_user_rates: vec![1.0, 2.5],
            sum_rate: 3.5,
            trials: 10,
            seed: 42,
            scheme: "proposed".into(),
            ci95: 0.25,
        };
        assert_eq!(r.csv_row(10.0, 2, 16, 32), "proposed,10,2,16,32,3.500000,0.250000,10,42");
    }
}
