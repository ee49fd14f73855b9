//! Multipath ULA channels and their covariance.
//!
//! A user's channel is `h = P^{-1/2} * sum_p gamma_p a(theta_p)` with path
//! angles held fixed for a drop and `gamma_p ~ CN(0, 1)` redrawn per fading
//! realization. Covariances are conditional on the path angles.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{dft_column, inner, ComplexMatrix, C64};
use crate::seed;

/// Half-wavelength spacing, the only spacing the beam-domain model supports.
pub const HALF_WAVELENGTH: f64 = 0.5;

const DIRICHLET_SINGULARITY: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    pub antennas: usize,
    /// Element spacing over wavelength, `d / lambda`.
    pub spacing_ratio: f64,
}

impl ArrayConfig {
    pub fn new(antennas: usize, spacing_ratio: f64) -> Result<Self> {
        if antennas == 0 {
            return Err(Error::InvalidInput("antenna count must be at least 1".into()));
        }
        if !(spacing_ratio > 0.0 && spacing_ratio.is_finite()) {
            return Err(Error::InvalidInput(format!("spacing ratio must be positive, got {spacing_ratio}")));
        }
        Ok(Self { antennas, spacing_ratio })
    }

    pub fn half_wavelength(antennas: usize) -> Result<Self> {
        Self::new(antennas, HALF_WAVELENGTH)
    }

    fn require_dft_regime(&self) -> Result<()> {
        if (self.spacing_ratio - HALF_WAVELENGTH).abs() > 1e-12 {
            return Err(Error::Unsupported(format!(
                "beam-domain covariance requires d/lambda = 0.5, got {}",
                self.spacing_ratio
            )));
        }
        Ok(())
    }
}

/// Statistical geometry of one user: mean angle of arrival, angular spread and
/// number of paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularProfile {
    pub mean_aoa: f64,
    pub spread: f64,
    pub path_count: usize,
}

impl AngularProfile {
    pub fn new(mean_aoa: f64, spread: f64, path_count: usize) -> Result<Self> {
        if !(mean_aoa.is_finite() && (-FRAC_PI_2..=FRAC_PI_2).contains(&mean_aoa)) {
            return Err(Error::InvalidInput(format!("mean AoA {mean_aoa} outside [-pi/2, pi/2]")));
        }
        if !(spread >= 0.0 && spread.is_finite()) {
            return Err(Error::InvalidInput(format!("angular spread must be non-negative, got {spread}")));
        }
        if path_count == 0 {
            return Err(Error::InvalidInput("path count must be at least 1".into()));
        }
        Ok(Self {
            mean_aoa,
            spread,
            path_count,
        })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.mean_aoa - self.spread / 2.0, self.mean_aoa + self.spread / 2.0)
    }
}

/// Realized path angles (radians) for one drop.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub aoas: Vec<f64>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.aoas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aoas.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: Vec<C64>,
}

/// Spatial covariance and its beam-domain diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariancePair {
    /// `M x M` Hermitian PSD.
    pub spatial: ComplexMatrix,
    /// Per-beam average power, beam `t` at index `t - 1`.
    pub beam_diag: Vec<f64>,
}

impl CovariancePair {
    pub fn antennas(&self) -> usize {
        self.beam_diag.len()
    }

    /// Both parts multiplied by a large-scale gain.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            spatial: self.spatial.scaled(gain),
            beam_diag: self.beam_diag.iter().map(|x| x * gain).collect(),
        }
    }

    /// `V diag(beam_diag) V^H`, the beam-domain approximation of `spatial`.
    pub fn beam_domain_spatial(&self) -> ComplexMatrix {
        let m = self.antennas();
        let mut out = ComplexMatrix::zeros(m, m);
        for (t, &p) in self.beam_diag.iter().enumerate() {
            if p != 0.0 {
                out.add_outer(&dft_column(m, t + 1), p);
            }
        }
        out
    }
}

/// ULA response `a(theta)`: entry `m` is `exp(j 2 pi (d/lambda) m sin(theta))`.
pub fn steering_vector(cfg: &ArrayConfig, theta: f64) -> Vec<C64> {
    let k = 2.0 * PI * cfg.spacing_ratio * theta.sin();
    (0..cfg.antennas).map(|m| C64::from_polar(1.0, k * m as f64)).collect()
}

/// Draws `path_count` i.i.d. uniform angles on the profile's interval.
pub fn draw_paths(profile: &AngularProfile, seed: u64) -> PathSet {
    let mut rng = seed::rng(seed);
    let aoas = (0..profile.path_count)
        .map(|_| {
            let u: f64 = rng.gen();
            profile.mean_aoa + profile.spread * (u - 0.5)
        })
        .collect();
    PathSet { aoas }
}

/// Fast-fading generator for a fixed set of path angles.
///
/// Steering vectors are computed once; each draw costs `M * P` multiplies.
#[derive(Debug, Clone)]
pub struct ChannelGenerator {
    antennas: usize,
    /// Path-major: `P` steering vectors of length `M`, pre-scaled by `P^{-1/2}`.
    steering: Vec<Vec<C64>>,
}

impl ChannelGenerator {
    pub fn new(cfg: &ArrayConfig, paths: &PathSet) -> Self {
        let scale = 1.0 / (paths.len().max(1) as f64).sqrt();
        let steering = paths
            .aoas
            .iter()
            .map(|&th| steering_vector(cfg, th).into_iter().map(|z| z * scale).collect())
            .collect();
        Self {
            antennas: cfg.antennas,
            steering,
        }
    }

    pub fn path_count(&self) -> usize {
        self.steering.len()
    }

    /// Steering vectors scaled by `P^{-1/2}`, one per path. As columns they
    /// form a factor `F` of the covariance, `Phi = F F^H`.
    pub fn scaled_steering(&self) -> &[Vec<C64>] {
        &self.steering
    }

    /// Channel for explicit path gains.
    pub fn with_gains(&self, gains: &[C64]) -> ChannelRealization {
        let mut h = vec![C64::new(0.0, 0.0); self.antennas];
        for (a, g) in self.steering.iter().zip(gains) {
            for (hi, ai) in h.iter_mut().zip(a) {
                *hi += ai * g;
            }
        }
        ChannelRealization { h }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        let gains: Vec<C64> = (0..self.path_count()).map(|_| complex_gaussian(rng)).collect();
        self.with_gains(&gains)
    }
}

/// One `CN(0, 1)` sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn draw_channel(cfg: &ArrayConfig, paths: &PathSet, seed: u64) -> ChannelRealization {
    ChannelGenerator::new(cfg, paths).draw(&mut seed::rng(seed))
}

/// Squared Dirichlet ratio `|sin(M pi beta / 2) / sin(pi beta / 2)|^2`.
fn dirichlet_power(m: usize, beta: f64) -> f64 {
    let den = (0.5 * PI * beta).sin();
    if den.abs() < DIRICHLET_SINGULARITY {
        return (m * m) as f64;
    }
    let num = (0.5 * m as f64 * PI * beta).sin();
    (num / den).powi(2)
}

/// Beam-domain power of the path set in beam `t` (1-based).
pub fn beam_power(m: usize, paths: &PathSet, t: usize) -> f64 {
    let grid = 2.0 * t as f64 / m as f64 - 1.0;
    let total: f64 = paths
        .aoas
        .iter()
        .map(|th| dirichlet_power(m, th.sin() - grid))
        .sum();
    total / (m * paths.len()) as f64
}

/// Covariance conditioned on the path angles.
///
/// `beam_diag[t-1] = (1/(M P)) sum_p |sin(M pi beta/2) / sin(pi beta/2)|^2`
/// with `beta = sin(theta_p) - 2t/M + 1`, which equals `diag(V^H Phi V)`.
/// `spatial` is the exact expectation `(1/P) sum_p a(theta_p) a(theta_p)^H`.
pub fn analytical_beam_covariance(cfg: &ArrayConfig, paths: &PathSet) -> Result<CovariancePair> {
    cfg.require_dft_regime()?;
    if paths.is_empty() {
        return Err(Error::InvalidInput("path set is empty".into()));
    }
    let m = cfg.antennas;
    let beam_diag = (1..=m).map(|t| beam_power(m, paths, t)).collect();
    let mut spatial = ComplexMatrix::zeros(m, m);
    let w = 1.0 / paths.len() as f64;
    for &th in &paths.aoas {
        spatial.add_outer(&steering_vector(cfg, th), w);
    }
    Ok(CovariancePair { spatial, beam_diag })
}

/// `real(diag(V^H Phi V))` for an arbitrary spatial covariance.
pub fn beam_diagonal_of(spatial: &ComplexMatrix) -> Vec<f64> {
    let m = spatial.rows();
    (1..=m)
        .map(|t| {
            let v = dft_column(m, t);
            spatial.quadratic_form(&v)
        })
        .collect()
}

/// Sample covariance of `sample_count` fading realizations.
pub fn empirical_covariance(
    cfg: &ArrayConfig,
    paths: &PathSet,
    sample_count: usize,
    seed: u64,
) -> Result<CovariancePair> {
    if sample_count == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let gen = ChannelGenerator::new(cfg, paths);
    let mut rng = seed::rng(seed);
    let m = cfg.antennas;
    let mut spatial = ComplexMatrix::zeros(m, m);
    let w = 1.0 / sample_count as f64;
    for _ in 0..sample_count {
        let h = gen.draw(&mut rng);
        spatial.add_outer(&h.h, w);
    }
    spatial.hermitize();
    let beam_diag = beam_diagonal_of(&spatial);
    Ok(CovariancePair { spatial, beam_diag })
}

/// `(1/P) sum_p |V(:,t)^H a(theta_p)|^2`, computed by explicit inner products.
pub fn beam_power_by_projection(cfg: &ArrayConfig, paths: &PathSet, t: usize) -> f64 {
    let v = dft_column(cfg.antennas, t);
    let s: f64 = paths
        .aoas
        .iter()
        .map(|&th| inner(&v, &steering_vector(cfg, th)).norm_sqr())
        .sum();
    s / paths.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{hermitian_eig, norm_sqr};

    fn cfg(m: usize) -> ArrayConfig {
        ArrayConfig::half_wavelength(m).unwrap()
    }

    #[test]
    fn broadside_steering_is_all_ones() {
        let a = steering_vector(&cfg(6), 0.0);
        assert!(a.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn steering_closed_form_at_thirty_degrees() {
        let a = steering_vector(&cfg(4), PI / 6.0);
        for (m, z) in a.iter().enumerate() {
            let expected = C64::from_polar(1.0, PI * m as f64 / 2.0);
            assert!((z - expected).norm() < 1e-12);
        }
        assert!((norm_sqr(&a) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_spread_collapses_paths() {
        let p = AngularProfile::new(0.3, 0.0, 7).unwrap();
        let set = draw_paths(&p, 11);
        assert!(set.aoas.iter().all(|&a| a == 0.3));
    }

    #[test]
    fn draws_are_seed_deterministic() {
        let p = AngularProfile::new(-0.2, 0.3, 20).unwrap();
        assert_eq!(draw_paths(&p, 5), draw_paths(&p, 5));
        assert_ne!(draw_paths(&p, 5), draw_paths(&p, 6));
        let paths = draw_paths(&p, 5);
        assert_eq!(draw_channel(&cfg(8), &paths, 9), draw_channel(&cfg(8), &paths, 9));
    }

    #[test]
    fn paths_stay_in_interval() {
        let p = AngularProfile::new(1.4, 0.4, 500).unwrap();
        let (lo, hi) = p.interval();
        assert!(draw_paths(&p, 3).aoas.iter().all(|&a| a >= lo && a <= hi));
    }

    #[test]
    fn single_path_unit_gain_gives_steering_vector() {
        let gen = ChannelGenerator::new(&cfg(5), &PathSet { aoas: vec![0.0] });
        let h = gen.with_gains(&[C64::new(1.0, 0.0)]);
        assert!(h.h.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn scalar_channel_covariance() {
        let c = analytical_beam_covariance(&cfg(1), &PathSet { aoas: vec![0.4, -0.1] }).unwrap();
        assert!((c.beam_diag[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn on_grid_path_puts_all_power_in_one_beam() {
        let m = 16;
        for t0 in 1..m {
            let theta = (2.0 * t0 as f64 / m as f64 - 1.0).asin();
            let c = analytical_beam_covariance(&cfg(m), &PathSet { aoas: vec![theta] }).unwrap();
            for (t, &p) in c.beam_diag.iter().enumerate() {
                if t + 1 == t0 {
                    assert!((p - m as f64).abs() < 1e-9, "beam {t0}: {p}");
                } else {
                    assert!(p.abs() < 1e-9, "beam {} leak {p}", t + 1);
                }
            }
        }
    }

    #[test]
    fn dirichlet_formula_matches_projection() {
        let p = AngularProfile::new(0.7, 10f64.to_radians(), 20).unwrap();
        let paths = draw_paths(&p, 42);
        let c = analytical_beam_covariance(&cfg(32), &paths).unwrap();
        for t in 1..=32 {
            let direct = beam_power_by_projection(&cfg(32), &paths, t);
            assert!((c.beam_diag[t - 1] - direct).abs() < 1e-10);
        }
        let via_spatial = beam_diagonal_of(&c.spatial);
        for (a, b) in c.beam_diag.iter().zip(&via_spatial) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn other_spacings_are_rejected() {
        let c = ArrayConfig::new(8, 0.4).unwrap();
        assert!(matches!(
            analytical_beam_covariance(&c, &PathSet { aoas: vec![0.0] }),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn single_sample_covariance_is_rank_one() {
        let paths = draw_paths(&AngularProfile::new(0.1, 0.2, 20).unwrap(), 1);
        let c = empirical_covariance(&cfg(6), &paths, 1, 77).unwrap();
        let h = draw_channel(&cfg(6), &paths, 77);
        assert!(c.spatial.sub(&ComplexMatrix::outer(&h.h)).frobenius_norm() < 1e-12);
        let eig = hermitian_eig(&c.spatial).unwrap();
        assert!(eig.values[1].abs() < 1e-10 * eig.values[0]);
    }

    #[test]
    fn single_antenna_empirical_power_near_one() {
        let paths = draw_paths(&AngularProfile::new(0.0, 0.2, 20).unwrap(), 2);
        let c = empirical_covariance(&cfg(1), &paths, 20_000, 3).unwrap();
        assert!((c.beam_diag[0] - 1.0).abs() < 0.05);
    }

    #[test]
    fn invalid_profiles_are_rejected() {
        assert!(AngularProfile::new(2.0, 0.1, 1).is_err());
        assert!(AngularProfile::new(0.0, -0.1, 1).is_err());
        assert!(AngularProfile::new(0.0, 0.1, 0).is_err());
        assert!(ArrayConfig::new(0, 0.5).is_err());
        assert!(ArrayConfig::new(4, 0.0).is_err());
    }
}
