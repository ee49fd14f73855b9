use std::f64::consts::FRAC_PI_2;

use hybridfb::channel::{beam_power_by_projection, ChannelGenerator};
use hybridfb::codebook::{dft_codebook, quantize, skewed_codebook};
use hybridfb::numerics::norm_sqr;
use hybridfb::{
    analytical_beam_covariance, draw_paths, empirical_covariance, hermitian_eig, seed, AngularProfile, ArrayConfig,
};
use proptest::prelude::*;

fn profile_strategy() -> impl Strategy<Value = (f64, f64, usize)> {
    (-FRAC_PI_2..FRAC_PI_2, 0.0f64..0.6, 1usize..=30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beam_powers_sum_to_array_size(
        m in prop::sample::select(vec![8usize, 16, 32, 128]),
        (mean, spread, p) in profile_strategy(),
        s in any::<u64>(),
    ) {
        let cfg = ArrayConfig::half_wavelength(m).unwrap();
        let paths = draw_paths(&AngularProfile::new(mean, spread, p).unwrap(), s);
        let cov = analytical_beam_covariance(&cfg, &paths).unwrap();
        let total: f64 = cov.beam_diag.iter().sum();
        prop_assert!((total - m as f64).abs() < 1e-6 * m as f64);
        prop_assert!((cov.spatial.trace().re - m as f64).abs() < 1e-9 * m as f64);
        prop_assert!(cov.beam_diag.iter().all(|&x| x >= -1e-12));
    }

    /// The closed form against explicit projections onto the DFT columns.
    #[test]
    fn closed_form_matches_projection(
        m in 2usize..=40,
        (mean, spread, p) in profile_strategy(),
        s in any::<u64>(),
    ) {
        let cfg = ArrayConfig::half_wavelength(m).unwrap();
        let paths = draw_paths(&AngularProfile::new(mean, spread, p).unwrap(), s);
        let cov = analytical_beam_covariance(&cfg, &paths).unwrap();
        for t in 1..=m {
            prop_assert!((cov.beam_diag[t - 1] - beam_power_by_projection(&cfg, &paths, t)).abs() < 1e-10);
        }
    }

    #[test]
    fn spatial_covariance_is_psd(m in 2usize..=24, (mean, spread, p) in profile_strategy(), s in any::<u64>()) {
        let cfg = ArrayConfig::half_wavelength(m).unwrap();
        let paths = draw_paths(&AngularProfile::new(mean, spread, p).unwrap(), s);
        for cov in [analytical_beam_covariance(&cfg, &paths).unwrap(), empirical_covariance(&cfg, &paths, 50, s).unwrap()] {
            prop_assert!(cov.spatial.hermitian_deviation() < 1e-12);
            let min = *hermitian_eig(&cov.spatial).unwrap().values.last().unwrap();
            prop_assert!(min >= -1e-10 * cov.spatial.trace().re);
        }
    }

    #[test]
    fn paths_stay_in_their_interval((mean, spread, p) in profile_strategy(), s in any::<u64>()) {
        let profile = AngularProfile::new(mean, spread, p).unwrap();
        let (lo, hi) = profile.interval();
        let paths = draw_paths(&profile, s);
        prop_assert_eq!(paths.len(), p);
        prop_assert!(paths.aoas.iter().all(|&a| a >= lo && a <= hi));
    }
}

#[test]
fn empirical_covariance_converges_to_analytical() {
    let cfg = ArrayConfig::half_wavelength(16).unwrap();
    for (i, mean) in [-0.9, 0.0, 0.4].into_iter().enumerate() {
        let paths = draw_paths(&AngularProfile::new(mean, 10f64.to_radians(), 20).unwrap(), 11 + i as u64);
        let exact = analytical_beam_covariance(&cfg, &paths).unwrap();
        let sample = empirical_covariance(&cfg, &paths, 10_000, 99 + i as u64).unwrap();
        let rel = sample.spatial.sub(&exact.spatial).frobenius_norm() / exact.spatial.frobenius_norm();
        assert!(rel < 0.1, "mean {mean}: relative error {rel}");
    }
}

#[test]
fn average_channel_energy_is_array_size() {
    let cfg = ArrayConfig::half_wavelength(32).unwrap();
    let paths = draw_paths(&AngularProfile::new(0.3, 10f64.to_radians(), 20).unwrap(), 5);
    let gen = ChannelGenerator::new(&cfg, &paths);
    let mut rng = seed::rng(6);
    let n = 10_000;
    let mean = (0..n).map(|_| norm_sqr(&gen.draw(&mut rng).h) / 32.0).sum::<f64>() / n as f64;
    assert!((0.97..=1.03).contains(&mean), "mean energy per antenna {mean}");
}

/// With one path per draw, the AoA is uniform on the interval, so its sample
/// mean over 1e5 draws sits within 3 standard errors of the centre.
#[test]
fn path_angle_mean_is_centered() {
    let (mean, spread) = (0.25, 10f64.to_radians());
    let profile = AngularProfile::new(mean, spread, 1).unwrap();
    let n = 100_000;
    let avg = (0..n).map(|i| draw_paths(&profile, seed::derive(3, i)).aoas[0]).sum::<f64>() / n as f64;
    let se = spread / 12f64.sqrt() / (n as f64).sqrt();
    assert!((avg - mean).abs() < 3.0 * se, "mean {avg}, expected {mean} +/- {}", 3.0 * se);
}

#[test]
fn alignment_grows_with_bits_and_skewed_beats_dft() {
    let cfg = ArrayConfig::half_wavelength(32).unwrap();
    let books: Vec<_> = (1..=6).map(|b| dft_codebook(32, b).unwrap()).collect();
    let mut rng = seed::rng(8);
    let (mut skewed, mut dft) = (0.0, 0.0);
    for u in 0..40u64 {
        let paths = draw_paths(&AngularProfile::new(-1.2 + 0.06 * u as f64, 10f64.to_radians(), 20).unwrap(), u);
        let cov = analytical_beam_covariance(&cfg, &paths).unwrap();
        let sk = skewed_codebook(&cov, 4, u).unwrap();
        let gen = ChannelGenerator::new(&cfg, &paths);
        for _ in 0..5 {
            let h = gen.draw(&mut rng).h;
            let a: Vec<f64> = books.iter().map(|b| quantize(&h, b).unwrap().alignment).collect();
            // DFT books are nested, so alignment cannot drop as bits grow.
            assert!(a.windows(2).all(|w| w[1] >= w[0]));
            assert!(a.iter().all(|x| (0.0..=1.0 + 1e-12).contains(x)));
            dft += a[3];
            skewed += quantize(&h, &sk).unwrap().alignment;
        }
    }
    assert!(skewed > dft, "skewed {skewed} vs dft {dft}");
}
