use hybridfb::channel::complex_gaussian;
use hybridfb::numerics::{norm, principal_eigenpair};
use hybridfb::{dft_matrix, hermitian_eig, seed, solve_hpd, ComplexMatrix, C64};
use proptest::prelude::*;

fn random_matrix(rows: usize, cols: usize, s: u64) -> ComplexMatrix {
    let mut rng = seed::rng(s);
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(&mut rng))
}

fn random_hermitian(n: usize, s: u64) -> ComplexMatrix {
    let g = random_matrix(n, n, s);
    let mut a = g.matmul(&g.adjoint()).unwrap();
    a.add_to_diagonal(-(n as f64) / 2.0);
    a.hermitize();
    a
}

fn residual(a: &ComplexMatrix, v: &[C64], lambda: f64) -> f64 {
    let av = a.matvec(v).unwrap();
    let diff: Vec<C64> = av.iter().zip(v).map(|(x, y)| x - y * lambda).collect();
    norm(&diff)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigenpairs_are_orthonormal_and_accurate(n in 2usize..=40, s in any::<u64>()) {
        let a = random_hermitian(n, s);
        let e = hermitian_eig(&a).unwrap();
        let scale = a.frobenius_norm();
        for w in e.values.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        for (c, &l) in e.values.iter().enumerate() {
            let v = e.vectors.column(c);
            prop_assert!((norm(&v) - 1.0).abs() < 1e-12);
            prop_assert!(residual(&a, &v, l) < 1e-8 * scale);
        }
        let gram = e.vectors.adjoint().matmul(&e.vectors).unwrap();
        prop_assert!(gram.sub(&ComplexMatrix::identity(n)).frobenius_norm() < 1e-10);
    }

    #[test]
    fn eigen_is_bit_deterministic(n in 2usize..=16, s in any::<u64>()) {
        let a = random_hermitian(n, s);
        prop_assert_eq!(hermitian_eig(&a).unwrap(), hermitian_eig(&a).unwrap());
    }

    /// Rayleigh quotients of arbitrary vectors lie between the extreme eigenvalues.
    #[test]
    fn rayleigh_quotients_are_bracketed(n in 2usize..=24, s in any::<u64>()) {
        let a = random_hermitian(n, s);
        let e = hermitian_eig(&a).unwrap();
        let (hi, lo) = (e.values[0], e.values[n - 1]);
        let tol = 1e-10 * a.frobenius_norm();
        let probes = random_matrix(n, 20, s ^ 0xA5A5);
        for c in 0..20 {
            let v = probes.column(c);
            let q = a.quadratic_form(&v) / norm(&v).powi(2);
            prop_assert!(q <= hi + tol && q >= lo - tol);
        }
        prop_assert!((a.quadratic_form(&e.max_vector()) - hi).abs() < tol.max(1e-12));
    }

    #[test]
    fn principal_pair_agrees_with_full_decomposition(n in 2usize..=32, s in any::<u64>()) {
        let g = random_matrix(n, 3, s);
        let a = g.matmul(&g.adjoint()).unwrap();
        let (value, vector) = principal_eigenpair(&a).unwrap();
        let full = hermitian_eig(&a).unwrap();
        prop_assert!((value - full.max_value()).abs() < 1e-9 * full.max_value());
        prop_assert!(residual(&a, &vector, value) < 1e-8 * a.frobenius_norm());
    }

    #[test]
    fn hpd_solve_residual(n in 1usize..=32, rhs in 1usize..=4, s in any::<u64>()) {
        let g = random_matrix(n, n, s);
        let mut a = g.matmul(&g.adjoint()).unwrap();
        a.add_to_diagonal(0.1);
        let b = random_matrix(n, rhs, s.wrapping_add(1));
        let x = solve_hpd(&a, &b).unwrap();
        let r = a.matmul(&x).unwrap().sub(&b).frobenius_norm();
        prop_assert!(r < 1e-9 * a.frobenius_norm() * x.frobenius_norm().max(1.0));
    }
}

#[test]
fn dft_is_unitary() {
    for m in [1, 2, 8, 32, 128] {
        let v = dft_matrix(m).unwrap();
        let g = v.adjoint().matmul(&v).unwrap();
        assert!(g.sub(&ComplexMatrix::identity(m)).frobenius_norm() < 1e-10, "M = {m}");
    }
}

#[test]
fn dft_zero_phase_column() {
    let v = dft_matrix(8).unwrap();
    for r in 0..8 {
        assert!((v.column(3)[r] - C64::new(1.0 / 8f64.sqrt(), 0.0)).norm() < 1e-15);
    }
}
