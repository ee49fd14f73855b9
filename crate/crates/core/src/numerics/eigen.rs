//! Hermitian eigensolvers.
//!
//! [`hermitian_eig`] returns the full spectrum via cyclic complex Jacobi.
//! [`principal_eigenpair`] computes only the dominant pair through Householder
//! tridiagonalization, Sturm bisection and inverse iteration. It is roughly an
//! order of magnitude cheaper and is what the precoders call per trial; the two
//! are cross-checked in tests.

use super::matrix::{fix_phase, normalized, ComplexMatrix, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const CONVERGENCE: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Non-increasing.
    pub values: Vec<f64>,
    /// Unit-norm eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl EigenResult {
    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    pub fn max_vector(&self) -> Vec<C64> {
        self.vectors.column(0)
    }
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "hermitian eigensolver (square input)",
            expected: a.rows(),
            got: a.cols(),
        });
    }
    if a.rows() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("hermitian eigensolver input"));
    }
    let deviation = a.hermitian_deviation();
    if deviation > HERMITIAN_TOL * a.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted non-increasing (stable, so equal values keep their
/// diagonal order) and every eigenvector has its largest-magnitude entry made
/// real and non-negative.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<EigenResult> {
    check_hermitian(a)?;
    let n = a.rows();
    let mut w = a.clone();
    w.hermitize();
    let mut v = ComplexMatrix::identity(n);
    let tol = CONVERGENCE * w.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += w[(p, q)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(j, j)].re.total_cmp(&w[(i, i)].re));
    let values = order.iter().map(|&i| w[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        if let Some(unit) = normalized(&col) {
            col = unit;
        }
        fix_phase(&mut col);
        for (r, z) in col.into_iter().enumerate() {
            vectors[(r, dst)] = z;
        }
    }
    Ok(EigenResult { values, vectors })
}

/// One complex Jacobi rotation annihilating `w[p][q]`.
fn rotate(w: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = w[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let tau = (w[(q, q)].re - w[(p, p)].re) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // J = diag(1, conj(phase)) * [[c, s], [-s, c]] on the (p, q) plane.
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    let n = w.rows();
    for k in 0..n {
        let akp = w[(k, p)];
        let akq = w[(k, q)];
        w[(k, p)] = akp * jpp + akq * jqp;
        w[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = w[(p, k)];
        let aqk = w[(q, k)];
        w[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        w[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    w[(p, q)] = C64::new(0.0, 0.0);
    w[(q, p)] = C64::new(0.0, 0.0);
    w[(p, p)] = C64::new(w[(p, p)].re, 0.0);
    w[(q, q)] = C64::new(w[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// Householder reduction `A = Q D S D^H Q^H` with `S` real symmetric
/// tridiagonal and `D` a diagonal of unit phases.
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    phases: Vec<C64>,
    reflectors: Vec<(usize, Vec<C64>, f64)>,
}

fn tridiagonalize(a: &ComplexMatrix) -> Tridiagonal {
    let n = a.rows();
    let mut w = a.clone();
    w.hermitize();
    let mut reflectors = Vec::new();
    let mut sub = vec![C64::new(0.0, 0.0); n.saturating_sub(1)];

    for k in 0..n.saturating_sub(1) {
        let x: Vec<C64> = (k + 1..n).map(|r| w[(r, k)]).collect();
        let alpha = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if x.len() == 1 || alpha == 0.0 {
            sub[k] = x[0];
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let beta = -phase * alpha;
        let mut u = x;
        u[0] = x0 - beta;
        let unorm2: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        if unorm2 == 0.0 {
            sub[k] = x0;
            continue;
        }
        let tau = 2.0 / unorm2;
        let m = n - k - 1;
        // p = tau * A22 u
        let mut p = vec![C64::new(0.0, 0.0); m];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = w.row(k + 1 + i);
            let mut s = C64::new(0.0, 0.0);
            for (j, uj) in u.iter().enumerate() {
                s += row[k + 1 + j] * uj;
            }
            *pi = s * tau;
        }
        let uhp: C64 = u.iter().zip(&p).map(|(a, b)| a.conj() * b).sum();
        let kk = 0.5 * tau * uhp.re;
        let qv: Vec<C64> = p.iter().zip(&u).map(|(pi, ui)| pi - ui * kk).collect();
        for i in 0..m {
            for j in 0..m {
                let delta = u[i] * qv[j].conj() + qv[i] * u[j].conj();
                w[(k + 1 + i, k + 1 + j)] -= delta;
            }
        }
        sub[k] = beta;
        for r in k + 2..n {
            w[(r, k)] = C64::new(0.0, 0.0);
            w[(k, r)] = C64::new(0.0, 0.0);
        }
        reflectors.push((k + 1, u, tau));
    }

    let diag: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    let mut phases = vec![C64::new(1.0, 0.0); n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for i in 0..n.saturating_sub(1) {
        let t = sub[i];
        off[i] = t.norm();
        phases[i + 1] = if off[i] > 0.0 { phases[i] * (t / off[i]) } else { phases[i] };
    }
    Tridiagonal {
        diag,
        off,
        phases,
        reflectors,
    }
}

/// Number of eigenvalues of the symmetric tridiagonal strictly below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn largest_tridiagonal_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * scale);
    lo -= f64::EPSILON * scale;
    hi += f64::EPSILON * scale;
    // invariant: lo <= lambda_max < hi
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * scale {
            break;
        }
        if sturm_count(diag, off, mid, pivmin) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Inverse iteration for the eigenvector of a symmetric tridiagonal matrix
/// at a (near-)exact eigenvalue `shift`.
fn tridiagonal_eigenvector(diag: &[f64], off: &[f64], shift: f64) -> Vec<f64> {
    let n = diag.len();
    if n == 1 {
        return vec![1.0];
    }
    let scale = diag
        .iter()
        .map(|d| d.abs())
        .chain(off.iter().map(|e| e.abs()))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * scale;

    // LU with partial pivoting of (S - shift I), LAPACK gttrf layout.
    let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
    let mut dl = off.to_vec();
    let mut du = off.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut swapped = vec![false; n - 1];
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let f = dl[i] / d[i];
            dl[i] = f;
            d[i + 1] -= f * du[i];
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = f;
            let tmp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = tmp - f * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -f;
            }
            swapped[i] = true;
        }
    }
    for x in d.iter_mut() {
        if x.abs() < tiny {
            *x = if *x < 0.0 { -tiny } else { tiny };
        }
    }

    // Deterministic start vector with no special symmetry.
    let mut b: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
        .collect();
    for _ in 0..3 {
        for i in 0..n - 1 {
            if swapped[i] {
                let tmp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = tmp - dl[i] * b[i];
            } else {
                b[i + 1] -= dl[i] * b[i];
            }
        }
        b[n - 1] /= d[n - 1];
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
        }
        let nrm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm == 0.0 || !nrm.is_finite() {
            break;
        }
        for x in b.iter_mut() {
            *x /= nrm;
        }
    }
    b
}

/// Dominant eigenvalue and unit eigenvector of a Hermitian matrix.
///
/// The returned vector follows the same phase convention as
/// [`hermitian_eig`].
pub fn principal_eigenpair(a: &ComplexMatrix) -> Result<(f64, Vec<C64>)> {
    check_hermitian(a)?;
    let n = a.rows();
    if n == 1 {
        return Ok((a[(0, 0)].re, vec![C64::new(1.0, 0.0)]));
    }
    let tri = tridiagonalize(a);
    let lambda = largest_tridiagonal_eigenvalue(&tri.diag, &tri.off);
    let s = tridiagonal_eigenvector(&tri.diag, &tri.off, lambda);
    let mut y: Vec<C64> = s.iter().zip(&tri.phases).map(|(&si, ph)| ph * si).collect();
    for (start, u, tau) in tri.reflectors.iter().rev() {
        let seg = &mut y[*start..];
        let dot: C64 = u.iter().zip(seg.iter()).map(|(ui, yi)| ui.conj() * yi).sum();
        let f = dot * *tau;
        for (yi, ui) in seg.iter_mut().zip(u) {
            *yi -= ui * f;
        }
    }
    let mut v = normalized(&y).ok_or(Error::NonFinite("principal eigenvector"))?;
    fix_phase(&mut v);
    Ok((lambda, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let r = hermitian_eig(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(r.values, vec![1.0, 1.0, 1.0]);
        assert_eq!(r.vectors, ComplexMatrix::identity(3));
    }

    #[test]
    fn diagonal_case() {
        let a = ComplexMatrix::from_real_diagonal(&[3.0, 1.0]);
        let r = hermitian_eig(&a).unwrap();
        assert_eq!(r.values, vec![3.0, 1.0]);
        assert_eq!(r.max_vector(), vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let (l, v) = principal_eigenpair(&a).unwrap();
        assert!((l - 3.0).abs() < 1e-14);
        assert!((v[0] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ascending_diagonal_is_reordered() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 5.0, 2.0]);
        let r = hermitian_eig(&a).unwrap();
        assert_eq!(r.values, vec![5.0, 2.0, 1.0]);
        assert_eq!(r.vectors[(1, 0)], c(1.0, 0.0));
    }

    #[test]
    fn two_by_two_complex() {
        // [[2, i], [-i, 2]] has eigenvalues 3 and 1.
        let a = ComplexMatrix::from_row_major(2, 2, vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]).unwrap();
        let r = hermitian_eig(&a).unwrap();
        assert!((r.values[0] - 3.0).abs() < 1e-14);
        assert!((r.values[1] - 1.0).abs() < 1e-14);
        let (l, v) = principal_eigenpair(&a).unwrap();
        assert!((l - 3.0).abs() < 1e-13);
        let av = a.matvec(&v).unwrap();
        for (x, y) in av.iter().zip(&v) {
            assert!((x - y * 3.0).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_hermitian_and_non_finite() {
        let a = ComplexMatrix::from_row_major(2, 2, vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(hermitian_eig(&a), Err(Error::NotHermitian { .. })));
        let b = ComplexMatrix::from_real_diagonal(&[f64::NAN, 1.0]);
        assert!(matches!(hermitian_eig(&b), Err(Error::NonFinite(_))));
        assert!(matches!(principal_eigenpair(&b), Err(Error::NonFinite(_))));
    }

    #[test]
    fn one_by_one() {
        let a = ComplexMatrix::from_real_diagonal(&[-2.5]);
        let r = hermitian_eig(&a).unwrap();
        assert_eq!(r.values, vec![-2.5]);
        assert_eq!(principal_eigenpair(&a).unwrap().0, -2.5);
    }
}
