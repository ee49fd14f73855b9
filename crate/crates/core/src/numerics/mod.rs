//! Dense complex linear algebra: matrix type, Hermitian eigensolvers,
//! Cholesky solves and the DFT beam basis.

mod eigen;
mod linsolve;
mod matrix;

use std::f64::consts::PI;

pub use eigen::{hermitian_eig, principal_eigenpair, EigenResult};
pub use linsolve::{solve_hpd, Cholesky, SINGULARITY_THRESHOLD};
pub use matrix::{fix_phase, inner, norm, norm_sqr, normalized, ComplexMatrix, C64};

use crate::error::{Error, Result};

/// Column `t` (1-based) of the `M`-point DFT beam basis:
/// entry `m` is `exp(j*pi*m*(2t/M - 1)) / sqrt(M)`.
pub fn dft_column(m_antennas: usize, t: usize) -> Vec<C64> {
    let phase = 2.0 * t as f64 / m_antennas as f64 - 1.0;
    phase_ramp(m_antennas, phase)
}

/// Unit-norm vector with entries `exp(j*pi*m*phase) / sqrt(M)`.
pub fn phase_ramp(m_antennas: usize, phase: f64) -> Vec<C64> {
    let scale = 1.0 / (m_antennas as f64).sqrt();
    (0..m_antennas)
        .map(|m| C64::from_polar(scale, PI * m as f64 * phase))
        .collect()
}

/// The `M x M` unitary DFT matrix `V` whose columns are the virtual beams.
pub fn dft_matrix(m_antennas: usize) -> Result<ComplexMatrix> {
    if m_antennas == 0 {
        return Err(Error::InvalidInput("antenna count must be at least 1".into()));
    }
    let cols: Vec<Vec<C64>> = (1..=m_antennas).map(|t| dft_column(m_antennas, t)).collect();
    ComplexMatrix::from_columns(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_antenna_dft() {
        let v = dft_matrix(1).unwrap();
        assert!((v[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_phase_column_is_flat() {
        for m in [2usize, 4, 8, 16] {
            let v = dft_matrix(m).unwrap();
            let expected = 1.0 / (m as f64).sqrt();
            for r in 0..m {
                assert!((v[(r, m / 2 - 1)] - C64::new(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_zero_antennas() {
        assert!(dft_matrix(0).is_err());
    }
}
