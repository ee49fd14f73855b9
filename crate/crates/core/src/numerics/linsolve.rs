use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Relative pivot threshold below which a matrix is treated as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-14;

/// Lower-triangular Cholesky factor `A = L L^H`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: ComplexMatrix,
}

impl Cholesky {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                context: "cholesky (square input)",
                expected: a.rows(),
                got: a.cols(),
            });
        }
        if !a.is_finite() {
            return Err(Error::NonFinite("cholesky input"));
        }
        let n = a.rows();
        let threshold = SINGULARITY_THRESHOLD * a.frobenius_norm();
        let mut l = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN pivots fail too
            if !(d > threshold) {
                return Err(Error::Singular { pivot: d, threshold });
            }
            let djj = d.sqrt();
            l[(j, j)] = C64::new(djj, 0.0);
            for i in j + 1..n {
                let mut s = a[(i, j)];
                let (li, lj) = (l.row(i), l.row(j));
                for k in 0..j {
                    s -= li[k] * lj[k].conj();
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn lower(&self) -> &ComplexMatrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// Solves `L y = b` in place.
    pub fn forward(&self, b: &mut [C64]) {
        let n = self.dim();
        for i in 0..n {
            let row = self.l.row(i);
            let mut s = b[i];
            for k in 0..i {
                s -= row[k] * b[k];
            }
            b[i] = s / row[i].re;
        }
    }

    /// Solves `L^H x = y` in place.
    #[allow(clippy::needless_range_loop)]
    pub fn backward(&self, b: &mut [C64]) {
        let n = self.dim();
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[(k, i)].conj() * b[k];
            }
            b[i] = s / self.l[(i, i)].re;
        }
    }

    pub fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        x
    }

    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        if b.rows() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "cholesky solve",
                expected: self.dim(),
                got: b.rows(),
            });
        }
        let cols: Vec<Vec<C64>> = (0..b.cols()).map(|c| self.solve_vec(&b.column(c))).collect();
        ComplexMatrix::from_columns(&cols).map(|m| {
            if cols.is_empty() {
                ComplexMatrix::zeros(b.rows(), 0)
            } else {
                m
            }
        })
    }

    /// `L^{-1} N L^{-H}`, hermitized.
    pub fn whiten(&self, n_mat: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        // Y = L^{-1} N, column by column.
        let mut y = ComplexMatrix::zeros(n, n);
        for c in 0..n {
            let mut col = n_mat.column(c);
            self.forward(&mut col);
            for (r, z) in col.into_iter().enumerate() {
                y[(r, c)] = z;
            }
        }
        // W = L^{-1} Y^H, then W^H = Y L^{-H}; for Hermitian N, W is Hermitian.
        let mut w = ComplexMatrix::zeros(n, n);
        for c in 0..n {
            let mut col: Vec<C64> = (0..n).map(|r| y[(c, r)].conj()).collect();
            self.forward(&mut col);
            for (r, z) in col.into_iter().enumerate() {
                w[(r, c)] = z;
            }
        }
        w.hermitize();
        w
    }
}

/// Solves `A X = B` for Hermitian positive definite `A`.
pub fn solve_hpd(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    Cholesky::factor(a)?.solve(b)
}
