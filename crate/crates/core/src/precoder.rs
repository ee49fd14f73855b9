//! SLNR precoders for mixed instantaneous/statistical feedback.
//!
//! A class-I user `i` is served by `u_max{D_i^{-1} h_i h_i^H}` and a class-S
//! user `n` by `u_max{D_n^{-1} Phi_n}`, where each `D` collects the leakage
//! toward every other user plus `(1/p_d) I`.
//!
//! All users share `A = sum_i h_i h_i^H + sum_n Phi_n + leakage + (1/p_d) I`,
//! and `D_k = A - N_k` for the user's own term `N_k`. The generalized
//! eigenproblems `(N_k, D_k)` and `(N_k, A)` have the same principal
//! eigenvector (eigenvalue `g` maps to `g / (1 + g)`), so one Cholesky factor
//! of `A` serves every user. For rank-one `N_k` this gives `w ∝ A^{-1} h_i`.
//! [`generalized_principal_vector`] solves a single problem by whitening
//! against `D` directly and serves as the reference.

use crate::error::{Error, Result};
use crate::numerics::{
    fix_phase, hermitian_eig, normalized, norm, principal_eigenpair, Cholesky, ComplexMatrix, C64,
};

const UNIT_NORM_TOL: f64 = 1e-9;

/// Relative eigenvalue floor used when factoring a covariance.
const FACTOR_RANK_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExactSlnr,
    ApproxDft,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ExactSlnr => "exact-slnr",
            Self::ApproxDft => "approx-dft",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderBank {
    pub class_i: Vec<Vec<C64>>,
    pub class_s: Vec<Vec<C64>>,
    pub scheme: Scheme,
}

impl PrecoderBank {
    /// Class-I precoders followed by class-S precoders.
    pub fn all(&self) -> impl Iterator<Item = &Vec<C64>> {
        self.class_i.iter().chain(&self.class_s)
    }
}

/// A class-S user's spatial covariance with a factor `F`, `Phi = F F^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticalCsi {
    pub spatial: ComplexMatrix,
    factor: ComplexMatrix,
}

impl StatisticalCsi {
    /// Factors a PSD covariance through its eigendecomposition, dropping
    /// eigenvalues below `1e-13` of the largest.
    pub fn new(spatial: ComplexMatrix) -> Result<Self> {
        let eig = hermitian_eig(&spatial)?;
        let top = eig.max_value();
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also catches NaN
        if !(top > 0.0) {
            return Err(Error::DegenerateCovariance("statistical user with zero covariance".into()));
        }
        if eig.values.last().copied().unwrap_or(0.0) < -1e-10 * spatial.trace().re.abs().max(top) {
            return Err(Error::InvalidInput("covariance is not positive semidefinite".into()));
        }
        let cols: Vec<Vec<C64>> = eig
            .values
            .iter()
            .enumerate()
            .take_while(|(_, &l)| l > FACTOR_RANK_TOL * top)
            .map(|(i, &l)| eig.vectors.column(i).into_iter().map(|z| z * l.sqrt()).collect())
            .collect();
        let factor = ComplexMatrix::from_columns(&cols)?;
        Ok(Self { spatial, factor })
    }

    /// Uses a known factor `F` of `spatial = F F^H` and skips the
    /// eigendecomposition.
    pub fn from_factor(spatial: ComplexMatrix, factor: ComplexMatrix) -> Result<Self> {
        check_dim("covariance factor", spatial.rows(), factor.rows())?;
        if factor.cols() == 0 || factor.frobenius_norm() == 0.0 {
            return Err(Error::DegenerateCovariance("statistical user with zero covariance".into()));
        }
        Ok(Self { spatial, factor })
    }

    pub fn factor(&self) -> &ComplexMatrix {
        &self.factor
    }

    pub fn antennas(&self) -> usize {
        self.spatial.rows()
    }
}

/// What the BS knows in one cell: unit-norm quantized channels of class-I
/// users, covariances of class-S users, and the per-user power `p_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackState {
    pub quantized: Vec<Vec<C64>>,
    pub statistical: Vec<StatisticalCsi>,
    pub p_d: f64,
}

fn check_power(p_d: f64) -> Result<()> {
    if !(p_d > 0.0 && p_d.is_finite()) {
        return Err(Error::InvalidInput(format!("transmit power must be positive and finite, got {p_d}")));
    }
    Ok(())
}

fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { context, expected, got });
    }
    Ok(())
}

/// The trial-independent part of the precoder computation for one cell:
/// `sum_n Phi_n + leakage + (1/p_d) I` and the class-S factors.
#[derive(Debug, Clone)]
pub struct PrecoderPlan {
    antennas: usize,
    base: ComplexMatrix,
    factors: Vec<ComplexMatrix>,
}

impl PrecoderPlan {
    pub fn new(
        antennas: usize,
        statistical: &[StatisticalCsi],
        leakage: Option<&ComplexMatrix>,
        p_d: f64,
    ) -> Result<Self> {
        check_power(p_d)?;
        if antennas == 0 {
            return Err(Error::InvalidInput("antenna count must be at least 1".into()));
        }
        let mut base = ComplexMatrix::zeros(antennas, antennas);
        for s in statistical {
            check_dim("class-S covariance", antennas, s.antennas())?;
            base.add_scaled(&s.spatial, 1.0);
        }
        if let Some(leak) = leakage {
            check_dim("inter-cell leakage", antennas, leak.rows())?;
            base.add_scaled(leak, 1.0);
        }
        base.add_to_diagonal(1.0 / p_d);
        Ok(Self {
            antennas,
            base,
            factors: statistical.iter().map(|s| s.factor.clone()).collect(),
        })
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn class_s_count(&self) -> usize {
        self.factors.len()
    }

    /// Precoders for the given class-I feedback.
    pub fn precoders(&self, quantized: &[Vec<C64>]) -> Result<PrecoderBank> {
        let mut a = self.base.clone();
        for h in quantized {
            check_dim("quantized channel", self.antennas, h.len())?;
            if (norm(h) - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::InvalidInput("quantized channels must be unit norm".into()));
            }
            a.add_outer(h, 1.0);
        }
        let chol = Cholesky::factor(&a)?;
        let class_i = quantized
            .iter()
            .map(|h| rank_one_direction(&chol, h))
            .collect::<Result<Vec<_>>>()?;
        let class_s = self
            .factors
            .iter()
            .map(|f| low_rank_direction(&chol, f))
            .collect::<Result<Vec<_>>>()?;
        Ok(PrecoderBank {
            class_i,
            class_s,
            scheme: Scheme::ExactSlnr,
        })
    }
}

fn finish(w: Vec<C64>) -> Result<Vec<C64>> {
    let mut w = normalized(&w).ok_or(Error::NonFinite("precoder"))?;
    fix_phase(&mut w);
    Ok(w)
}

/// `A^{-1} h`, normalized.
fn rank_one_direction(chol: &Cholesky, h: &[C64]) -> Result<Vec<C64>> {
    finish(chol.solve_vec(h))
}

/// Principal generalized eigenvector of `(F F^H, L L^H)`:
/// with `G = L^{-1} F`, take the top eigenvector `y` of `G^H G`, then
/// `w = L^{-H} G y`.
fn low_rank_direction(chol: &Cholesky, factor: &ComplexMatrix) -> Result<Vec<C64>> {
    let m = factor.rows();
    let r = factor.cols();
    let mut g = Vec::with_capacity(r);
    for c in 0..r {
        let mut col = factor.column(c);
        chol.forward(&mut col);
        g.push(col);
    }
    let mut gram = ComplexMatrix::zeros(r, r);
    for i in 0..r {
        for j in i..r {
            let z: C64 = g[i].iter().zip(&g[j]).map(|(a, b)| a.conj() * b).sum();
            gram[(i, j)] = z;
            gram[(j, i)] = z.conj();
        }
        gram[(i, i)] = C64::new(gram[(i, i)].re, 0.0);
    }
    let (_, y) = principal_eigenpair(&gram)?;
    let mut v = vec![C64::new(0.0, 0.0); m];
    for (col, yc) in g.iter().zip(&y) {
        for (vi, gi) in v.iter_mut().zip(col) {
            *vi += gi * yc;
        }
    }
    chol.backward(&mut v);
    finish(v)
}

fn plan_for(state: &FeedbackState, leakage: Option<&ComplexMatrix>) -> Result<PrecoderPlan> {
    let m = state
        .quantized
        .first()
        .map(Vec::len)
        .or_else(|| state.statistical.first().map(StatisticalCsi::antennas))
        .ok_or_else(|| Error::InvalidInput("precoder request with no users".into()))?;
    PrecoderPlan::new(m, &state.statistical, leakage, state.p_d)
}

/// Exact SLNR precoders for one cell with hybrid feedback.
pub fn slnr_precoders_hybrid(state: &FeedbackState) -> Result<PrecoderBank> {
    plan_for(state, None)?.precoders(&state.quantized)
}

/// Per-cell precoders with each cell's denominator extended by the
/// covariances of the other cells' users as seen from its BS.
///
/// `cross[l]` lists `Phi_{l,j,k}` (already scaled by large-scale gain) for
/// every user `k` of every cell `j != l`.
pub fn slnr_precoders_multicell(
    states: &[FeedbackState],
    cross: &[Vec<ComplexMatrix>],
) -> Result<Vec<PrecoderBank>> {
    check_dim("per-cell cross covariances", states.len(), cross.len())?;
    states
        .iter()
        .zip(cross)
        .map(|(state, list)| {
            let leakage = leakage_sum(list)?;
            plan_for(state, leakage.as_ref())?.precoders(&state.quantized)
        })
        .collect()
}

/// Sum of a covariance list, `None` when empty.
pub fn leakage_sum(list: &[ComplexMatrix]) -> Result<Option<ComplexMatrix>> {
    let Some(first) = list.first() else {
        return Ok(None);
    };
    let mut sum = ComplexMatrix::zeros(first.rows(), first.cols());
    for c in list {
        check_dim("leakage covariance", first.rows(), c.rows())?;
        sum.add_scaled(c, 1.0);
    }
    Ok(Some(sum))
}

/// Classical instantaneous SLNR precoders from unit-norm channel feedback.
pub fn instantaneous_slnr(channels: &[Vec<C64>], p_d: f64) -> Result<Vec<Vec<C64>>> {
    check_power(p_d)?;
    let m = channels
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidInput("no users".into()))?;
    let mut a = ComplexMatrix::zeros(m, m);
    a.add_to_diagonal(1.0 / p_d);
    for h in channels {
        check_dim("channel", m, h.len())?;
        a.add_outer(h, 1.0);
    }
    let chol = Cholesky::factor(&a)?;
    channels.iter().map(|h| rank_one_direction(&chol, h)).collect()
}

/// Statistical SLNR precoders from covariances only.
pub fn statistical_slnr(covariances: &[StatisticalCsi], p_d: f64) -> Result<Vec<Vec<C64>>> {
    check_power(p_d)?;
    let m = covariances
        .first()
        .map(StatisticalCsi::antennas)
        .ok_or_else(|| Error::InvalidInput("no users".into()))?;
    let mut a = ComplexMatrix::zeros(m, m);
    for c in covariances {
        check_dim("covariance", m, c.antennas())?;
        a.add_scaled(&c.spatial, 1.0);
    }
    a.add_to_diagonal(1.0 / p_d);
    let chol = Cholesky::factor(&a)?;
    covariances.iter().map(|c| low_rank_direction(&chol, &c.factor)).collect()
}

/// `u_max{D^{-1} N}` by whitening: `D = L L^H`, principal eigenvector `v` of
/// `L^{-1} N L^{-H}`, then `u = L^{-H} v`, normalized.
pub fn generalized_principal_vector(n_mat: &ComplexMatrix, d: &ComplexMatrix) -> Result<Vec<C64>> {
    check_dim("generalized eigenproblem", d.rows(), n_mat.rows())?;
    let chol = Cholesky::factor(d)?;
    let w = chol.whiten(n_mat);
    let (_, mut v) = principal_eigenpair(&w)?;
    chol.backward(&mut v);
    finish(v)
}

/// `w^H N w / w^H D w`.
pub fn generalized_rayleigh(w: &[C64], n_mat: &ComplexMatrix, d: &ComplexMatrix) -> f64 {
    n_mat.quadratic_form(w) / d.quadratic_form(w)
}

/// Beam choices of the DFT-approximate precoders, 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxIndices {
    pub class_i: Vec<usize>,
    pub class_s: Vec<usize>,
}

/// DFT-column approximations of the SLNR precoders.
///
/// Class-I users keep their predicted beam. Class-S user `n` takes
/// `argmax_l Phi_n[l] / (sum_{q != n} Phi_q[l] + #{i : m_i = l} + extra[l] + 1/p_d)`,
/// lowest beam on ties, where `extra` is an optional per-beam interference
/// sum (inter-cell leakage in the network case).
pub fn approx_precoder_indices(
    class_s_beams: &[&[f64]],
    class_i_predicted: &[usize],
    extra: Option<&[f64]>,
    p_d: f64,
) -> Result<ApproxIndices> {
    check_power(p_d)?;
    let m = match (class_s_beams.first(), extra) {
        (Some(b), _) => b.len(),
        (None, Some(e)) => e.len(),
        (None, None) => {
            return Ok(ApproxIndices {
                class_i: class_i_predicted.to_vec(),
                class_s: Vec::new(),
            })
        }
    };
    for b in class_s_beams {
        check_dim("class-S beam covariance", m, b.len())?;
    }
    if let Some(e) = extra {
        check_dim("extra beam interference", m, e.len())?;
    }
    if class_i_predicted.iter().any(|&i| i == 0 || i > m) {
        return Err(Error::InvalidInput(format!("predicted beam outside [1, {m}]")));
    }
    let noise = 1.0 / p_d;
    let mut hits = vec![0.0; m];
    for &i in class_i_predicted {
        hits[i - 1] += 1.0;
    }
    let class_s = class_s_beams
        .iter()
        .enumerate()
        .map(|(n, own)| {
            let mut best = 0usize;
            let mut best_val = f64::NEG_INFINITY;
            for l in 0..m {
                let others: f64 = class_s_beams
                    .iter()
                    .enumerate()
                    .filter(|&(q, _)| q != n)
                    .map(|(_, b)| b[l])
                    .sum();
                let den = others + hits[l] + extra.map_or(0.0, |e| e[l]) + noise;
                let v = own[l] / den;
                if v > best_val {
                    best_val = v;
                    best = l;
                }
            }
            best + 1
        })
        .collect();
    Ok(ApproxIndices {
        class_i: class_i_predicted.to_vec(),
        class_s,
    })
}
