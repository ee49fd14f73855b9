//! Quantization codebooks and covariance-only feedback prediction.
//!
//! Three constructions are supported: the DFT book, the covariance-skewed
//! book, and the prediction grid, a 1-D phase grid spanning a user's beam
//! support. Codeword indices are 1-based.

use std::fmt::Write as _;

use crate::channel::{complex_gaussian, CovariancePair};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, inner, norm_sqr, normalized, phase_ramp, ComplexMatrix, C64};
use crate::seed;

/// Largest codebook that is ever materialized.
pub const MAX_MATERIALIZED_BITS: u32 = 20;

/// Largest bit count the predictor resolves; finer grids fall below `f64`
/// resolution of the grid step and are evaluated at this size.
pub const MAX_PREDICTION_BITS: u32 = 52;

/// Above this many codewords the predictor walks distinct beam positions
/// instead of every codeword.
const EXHAUSTIVE_PREDICTION_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CodebookKind {
    Dft,
    Skewed,
    PredictionGrid { x_min: f64, x_max: f64 },
}

impl CodebookKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Dft => "dft",
            Self::Skewed => "skewed",
            Self::PredictionGrid { .. } => "prediction-grid",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub kind: CodebookKind,
    pub bits: u32,
    pub antennas: usize,
    pub words: Vec<Vec<C64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationResult {
    /// 1-based codeword index.
    pub index: usize,
    pub word: Vec<C64>,
    /// `|h^H c|^2 / |h|^2`, zero for a zero channel.
    pub alignment: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictedFeedback {
    /// 1-based index of the predicted codeword.
    pub codeword_index: u64,
    /// 1-based DFT beam the predicted codeword points at.
    pub beam_index: usize,
}

fn check_bits(bits: u32) -> Result<usize> {
    if bits > MAX_MATERIALIZED_BITS {
        return Err(Error::Capacity(format!(
            "codebook of {bits} bits exceeds the {MAX_MATERIALIZED_BITS}-bit limit"
        )));
    }
    Ok(1usize << bits)
}

fn check_antennas(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidInput("antenna count must be at least 1".into()));
    }
    Ok(())
}

/// Validates prediction-grid bounds `1 <= x_min <= x_max <= M`.
pub fn check_grid(m: usize, x_min: f64, x_max: f64) -> Result<()> {
    if !(x_min.is_finite() && x_max.is_finite() && 1.0 <= x_min && x_min <= x_max && x_max <= m as f64) {
        return Err(Error::InvalidInput(format!(
            "grid bounds must satisfy 1 <= x_min <= x_max <= {m}, got [{x_min}, {x_max}]"
        )));
    }
    Ok(())
}

/// Word `u` has entries `exp(j pi m (2u/X - 1)) / sqrt(M)`.
pub fn dft_codebook(m: usize, bits: u32) -> Result<Codebook> {
    check_antennas(m)?;
    let x = check_bits(bits)?;
    let words = (1..=x)
        .map(|u| phase_ramp(m, 2.0 * u as f64 / x as f64 - 1.0))
        .collect();
    Ok(Codebook {
        kind: CodebookKind::Dft,
        bits,
        antennas: m,
        words,
    })
}

/// Principal square root of a PSD matrix, negative eigenvalues clamped to 0.
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a)?;
    let n = a.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (i, &lam) in eig.values.iter().enumerate() {
        if lam > 0.0 {
            out.add_outer(&eig.vectors.column(i), lam.sqrt());
        }
    }
    Ok(out)
}

/// Words `Phi^{1/2} f_u / |Phi^{1/2} f_u|` with isotropic `f_u`.
///
/// The `f_u` are drawn in order from one stream, so the `B`-bit book is a
/// prefix of the `B+1`-bit book under the same seed.
pub fn skewed_codebook(cov: &CovariancePair, bits: u32, seed: u64) -> Result<Codebook> {
    let m = cov.spatial.rows();
    check_antennas(m)?;
    let x = check_bits(bits)?;
    if cov.spatial.frobenius_norm() == 0.0 {
        return Err(Error::DegenerateCovariance("skewed codebook from an all-zero covariance".into()));
    }
    let root = psd_sqrt(&cov.spatial)?;
    let mut rng = seed::rng(seed);
    let mut words = Vec::with_capacity(x);
    while words.len() < x {
        let f: Vec<C64> = (0..m).map(|_| complex_gaussian(&mut rng)).collect();
        let f = match normalized(&f) {
            Some(f) => f,
            None => continue,
        };
        let w = root.matvec(&f)?;
        // A draw orthogonal to the covariance support carries no direction.
        if let Some(w) = normalized(&w) {
            words.push(w);
        }
    }
    Ok(Codebook {
        kind: CodebookKind::Skewed,
        bits,
        antennas: m,
        words,
    })
}

/// Grid phase `eta(u) = (2 x_min / M - 1) + u * 2 (x_max - x_min) / (M X)`.
pub fn grid_phase(m: usize, x: u64, x_min: f64, x_max: f64, u: u64) -> f64 {
    (2.0 * x_min / m as f64 - 1.0) + u as f64 * 2.0 * (x_max - x_min) / (m as f64 * x as f64)
}

/// Word `u` has entries `exp(j pi m eta(u)) / sqrt(M)`, `u = 1..X`.
pub fn prediction_grid_codebook(m: usize, bits: u32, x_min: f64, x_max: f64) -> Result<Codebook> {
    check_antennas(m)?;
    check_grid(m, x_min, x_max)?;
    let x = check_bits(bits)?;
    let words = (1..=x as u64)
        .map(|u| phase_ramp(m, grid_phase(m, x as u64, x_min, x_max, u)))
        .collect();
    Ok(Codebook {
        kind: CodebookKind::PredictionGrid { x_min, x_max },
        bits,
        antennas: m,
        words,
    })
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Word `index` (1-based).
    pub fn word(&self, index: usize) -> &[C64] {
        &self.words[index - 1]
    }

    /// Plain-text form: a `#` header line, then one word per line as
    /// comma-separated `re:im` pairs.
    pub fn to_text(&self) -> String {
        let mut out = format!("# kind={} bits={} antennas={}", self.kind.name(), self.bits, self.antennas);
        if let CodebookKind::PredictionGrid { x_min, x_max } = self.kind {
            let _ = write!(out, " x_min={x_min} x_max={x_max}");
        }
        out.push('\n');
        for w in &self.words {
            let line: Vec<String> = w.iter().map(|z| format!("{}:{}", z.re, z.im)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .and_then(|l| l.strip_prefix('#'))
            .ok_or_else(|| Error::Parse("codebook text must start with a '#' header".into()))?;
        let mut kind = None;
        let (mut bits, mut antennas, mut x_min, mut x_max) = (None, None, None, None);
        for field in header.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("malformed header field '{field}'")))?;
            let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Parse(format!("bad value for {k}: '{v}'")));
            match k {
                "kind" => kind = Some(v.to_string()),
                "bits" => bits = Some(v.parse::<u32>().map_err(|_| Error::Parse(format!("bad bits '{v}'")))?),
                "antennas" => {
                    antennas = Some(v.parse::<usize>().map_err(|_| Error::Parse(format!("bad antennas '{v}'")))?)
                }
                "x_min" => x_min = Some(num(v)?),
                "x_max" => x_max = Some(num(v)?),
                _ => return Err(Error::Parse(format!("unknown header field '{k}'"))),
            }
        }
        let missing = |name: &str| Error::Parse(format!("header lacks '{name}'"));
        let bits = bits.ok_or_else(|| missing("bits"))?;
        let antennas = antennas.ok_or_else(|| missing("antennas"))?;
        let kind = match kind.as_deref() {
            Some("dft") => CodebookKind::Dft,
            Some("skewed") => CodebookKind::Skewed,
            Some("prediction-grid") => CodebookKind::PredictionGrid {
                x_min: x_min.ok_or_else(|| missing("x_min"))?,
                x_max: x_max.ok_or_else(|| missing("x_max"))?,
            },
            Some(other) => return Err(Error::Parse(format!("unknown codebook kind '{other}'"))),
            None => return Err(missing("kind")),
        };
        let expected = check_bits(bits)?;
        let mut words = Vec::with_capacity(expected);
        for (n, line) in lines.enumerate() {
            let word = line
                .split(',')
                .map(|pair| {
                    let (re, im) = pair
                        .trim()
                        .split_once(':')
                        .ok_or_else(|| Error::Parse(format!("word {}: malformed entry '{pair}'", n + 1)))?;
                    let p = |s: &str| {
                        s.parse::<f64>()
                            .map_err(|_| Error::Parse(format!("word {}: bad number '{s}'", n + 1)))
                    };
                    Ok(C64::new(p(re)?, p(im)?))
                })
                .collect::<Result<Vec<C64>>>()?;
            if word.len() != antennas {
                return Err(Error::DimensionMismatch {
                    context: "codebook word length",
                    expected: antennas,
                    got: word.len(),
                });
            }
            words.push(word);
        }
        if words.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "codebook word count",
                expected,
                got: words.len(),
            });
        }
        Ok(Self {
            kind,
            bits,
            antennas,
            words,
        })
    }
}

/// Exhaustive `argmax_u |h^H c_u|^2`, lowest index on ties.
pub fn quantize(h: &[C64], book: &Codebook) -> Result<QuantizationResult> {
    if h.len() != book.antennas {
        return Err(Error::DimensionMismatch {
            context: "quantize",
            expected: book.antennas,
            got: h.len(),
        });
    }
    let mut best = 0usize;
    let mut best_gain = f64::NEG_INFINITY;
    for (i, w) in book.words.iter().enumerate() {
        let g = inner(h, w).norm_sqr();
        if g > best_gain {
            best_gain = g;
            best = i;
        }
    }
    let energy = norm_sqr(h);
    let alignment = if energy > 0.0 { (best_gain / energy).clamp(0.0, 1.0) } else { 0.0 };
    Ok(QuantizationResult {
        index: best + 1,
        word: book.words[best].clone(),
        alignment,
    })
}

/// Beam position of grid codeword `u`: `round((M/2)(eta(u) + 1))`, which is
/// `round(x_min + u (x_max - x_min) / X)`, clamped to `[1, M]`. Rounds half
/// away from zero.
pub fn grid_position(m: usize, x: u64, x_min: f64, x_max: f64, u: u64) -> usize {
    let pos = (x_min + u as f64 * ((x_max - x_min) / x as f64)).round();
    (pos.max(1.0) as usize).min(m)
}

/// Predicts the prediction-grid codeword a user would feed back, from its
/// beam-domain covariance alone.
pub fn predict_feedback(beam_diag: &[f64], bits: u32, x_min: f64, x_max: f64) -> Result<PredictedFeedback> {
    let m = beam_diag.len();
    check_antennas(m)?;
    check_grid(m, x_min, x_max)?;
    if beam_diag.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput("beam covariance must be finite and non-negative".into()));
    }
    if beam_diag.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateCovariance("all-zero beam covariance".into()));
    }
    let x = 1u64 << bits.min(MAX_PREDICTION_BITS);
    Ok(if x <= EXHAUSTIVE_PREDICTION_LIMIT {
        predict_exhaustive(beam_diag, x, x_min, x_max)
    } else {
        predict_by_position(beam_diag, x, x_min, x_max)
    })
}

/// Scans every codeword.
pub fn predict_exhaustive(beam_diag: &[f64], x: u64, x_min: f64, x_max: f64) -> PredictedFeedback {
    let m = beam_diag.len();
    let mut best = (1u64, grid_position(m, x, x_min, x_max, 1));
    let mut best_val = beam_diag[best.1 - 1];
    for u in 2..=x {
        let p = grid_position(m, x, x_min, x_max, u);
        let v = beam_diag[p - 1];
        if v > best_val {
            best_val = v;
            best = (u, p);
        }
    }
    PredictedFeedback {
        codeword_index: best.0,
        beam_index: best.1,
    }
}

/// Same result as [`predict_exhaustive`], visiting each distinct beam
/// position once. Positions are non-decreasing in `u`, so the first
/// codeword reaching the best position is the lowest-index maximizer.
pub fn predict_by_position(beam_diag: &[f64], x: u64, x_min: f64, x_max: f64) -> PredictedFeedback {
    let m = beam_diag.len();
    let pos = |u: u64| grid_position(m, x, x_min, x_max, u);
    let first = pos(1);
    let last = pos(x);
    let step = (x_max - x_min) / x as f64;
    let mut best: Option<(f64, u64, usize)> = None;
    for p in first..=last {
        let u = if p == first {
            1
        } else {
            first_codeword_at(p, x, x_min, step, &pos)
        };
        if u > x || pos(u) != p {
            continue;
        }
        let v = beam_diag[p - 1];
        if best.is_none_or(|(bv, _, _)| v > bv) {
            best = Some((v, u, p));
        }
    }
    let (_, u, p) = best.expect("grid has at least one codeword");
    PredictedFeedback {
        codeword_index: u,
        beam_index: p,
    }
}

/// Smallest `u` with `pos(u) >= p`, given `pos(u) = round(x_min + u * step)`.
fn first_codeword_at(p: usize, x: u64, x_min: f64, step: f64, pos: &impl Fn(u64) -> usize) -> u64 {
    if step <= 0.0 {
        return x + 1;
    }
    let guess = ((p as f64 - 0.5 - x_min) / step).ceil().max(1.0);
    if guess > x as f64 {
        return x + 1;
    }
    let mut u = guess as u64;
    // Correct for rounding in the division.
    while u > 1 && pos(u - 1) >= p {
        u -= 1;
    }
    while u <= x && pos(u) < p {
        u += 1;
    }
    u
}
