//! Hybrid statistical/instantaneous channel feedback for FDD massive MIMO.
//!
//! The crate is layered bottom-up: [`numerics`] supplies dense complex linear
//! algebra, [`channel`] generates multipath ULA channels and their covariance,
//! [`codebook`] quantizes and predicts feedback, [`precoder`] builds SLNR
//! beamformers from mixed feedback, [`rate`] evaluates sum rates by Monte Carlo
//! and by the covariance-only bound, [`classifier`] splits users between the two
//! feedback classes, and [`scenario`] assembles single-cell and 3-cell drops.
//!
//! Indices of beams, codewords and DFT columns are 1-based in public results;
//! user indices are 0-based.

pub mod channel;
pub mod classifier;
pub mod codebook;
pub mod error;
pub mod numerics;
pub mod precoder;
pub mod rate;
pub mod scenario;
pub mod seed;
pub mod validate;

pub use channel::{
    analytical_beam_covariance, draw_channel, draw_paths, empirical_covariance, steering_vector,
    AngularProfile, ArrayConfig, ChannelGenerator, ChannelRealization, CovariancePair, PathSet,
};
pub use error::{Error, Result};
pub use numerics::{dft_matrix, hermitian_eig, solve_hpd, ComplexMatrix, EigenResult, C64};
pub use classifier::{exhaustive_classify, greedy_classify, multicell_classify, Classification, UserId};
pub use codebook::{dft_codebook, predict_feedback, quantize, skewed_codebook, Codebook, CodebookKind};
pub use precoder::{slnr_precoders_hybrid, slnr_precoders_multicell, FeedbackState, PrecoderBank, StatisticalCsi};
pub use rate::{
    monte_carlo, multicell_bound, sum_rate_lower_bound, BoundProblem, BoundReport, CellClasses, CsiMode, NetworkBeams,
    NetworkModel, RateReport,
};
pub use scenario::{CodebookChoice, Drop, EvalSettings};
