use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("n_sites must be even (got {0})")]
    OddSites(usize),

    #[error("central spin eigenbasis undefined (mu = nu = 0)")]
    DegenerateCentralSpin,

    #[error("tau pole: lambda + delta = 1 (lambda = {lambda}, delta = {delta})")]
    TauPole { lambda: f64, delta: f64 },

    #[error("cutoff outside small-k regime: cutoff {cutoff} must be below N/2 = {half}")]
    CutoffOutsideSmallK { cutoff: usize, half: usize },

    #[error("Berry phase undefined (degenerate effective field)")]
    DegenerateEffectiveField,

    #[error("derivative singular at degenerate mode k = {k}")]
    SingularDerivative { k: usize },

    #[error("peak not bracketed in [{lo}, {hi}]")]
    PeakNotBracketed { lo: f64, hi: f64 },

    #[error(
        "quadrature did not converge on [{lo}, {hi}]: estimated error {error:e} after {intervals} intervals"
    )]
    QuadratureNonConvergence {
        lo: f64,
        hi: f64,
        error: f64,
        intervals: usize,
    },

    #[error("convention mismatch at k = {k}: {detail}")]
    ConventionMismatch { k: usize, detail: String },

    #[error("empty time grid")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, Error>;
