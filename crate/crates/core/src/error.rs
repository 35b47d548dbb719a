//! Error type shared by every module of the crate.

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, NessError>;

#[derive(Debug, Error)]
pub enum NessError {
    /// A model, generator or argument violates a documented invariant.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Generator span exceeds the number of sites of a finite chain.
    #[error("model too small: generator spans {span} sites but the chain has {sites}")]
    ModelTooSmall { span: usize, sites: usize },

    #[error("operation requires a {expected} chain")]
    WrongChain { expected: &'static str },

    /// The operation only handles generators built from odd Majorana operators.
    #[error("unsupported generator: {0}")]
    UnsupportedGenerator(String),

    /// The Sylvester operator `X^T G + G X` is singular.
    #[error(
        "degenerate steady state: eigenvalues {first} and {second} of X sum to {sum:.3e}"
    )]
    DegenerateSteadyState {
        first: Complex64,
        second: Complex64,
        sum: f64,
    },

    #[error("singular symbol equation at phi = {phi}")]
    SingularSymbol { phi: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("tolerance not met: requested {requested:.3e}, achieved {achieved:.3e}")]
    ToleranceNotMet { requested: f64, achieved: f64 },

    /// A denominator root lies on the unit circle.
    #[error("critical symbol: {count} denominator root(s) on the unit circle")]
    Critical {
        count: usize,
        report: Box<crate::criticality::CriticalityReport>,
    },

    #[error("degenerate generator: all moment conditions vanish up to order {order}")]
    DegenerateGenerator { order: usize },

    #[error("no critical solution: {0}")]
    NoSolution(String),

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("degenerate kernel: Liouvillian has {dim} (near-)zero singular values")]
    DegenerateKernel { dim: usize },

    #[error("fit window contains {found} usable points, need at least {needed}")]
    FitWindow { found: usize, needed: usize },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl NessError {
    /// True for errors caused by bad input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            NessError::InvalidModel(_)
                | NessError::InvalidArgument(_)
                | NessError::ModelTooSmall { .. }
                | NessError::WrongChain { .. }
                | NessError::UnsupportedGenerator(_)
                | NessError::Json(_)
                | NessError::FitWindow { .. }
        )
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            NessError::InvalidModel(_) => "invalid_model",
            NessError::InvalidArgument(_) => "invalid_argument",
            NessError::ModelTooSmall { .. } => "model_too_small",
            NessError::WrongChain { .. } => "wrong_chain",
            NessError::UnsupportedGenerator(_) => "unsupported_generator",
            NessError::DegenerateSteadyState { .. } => "degenerate_steady_state",
            NessError::SingularSymbol { .. } => "singular_symbol",
            NessError::IntegrationFailure { .. } => "integration_failure",
            NessError::ToleranceNotMet { .. } => "tolerance_not_met",
            NessError::Critical { .. } => "critical",
            NessError::DegenerateGenerator { .. } => "degenerate_generator",
            NessError::NoSolution(_) => "no_solution",
            NessError::IllConditioned(_) => "ill_conditioned",
            NessError::DegenerateKernel { .. } => "degenerate_kernel",
            NessError::FitWindow { .. } => "fit_window",
            NessError::Linalg(_) => "linalg",
            NessError::Json(_) => "json",
            NessError::Io(_) => "io",
        }
    }
}
