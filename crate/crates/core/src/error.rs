use thiserror::Error;

/// Errors produced by the solvers and the command-line layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coefficient sign violated: {what} = {value} at index {index}")]
    CoefficientSign {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Newton on the coupled steady system failed; carries the last iterate and
    /// the residual history for diagnosis.
    #[error("steady Newton failed after {} iterations (last residual {:e})", .0.history.len(), .0.history.last().copied().unwrap_or(f64::NAN))]
    NoConvergence(Box<NewtonFailure>),

    #[error("steady Newton converged to a root with negative entries (min u {min_u:e}, min v {min_v:e})")]
    NonPhysicalRoot { min_u: f64, min_v: f64 },

    #[error("prey-only state omega_mu does not exist (mu = {mu} <= D*sigma1 = {threshold})")]
    PreyStateMissing { mu: f64, threshold: f64 },

    #[error("predator-only state theta_lambda does not exist (lambda = {lambda} <= d(0)*sigma1 = {threshold})")]
    PredatorStateMissing { lambda: f64, threshold: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("bracket expansion failed: {0}")]
    Divergence(String),

    #[error("branch start failed: {0}")]
    BifurcationStart(String),

    #[error("unstable time step at t = {t}: explicit step restriction {cfl:.3} > 1 with dt = {dt:e}; use a smaller dt")]
    UnstableStep { t: f64, dt: f64, cfl: f64 },

    #[error("positivity lost at t = {t}: value {value:e} at node {index}")]
    Positivity { t: f64, index: usize, value: f64 },

    #[error("configuration error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("invariant breach: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Last iterate and residual history of a failed steady Newton solve.
#[derive(Debug, Clone)]
pub struct NewtonFailure {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub lambda: f64,
    pub history: Vec<f64>,
}

impl Error {
    /// Process exit code: 2 config, 3 convergence, 4 precondition, 5 invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Convergence { .. }
            | Error::NoConvergence(_)
            | Error::NonPhysicalRoot { .. }
            | Error::Divergence(_)
            | Error::BifurcationStart(_)
            | Error::UnstableStep { .. } => 3,
            Error::InvalidArgument(_)
            | Error::CoefficientSign { .. }
            | Error::PreyStateMissing { .. }
            | Error::PredatorStateMissing { .. }
            | Error::NotApplicable(_) => 4,
            Error::Positivity { .. } | Error::Invariant(_) | Error::Io(_) => 5,
        }
    }

    /// Short machine-readable tag used on the error line of the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::CoefficientSign { .. } => "coefficient-sign",
            Error::Convergence { .. } => "convergence",
            Error::NoConvergence(_) => "no-convergence",
            Error::NonPhysicalRoot { .. } => "non-physical-root",
            Error::PreyStateMissing { .. } => "prey-state-missing",
            Error::PredatorStateMissing { .. } => "predator-state-missing",
            Error::NotApplicable(_) => "not-applicable",
            Error::Divergence(_) => "divergence",
            Error::BifurcationStart(_) => "bifurcation-start",
            Error::UnstableStep { .. } => "unstable-step",
            Error::Positivity { .. } => "positivity",
            Error::Config { .. } => "config",
            Error::Invariant(_) => "invariant",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
