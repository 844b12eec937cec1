use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:e} exceeds {tolerance:e})")]
    NonHermitianInput { deviation: f64, tolerance: f64 },

    #[error("matrix dimension {0} is too small (need at least 2)")]
    DimensionTooSmall(usize),

    #[error("eigensolver did not converge")]
    SolverFailure,

    #[error("time {t} lies outside the ramp window [0, {tau_q}]")]
    OutOfWindow { t: f64, tau_q: f64 },

    #[error("unsupported system size {size} for {model} (need at least {min})")]
    UnsupportedSize { model: &'static str, size: usize, min: usize },

    #[error(
        "levels {m} and {n} are degenerate (gap {gap:e}) but coupled by the drive ({coupling:e}); \
         counterdiabatic term is ill-defined"
    )]
    DegenerateCoupling { m: usize, n: usize, gap: f64, coupling: f64 },

    #[error("control scheme {0} does not track the ground state")]
    UnsupportedScheme(String),

    #[error("eigenstate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("time step too coarse: dt * max|H| = {product:.3e} exceeds {limit}")]
    StepTooCoarse { product: f64, limit: f64 },

    #[error("entropy trace is flat, no crossover detectable")]
    FlatTrace,

    #[error("entropy trace is flat at tau_q = {tau_q}, no crossover detectable")]
    FlatTraceAt { tau_q: f64 },

    #[error("ramp has no crossing g(t) = 0 inside [0, tau_q]")]
    NoCrossing,

    #[error("no adiabatic-impulse root inside the ramp window for alpha = {alpha}")]
    NoRoot { alpha: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("mean work {mean} deviates from adiabatic work {adiabatic} at t = {t}")]
    MeanWorkMismatch { t: f64, mean: f64, adiabatic: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
