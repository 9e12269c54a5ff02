use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("velocity |v| = {0} is not below 1")]
    VelocityOutOfRange(f64),

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("quadrature did not converge (estimated error {error:.3e}, tolerance {tolerance:.3e})")]
    QuadratureNoConvergence { error: f64, tolerance: f64 },

    #[error("omega must be nonzero on the imaginary axis")]
    ZeroFrequency,

    #[error("spectral parameter {0} is outside the supported region")]
    LambdaOutOfRange(String),

    #[error("denominator vanishes: {0}")]
    DenominatorVanishes(String),

    #[error("Omega^+ is not positive definite (min eigenvalue {0:.3e})")]
    OmegaNotPositive(f64),

    #[error("projection did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("projection lost at t = {t}: {reason}")]
    ProjectionLost { t: f64, reason: String },

    #[error("energy drift {drift:.3e} exceeds limit at t = {t}")]
    StepUnstable { t: f64, drift: f64 },

    #[error("t_final = {t_final} exceeds wrap-guard time {limit}")]
    WrapGuard { t_final: f64, limit: f64 },

    #[error("non-positive value {value} at t = {t} inside the fit window")]
    NonPositiveValues { t: f64, value: f64 },

    #[error("fit window holds {0} points, need at least 8")]
    WindowTooSmall(usize),

    #[error("configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("snapshot: {0}")]
    Snapshot(String),
}

impl Error {
    /// True for failures that signal a physics assertion rather than misuse.
    pub fn is_physics(&self) -> bool {
        matches!(
            self,
            Error::ProjectionLost { .. }
                | Error::StepUnstable { .. }
                | Error::NoConvergence { .. }
                | Error::OmegaNotPositive(_)
                | Error::DenominatorVanishes(_)
                | Error::QuadratureNoConvergence { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
