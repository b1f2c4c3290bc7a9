use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("the all-zero mode triple is excluded")]
    ExcludedMode,
    #[error("argument outside the domain of {func}: {value}")]
    DomainError { func: &'static str, value: f64 },
    #[error("lattice sum did not converge (partial {partial}, error estimate {error_estimate})")]
    ConvergenceFailure { partial: f64, error_estimate: f64 },
    #[error("quadrature failed to reach tolerance (value {value}, error estimate {error_estimate})")]
    QuadratureFailure { value: f64, error_estimate: f64 },
    #[error("root bracketing or refinement failed: {0}")]
    RootFailure(String),
    #[error("evaluation point lies on a branch boundary at xi = {xi}")]
    BranchBoundary { xi: f64 },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("mode-sum tail bound {bound} too large; raise omega_max")]
    TailBoundTooLarge { bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
