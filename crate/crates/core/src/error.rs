use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("kernel quadrature did not converge at s = {s}: doubling nodes changed the value by {change:e} (relative), tolerance {tol:e}")]
    KernelNonConvergence { s: f64, change: f64, tol: f64 },

    #[error("adaptive quadrature exhausted its subdivision budget on [{a}, {b}]")]
    QuadratureBudget { a: f64, b: f64 },

    #[error("step-size failure at t = {t}: |b| = {modulus} exceeds 1 + 1e-6; reduce dt")]
    StepSize { t: f64, modulus: f64 },

    #[error("bound-state bracket failure: {0}")]
    Bracket(String),

    #[error("density matrix is not physical: eigenvalue {eigenvalue:e}")]
    NotPhysical { eigenvalue: f64 },

    #[error("discord optimizer regression: refined objective {refined} is worse than grid objective {grid}")]
    OptimizerRegression { grid: f64, refined: f64 },

    #[error("mode oracle norm drift {drift:e} exceeds 1e-8")]
    NormDrift { drift: f64 },

    #[error("solver disagrees with the mode oracle: max |b − b_oracle| = {deviation:e} exceeds {tol:e}")]
    OracleMismatch { deviation: f64, tol: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("plot error: {0}")]
    Plot(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by user input rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. } | Error::Config(_))
    }

    /// True for failures of the numerical methods themselves.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::KernelNonConvergence { .. }
                | Error::QuadratureBudget { .. }
                | Error::StepSize { .. }
                | Error::Bracket(_)
                | Error::NotPhysical { .. }
                | Error::OptimizerRegression { .. }
                | Error::NormDrift { .. }
                | Error::OracleMismatch { .. }
        )
    }
}
