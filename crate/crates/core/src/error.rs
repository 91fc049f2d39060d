use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unsupported derivative order {0} (expected 1, 2 or 3)")]
    UnsupportedDerivativeOrder(u32),

    #[error("unsupported Gauss stage count {0} (expected 1, 2 or 3)")]
    UnsupportedStages(usize),

    #[error("singular mode block at mode {mode} (condition estimate {condition:e})")]
    SingularModeBlock { mode: usize, condition: f64 },

    #[error("multiplier Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    MultiplierNonConvergence { iterations: usize, residual: f64 },

    #[error("accepted multiplier {lambda} is outside the window |λ - 1| < 0.5")]
    MultiplierOutOfRange { lambda: f64 },

    #[error("Newton derivative underflow at x = {x} (g' = {derivative:e})")]
    DerivativeUnderflow { x: f64, derivative: f64 },

    #[error("SAV square root of non-positive value F + c0 = {value}")]
    SavSqrtDomain { value: f64 },

    #[error("SAV scalar elimination is singular (1 - (b, w2) = {denominator:e})")]
    EliminationSingular { denominator: f64 },

    #[error("fixed-point stage iteration did not converge after {sweeps} sweeps (increment {increment:e})")]
    FixedPointNonConvergence { sweeps: usize, increment: f64 },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
