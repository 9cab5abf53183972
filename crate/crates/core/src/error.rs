use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("photon number {total} exceeds the four-photon capacity")]
    Capacity { total: u32 },
    #[error("state would mix beam-splitter input and output modes")]
    MixedModes,
    #[error("malformed state dump at line {line}")]
    Parse { line: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("beam splitter is not lossless: Tx+Rx={tx_rx}, Ty+Ry={ty_ry}")]
    NotLossless { tx_rx: f64, ty_ry: f64 },
    #[error("coefficient {name}={value} outside [0, 1]")]
    CoefficientRange { name: &'static str, value: f64 },
    #[error("polarizer {index} is absent where a definite angle is required")]
    AbsentPolarizer { index: usize },
    #[error("invalid parameter {name}: {reason}")]
    Invalid { name: &'static str, reason: String },
    #[error("line {line}: key `{key}`: {message}")]
    Parse {
        line: usize,
        key: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericalError {
    #[error("quadrature did not converge: relative change {change:e} at order {order}")]
    QuadratureNotConverged { order: usize, change: f64 },
    #[error("root bracket [{lo}, {hi}] does not contain a sign change")]
    NoBracket { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BellError {
    #[error("correlation undefined: zero total counts at ({a}, {b})")]
    UndefinedCorrelation { a: f64, b: f64 },
    #[error("no tallies recorded for setting ({a}, {b})")]
    MissingSetting { a: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("rejection envelope violated: target {target:e} > envelope {envelope:e}")]
    EnvelopeViolation { target: f64, envelope: f64 },
    #[error(
        "statistics unavailable: {n_emitted} emitted, {n_quad_detected} quadruple detections, \
         {n_in_window} in window"
    )]
    StatisticsUnavailable {
        n_emitted: u64,
        n_quad_detected: u64,
        n_in_window: u64,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Bell(#[from] BellError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numerical(#[from] NumericalError),
    #[error(transparent)]
    Bell(#[from] BellError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
