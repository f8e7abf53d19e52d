use thiserror::Error;

use crate::maps::Outcome;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("superoperator has no block for band {band}; rebuild it in the full sector")]
    MissingBand { band: isize },

    #[error("cannot {op} superoperators with band shifts {left} and {right}")]
    ShiftMismatch {
        op: &'static str,
        left: isize,
        right: isize,
    },

    #[error("Mandel Q is undefined when the mean count vanishes")]
    UndefinedQ,

    #[error("outcome {outcome:?} is impossible (probability {probability:e})")]
    ImpossibleOutcome { outcome: Outcome, probability: f64 },

    #[error("singular map: {0}")]
    SingularMap(String),

    #[error("no eigenvalue within {tolerance:e} of the fixed point (closest {closest})")]
    NoFixedPoint { closest: String, tolerance: f64 },

    #[error("ambiguous steady state: eigenvalues {first} and {second} are both within {gap:e} of the fixed point")]
    AmbiguousSteadyState { first: String, second: String, gap: f64 },

    #[error("biorthonormalization failed: eigenvector condition number {condition:e} exceeds {limit:e}")]
    Biorthogonalization { condition: f64, limit: f64 },

    #[error("window size {size} exceeds the configured cap {cap}")]
    WindowCap { size: usize, cap: usize },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("closed forms only hold at gt_int = pi/sqrt(2), nbar = 0 (got gt_int = {gt_int}, nbar = {nbar})")]
    OutsideSolvablePoint { gt_int: f64, nbar: f64 },

    #[error("monte carlo: {0}")]
    MonteCarlo(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable tag, used for the status column of sweeps.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::InvalidState(_) => "invalid_state",
            Error::Dimension { .. } => "dimension",
            Error::MissingBand { .. } => "missing_band",
            Error::ShiftMismatch { .. } => "shift_mismatch",
            Error::UndefinedQ => "undefined_q",
            Error::ImpossibleOutcome { .. } => "impossible_outcome",
            Error::SingularMap(_) => "singular_map",
            Error::NoFixedPoint { .. } => "no_fixed_point",
            Error::AmbiguousSteadyState { .. } => "ambiguous_steady_state",
            Error::Biorthogonalization { .. } => "biorthogonalization",
            Error::WindowCap { .. } => "window_cap",
            Error::InvalidWindow(_) => "invalid_window",
            Error::OutsideSolvablePoint { .. } => "outside_solvable_point",
            Error::MonteCarlo(_) => "monte_carlo",
        }
    }
}
