use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("photon number mismatch: expected {expected}, found {found}")]
    PhotonMismatch { expected: usize, found: usize },

    #[error("mode count mismatch: expected {expected}, found {found}")]
    ModeMismatch { expected: usize, found: usize },

    #[error("matrix is not unitary: max |M^dag M - I| = {deviation:.3e} exceeds {tolerance:.1e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("state space of {states} states exceeds the limit of {limit}")]
    StateSpaceTooLarge { states: u128, limit: usize },

    #[error("permanent oracle refused: size {0} exceeds 9")]
    OracleTooLarge(usize),

    #[error("mode index {index} out of range 1..={modes}")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("degenerate post-selection: heralding probability is zero")]
    DegeneratePostselection,

    #[error("acceptance rate {rate:.3e} after {trials} trials is below {threshold:.1e}")]
    AcceptanceTooLow {
        rate: f64,
        trials: u64,
        threshold: f64,
    },

    #[error("gadget not found for k={k}, phi={phi}: best residual {residual:.3e}, success probability {success_prob:.4} (threshold {p_th})")]
    GadgetNotFound {
        k: usize,
        phi: f64,
        p_th: f64,
        residual: f64,
        success_prob: f64,
        best: Box<crate::gadget::GadgetSpec>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
