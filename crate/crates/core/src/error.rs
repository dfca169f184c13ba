use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mode index {index} out of range for a {modes}-mode state")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error(
        "target has |c3| = {c3_abs:.3e} < 1e-9: a triple-click herald always carries a \
         three-photon component, so this superposition is unreachable"
    )]
    DegenerateTarget { c3_abs: f64 },

    #[error("all output coefficients vanish")]
    ZeroState,

    #[error("herald probability is zero for this configuration")]
    NoHeraldEvent,

    #[error("no quadrature records supplied")]
    EmptyRecords,

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
