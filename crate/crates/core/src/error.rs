use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode count mismatch: expected {expected}, got {got}")]
    ModeMismatch { expected: usize, got: usize },

    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("negative photon number: {0}")]
    NegativePhotonNumber(i64),

    #[error("matrix is {rows}x{cols}, state has {modes} modes")]
    DimensionMismatch { rows: usize, cols: usize, modes: usize },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("{photons} photons exceeds the supported maximum of {max}")]
    TooManyPhotons { photons: u32, max: u32 },

    #[error("duplicate mode index {0}")]
    DuplicateMode(usize),

    #[error("detector `{0}` is not declared")]
    UnknownDetector(String),

    #[error("detector `{0}` recorded zero singles")]
    ZeroSingles(String),

    #[error("mode {0} is covered by more than one splitter tree")]
    OverlappingTrees(usize),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("not enough samples: need at least {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    #[error("truncation n_max={n_max} cannot produce {photons}-photon events")]
    Truncation { n_max: u32, photons: u32 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Failures of the numerics (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonUnitary { .. } | Error::TooManyPhotons { .. })
    }
}
