use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operands live on different mode/spin bases")]
    BasisMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("state has no nonzero amplitude")]
    DegenerateState,
    #[error("null state: squared norm {0:.3e} is below tolerance")]
    NullState(f64),
    #[error("particle number mismatch: bra has {bra}, ket has {ket}")]
    ParticleNumberMismatch { bra: usize, ket: usize },
    #[error("operands carry different exchange statistics")]
    StatisticsMismatch,
    #[error("slot index {index} out of range for {len} slots")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("problem size {n} exceeds the supported limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("projection has no outcome: probability {0:.3e} is below tolerance")]
    NoOutcome(f64),
    #[error("no coincidence: joint detection probability {0:.3e} is below tolerance")]
    NoCoincidence(f64),
    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),
    #[error("cannot extract {m} particles from an {n}-particle state")]
    BadExtraction { m: usize, n: usize },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("state does not match a supported template: {0}")]
    NotApplicable(String),
    #[error("numerical contract violated: {0}")]
    Contract(String),
    #[error("measurement axis is not a unit vector (norm {0})")]
    BadSetting(f64),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
