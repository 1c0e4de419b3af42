use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("alphabet mismatch: expected {expected} symbols, got {actual}")]
    AlphabetMismatch { expected: usize, actual: usize },

    #[error("symbol {symbol} outside alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("no codeword is a prefix of the input")]
    NoCodewordPrefix,

    #[error("decoder lost synchronization at stage {stage}")]
    Desync { stage: usize },

    #[error("key rate undefined over zero stages")]
    ZeroStages,

    #[error("length {length} outside the support [{min}, {max}]")]
    OutsideSupport { length: usize, min: usize, max: usize },

    #[error("state space of {required} exceeds the configured limit {limit}")]
    StateSpaceTooLarge { required: u128, limit: u128 },

    #[error("infeasible target: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
