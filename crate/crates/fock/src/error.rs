use thiserror::Error;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("truncation {0} is too small (need d >= 2)")]
    Truncation(usize),

    #[error("Hilbert space of dimension {dim} exceeds the limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("mode {mode} out of range for {modes} mode(s)")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("unsupported by the Fock oracle: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(transparent)]
    Engine(#[from] gaussim::Error),

    #[error("corpus: {0}")]
    Corpus(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = FockError> = std::result::Result<T, E>;
