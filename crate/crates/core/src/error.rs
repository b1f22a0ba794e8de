use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: dimension mismatch, non-Hermitian matrix, bad range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Push onto a relay buffer that is already at capacity.
    #[error("buffer full: relay {relay} holds {capacity} blocks")]
    BufferFull { relay: usize, capacity: usize },

    /// Pop from a relay buffer with no stored blocks.
    #[error("buffer empty: relay {relay}")]
    BufferEmpty { relay: usize },

    /// Zero or otherwise unusable adjustable code vector.
    #[error("degenerate code: {0}")]
    DegenerateCode(String),

    /// Zero channel where a nonzero one is required.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    /// A statistic could not be estimated from the available data.
    #[error("not estimable: {0}")]
    NotEstimable(String),

    /// Scenario configuration violates a constraint.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
