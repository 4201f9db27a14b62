use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A series tail could not be certified at the requested horizon.
    #[error("horizon {horizon} too small: {reason}")]
    HorizonTooSmall { horizon: u64, reason: String },

    /// The modeled boundary shell does not cover the displacement of a
    /// tested group element. The engine never silently truncates.
    #[error("shell radius {radius} does not cover displacement {needed}")]
    ShellTooSmall { radius: i64, needed: i64 },

    #[error("invalid cell index: {0}")]
    InvalidCell(String),

    /// Evidence is insufficient to decide; never a guess.
    #[error("undetermined: {0}")]
    Undetermined(String),

    /// A certificate could not be established; carries the first witness
    /// index at which the bound failed.
    #[error("certificate failure at witness {witness}: {reason}")]
    CertificateFailure { witness: u64, reason: String },

    #[error("serialization error: {0}")]
    Serialization(String),
}
