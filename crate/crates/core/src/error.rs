use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Not enough observations to form the requested estimate.
    #[error("no estimate: {0}")]
    NoEstimate(String),

    /// The control-variate samples carry no information (zero spread around
    /// the known mean, or a rank-deficient second-moment system).
    #[error("degenerate control variates: {0}")]
    DegenerateCv(String),

    /// An index was requested before the warm-start phase produced enough
    /// samples for positive degrees of freedom.
    #[error("warm start incomplete: {0}")]
    WarmStartIncomplete(String),

    /// Invalid experiment configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
