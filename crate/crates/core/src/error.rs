use thiserror::Error;

/// Errors raised by the capacity model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A basis pair or leg produced zero total gain, so its error rate is 0/0.
    #[error("no clicks: total gain is zero for {context}")]
    NoClicks { context: String },

    #[error("linear program is infeasible: {0}")]
    Infeasible(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("no positive capacity anywhere on [{lo_db}, {hi_db}] dB")]
    AlwaysInsecure { lo_db: f64, hi_db: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Checks that `value` is a finite probability.
pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(invalid(name, format!("{value} is not in [0, 1]")))
    }
}
