use thiserror::Error;

/// Errors raised by the equilibrium engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter record violates a model invariant.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// An argument lies outside the domain of the operation.
    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// The requested closed form or region map only exists for a restricted
    /// configuration (uniform sensitivity, equal benefits, uncongested WiFi).
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A bracketed search was handed an interval without a sign change.
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value,
            domain: "[0, 1]",
        })
    }
}
