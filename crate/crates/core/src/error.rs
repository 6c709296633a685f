use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("atoms {first} and {second} coincide (separation {separation:e} m)")]
    CoincidentAtoms {
        first: usize,
        second: usize,
        separation: f64,
    },

    #[error("atom index {index} out of range for an array of {len}")]
    IndexOutOfRange { index: usize, len: usize },

    /// The integrator could not continue. `last_state` is the last accepted
    /// state at time `t`.
    #[error("integration failed at t = {t:e}: {reason}")]
    Integration {
        t: f64,
        reason: String,
        last_state: Vec<Complex64>,
    },

    #[error("singular linear system")]
    Singular,

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
