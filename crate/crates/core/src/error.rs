use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// A numerical routine failed to reach its target accuracy.
    #[error("numeric failure in {op}: {detail}")]
    Numeric { op: &'static str, detail: String },

    /// A schedule could not be assigned to an asymptotic regime.
    #[error("classification error: {0}")]
    Classification(String),

    /// An invalid or inconsistent study configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Two exact oracles disagree beyond the allowed tolerance.
    #[error("oracle disagreement at n={n}, x={x}, y={y}: orthant log G_n={orthant}, survival log G_n={survival}")]
    OracleDisagreement {
        n: u64,
        x: f64,
        y: f64,
        orthant: f64,
        survival: f64,
    },

    /// Malformed schedule expression or table.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn numeric(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Numeric {
            op,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
