use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid config value for `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("degenerate Mach number {mach} (must stay away from 0 and +-1)")]
    DegenerateMach { mach: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("iteration diverged after {iterations} steps (growth factor {growth:.3e})")]
    Divergence { iterations: usize, growth: f64 },

    #[error("iteration stalled after {iterations} steps (last update {last:.3e})")]
    NotConverged { iterations: usize, last: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { key: key.into(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
