//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by any stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("bundle error: {0}")]
    Bundle(String),

    #[error("filter design error: {0}")]
    Filter(String),

    #[error("windowing error: {0}")]
    Window(String),

    #[error("feature extraction error: {0}")]
    Feature(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("predict error: {0}")]
    Predict(String),

    #[error("task error: {0}")]
    Task(String),

    #[error("statistics error: {0}")]
    Stats(String),

    #[error("synthesis error: {0}")]
    Synth(String),
}

pub type Result<T> = std::result::Result<T, Error>;
