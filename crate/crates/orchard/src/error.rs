//! Crate-wide error type.

use std::path::PathBuf;

/// Everything that can go wrong while building or writing a dataset.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violated its documented bound. `field` names the offending
    /// recipe/params field so the message is actionable.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: String, reason: String },

    /// Malformed Radiance HDR input; `offset` is the byte position the
    /// decoder was at when it gave up.
    #[error("HDR format error at byte {offset}: {reason}")]
    HdrFormat { offset: usize, reason: String },

    #[error("scene assembly failed: {0}")]
    Assembly(String),

    /// `look_at` saw a forward direction parallel to the up hint; callers
    /// retry with a fallback axis.
    #[error("look_at is degenerate: forward is parallel to the up hint")]
    DegenerateLookAt,

    #[error("recipe syntax error: {0}")]
    RecipeSyntax(#[from] serde_json::Error),

    #[error("recipe error: {0}")]
    Recipe(String),

    #[error("asset not found: {path}")]
    AssetNotFound { path: PathBuf },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image encoding failed for {path}: {source}")]
    Png {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub fn invalid_param(field: impl Into<String>, reason: impl Into<String>) -> Error {
        Error::InvalidParam {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
