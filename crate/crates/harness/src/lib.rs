//! Configuration, persistence and experiment drivers around `axiring-core`.

pub mod config;
pub mod io;
pub mod run;
pub mod selftest;
pub mod sweep;

use std::path::Path;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Core(#[from] axiring_core::Error),
    #[error("malformed file {path}: {message}")]
    Format { path: String, message: String },
    #[error("recomputed diagnostics differ from {path}: {message}")]
    Mismatch { path: String, message: String },
    #[error("selftest failed: {0}")]
    Selftest(String),
}

impl HarnessError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), message: e.to_string() }
    }

    /// Maps a core validation error to a config error. Parameter errors
    /// name their own field; others are attributed to `section`.
    pub fn field(section: &str, e: axiring_core::Error) -> Self {
        match e {
            axiring_core::Error::InvalidParameter { name, reason } => {
                let path = if section.is_empty() || section == "options" && is_top_level(name) {
                    name.to_string()
                } else {
                    format!("{section}.{name}")
                };
                Self::Schema { path, message: reason }
            }
            other => Self::Schema { path: section.to_string(), message: other.to_string() },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Schema { .. } => "config",
            Self::Io { .. } => "io",
            Self::Core(_) => "numerical",
            Self::Format { .. } => "format",
            Self::Mismatch { .. } => "mismatch",
            Self::Selftest(_) => "selftest",
        }
    }

    /// Machine-readable error report.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            path: Option<&'a str>,
            message: String,
        }
        let path = match self {
            Self::Schema { path, .. } | Self::Io { path, .. } | Self::Format { path, .. } | Self::Mismatch { path, .. } => {
                Some(path.as_str())
            }
            _ => None,
        };
        serde_json::to_string(&Report { error: self.kind(), path, message: self.to_string() })
            .unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.kind()))
    }
}

fn is_top_level(name: &str) -> bool {
    matches!(name, "epsilon" | "gamma" | "t_final")
}
