use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("non-finite value in `{field}` at tick {tick}")]
    NonFinite { field: &'static str, tick: u64 },

    #[error("magnet calibration failed: {reason} (residual {residual:.3e})")]
    Calibration { reason: String, residual: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("no tracking samples to compute metrics from")]
    EmptyMetrics,

    #[error("mission deadlock: phase {phase} unchanged for {seconds:.1} s (t = {t:.3} s)")]
    Deadlock { phase: String, seconds: f64, t: f64 },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

/// Scenario file problem, located by dotted key path and (when known) line.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{}{}: {message}", .key_path, .line.map(|l| format!(" (line {l})")).unwrap_or_default())]
pub struct ConfigError {
    pub key_path: String,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(key_path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            key_path: key_path.into(),
            line: None,
            message: message.into(),
        }
    }

    pub fn with_line(mut self, line: Option<usize>) -> Self {
        self.line = line;
        self
    }
}
