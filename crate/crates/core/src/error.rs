use std::path::PathBuf;

/// Errors produced anywhere in the counting pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic: expected \"RADC\", found {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported RADC version {0}")]
    UnsupportedVersion(u16),
    #[error("file truncated: {0}")]
    Truncated(String),
    #[error("dimension mismatch: header declares {declared} values, payload holds {found}")]
    DimensionMismatch { declared: usize, found: usize },
    #[error("dimension {name}={value} does not fit the RADC header")]
    DimensionOverflow { name: &'static str, value: usize },
    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),
    #[error("window [{start}, {start}+{length}) out of range for {frames} frames")]
    InvalidWindow {
        start: usize,
        length: usize,
        frames: usize,
    },
    #[error("cube has no values")]
    EmptyCube,
    #[error("need at least {needed} frames, got {got}")]
    NotEnoughFrames { needed: usize, got: usize },
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("negative value {value} at index {index}")]
    NegativeValue { index: usize, value: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("solver did not converge after {iterations} iterations (max KKT violation {violation:.3e})")]
    NonConvergence { iterations: usize, violation: f64 },
    #[error("JSON error in {context}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("CSV error in {context}")]
    Csv {
        context: String,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Display text followed by every underlying cause.
    pub fn full_message(&self) -> String {
        let mut s = self.to_string();
        let mut cur = std::error::Error::source(self);
        while let Some(e) = cur {
            s.push_str(": ");
            s.push_str(&e.to_string());
            cur = e.source();
        }
        s
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn csv(context: impl Into<String>, source: csv::Error) -> Self {
        Error::Csv {
            context: context.into(),
            source,
        }
    }
}
