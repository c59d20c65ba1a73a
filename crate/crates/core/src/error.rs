use std::fmt;
use std::path::PathBuf;

/// One of the three binning regions, labelled by the outcome `I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Region {
    #[serde(rename = "-1")]
    Minus,
    #[serde(rename = "0")]
    Middle,
    #[serde(rename = "+1")]
    Plus,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Minus, Region::Middle, Region::Plus];

    pub fn label(self) -> &'static str {
        match self {
            Region::Minus => "-1",
            Region::Middle => "0",
            Region::Plus => "+1",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I={}", self.label())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("truncation interval [{lo}, {hi}] is degenerate")]
    DegenerateInterval { lo: f64, hi: f64 },

    #[error("normal mass on [{lo}, {hi}] is below 1e-300")]
    NegligibleMass { lo: f64, hi: f64 },

    #[error("region {region} carries no probability mass")]
    EmptyRegion { region: Region },

    #[error("region {region} has {count} samples, at least {required} are required")]
    InsufficientRegionSamples {
        region: Region,
        count: usize,
        required: usize,
    },

    #[error("lhs never crosses 1 below the search cap S = {cap}")]
    BracketNotFound { cap: f64 },

    #[error("series is empty")]
    EmptySeries,

    #[error("malformed series header: {0}")]
    MalformedHeader(String),

    #[error("record {index}: {reason}")]
    BadSample { index: usize, reason: String },

    #[error("unsupported schema version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("malformed document: {0}")]
    MalformedDocument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
