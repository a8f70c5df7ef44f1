//! Crate-wide error type and exit-code categories.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular system: pivot or determinant magnitude below 1e-12")]
    SingularSystem,

    #[error("degenerate denominator at ({x}, {y}): point lies on the projective horizon")]
    DegenerateDenominator { x: f64, y: f64 },

    #[error("invalid {name} factor {value}: {reason}")]
    InvalidFactor {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid crop {x},{y} {width}x{height} for frame {frame_width}x{frame_height}")]
    InvalidCrop {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
        frame_width: usize,
        frame_height: usize,
    },

    #[error("clip too short: need {needed} frames, have {available}{}", fmt_video_id(.video_id))]
    ClipTooShort {
        needed: usize,
        available: usize,
        video_id: Option<String>,
    },

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("invalid clip: {0}")]
    InvalidClip(String),

    #[error("scene object leaves the frame at t={frame}")]
    ObjectOutOfBounds { frame: usize },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("no foreground region above threshold")]
    NoObject,

    #[error("{count} disconnected foreground regions, expected exactly one")]
    MultipleObjects { count: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero vector has no direction; cosine similarity undefined")]
    ZeroVector,

    #[error("gallery is empty")]
    EmptyGallery,

    #[error("gave up on sample {sample} after {tries} draws: no source video fits the drawn spec")]
    ExhaustedRetries { sample: usize, tries: usize },

    #[error("bad magic {found:?}, expected {expected:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated or oversized payload: expected {expected} bytes, got {actual}")]
    TruncatedFile { expected: u64, actual: u64 },

    #[error("sample {value} at index {index} outside [0,1]")]
    OutOfRangeSample { index: usize, value: f32 },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("gradient check failed: max relative error {max_rel_error:.3e} >= {threshold:.0e}")]
    GradCheckFailed { max_rel_error: f64, threshold: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_video_id(id: &Option<String>) -> String {
    match id {
        Some(id) => format!(" (video {id})"),
        None => String::new(),
    }
}

/// Process exit codes: 0 ok, 1 usage, 2 data error, 3 numerical failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Numerical,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Usage => 1,
            ErrorCategory::Data => 2,
            ErrorCategory::Numerical => 3,
        }
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::SingularSystem
            | Error::DegenerateDenominator { .. }
            | Error::GradCheckFailed { .. } => ErrorCategory::Numerical,
            _ => ErrorCategory::Data,
        }
    }
}

impl Error {
    /// Attach a source video id to a `ClipTooShort`; other errors pass through.
    pub fn with_video_id(self, id: &str) -> Error {
        match self {
            Error::ClipTooShort {
                needed, available, ..
            } => Error::ClipTooShort {
                needed,
                available,
                video_id: Some(id.to_string()),
            },
            other => other,
        }
    }
}
