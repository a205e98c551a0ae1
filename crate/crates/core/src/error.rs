use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("image data length {len} does not match {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },
    #[error("non-finite pixel at index {0}")]
    NonFinitePixel(usize),
    #[error("image too small for gradient kernel")]
    TooSmallForGradient,
    #[error("image too small for feature extraction: {rows}x{cols} (minimum 8x8)")]
    TooSmallForFeatures { rows: usize, cols: usize },
    #[error("too many decomposition levels for image size")]
    TooManyLevels,
    #[error("degenerate subband")]
    DegenerateSubband,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("feature set mismatch: {0}")]
    FeatureSetMismatch(String),
    #[error("invalid alpha")]
    InvalidAlpha,
    #[error("non-finite feature")]
    NonFiniteFeature,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported payload version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt payload: {0}")]
    CorruptPayload(String),
    #[error("degenerate ranking")]
    DegenerateRanking,
    #[error("degenerate input")]
    DegenerateInput,
    #[error("insufficient data: need at least {needed} records, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("blur too large")]
    BlurTooLarge,
    #[error("block too large")]
    BlockTooLarge,
    #[error("shift too large")]
    ShiftTooLarge,
    #[error("invalid distortion spec {0:?}")]
    InvalidDistortion(String),
    #[error("unknown distortion kind {0:?}")]
    UnknownDistortion(String),
    #[error("cannot read image {path}: {reason}")]
    ImageRead { path: PathBuf, reason: String },
    #[error("cannot write image {path}: {reason}")]
    ImageWrite { path: PathBuf, reason: String },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("row {pair_id}: {source}")]
    Row {
        pair_id: String,
        #[source]
        source: Box<Error>,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
