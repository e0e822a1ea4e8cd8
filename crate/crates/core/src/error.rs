use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("unsupported bit depth: {0} (16-bit single-channel depth expected)")]
    UnsupportedBitDepth(u32),

    #[error("dimension mismatch: header declares {expected} samples, file holds {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("manifest {0} lists no frames")]
    EmptyManifest(PathBuf),

    #[error("frame file {0} does not exist")]
    MissingFrame(PathBuf),

    #[error("frame {index} is {found_w}x{found_h}, sequence is {expected_w}x{expected_h}")]
    InconsistentDimensions {
        index: usize,
        expected_w: u32,
        expected_h: u32,
        found_w: u32,
        found_h: u32,
    },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("node {0} is not part of the region graph")]
    NodeNotInGraph(u32),

    #[error("insufficient history: need {needed} frames, have {have}")]
    InsufficientHistory { needed: usize, have: usize },

    #[error("region pair has no displacement, direction undefined")]
    ZeroDisplacement,

    #[error("direction undetermined: difference mask is centred on the region")]
    UndeterminedDirection,

    #[error("box has zero area")]
    ZeroAreaBox,

    #[error("ground truth is empty")]
    EmptyGroundTruth,

    #[error("frame is {found_w}x{found_h}, tracker expects {expected_w}x{expected_h}")]
    FrameSizeMismatch {
        expected_w: u32,
        expected_h: u32,
        found_w: u32,
        found_h: u32,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("image encoding failed: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format { what, detail: detail.into() }
    }
}
