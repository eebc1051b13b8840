use std::path::PathBuf;

/// Errors raised anywhere in the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("insufficient points: need {needed}, have {available}")]
    InsufficientPoints { needed: usize, available: usize },
    #[error("point cloud has zero extent")]
    DegenerateExtent,
    #[error("coordinate {value} outside the unit cube")]
    NotNormalized { value: f64 },
    #[error("non-finite coordinate at point {index}")]
    NonFinite { index: usize },
    #[error("invalid cloud: {0}")]
    InvalidCloud(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("body truncated: expected {expected} vertices, read {read}")]
    TruncatedBody { expected: usize, read: usize },
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("i/o error{}: {source}", path.as_ref().map(|p| format!(" on {}", p.display())).unwrap_or_default())]
    Io {
        path: Option<PathBuf>,
        #[source]
        source: std::io::Error,
    },
    #[error("read past end of stream")]
    EndOfStream,
    #[error("invalid bit width {0}")]
    InvalidWidth(u32),
    #[error("value {value:#x} does not fit in {width} bits")]
    ValueTooWide { value: u64, width: u32 },

    #[error("weight shape mismatch: {0}")]
    WeightShape(String),
    #[error("feature dimension {0} is below 2")]
    FeatureDimTooSmall(usize),
    #[error("target size {target} is smaller than sampled size {sampled}")]
    TargetTooSmall { target: usize, sampled: usize },
    #[error("invalid ratio {0}")]
    InvalidRatio(f64),

    #[error("voxel {voxel:?} out of range for depth {depth}")]
    VoxelOutOfRange { voxel: [u32; 3], depth: u8 },
    #[error("decode error: {0}")]
    Decode(String),

    #[error("unsupported constellation order {0}")]
    UnsupportedOrder(usize),
    #[error("length error: {0}")]
    Length(String),
    #[error("invalid probability row {row}: {reason}")]
    InvalidDistribution { row: usize, reason: String },
    #[error("non-finite feature at position {0}")]
    InvalidFeature(usize),
    #[error("partition point {point} outside 0..={count}")]
    Partition { point: usize, count: usize },
    #[error("MCS table is empty")]
    EmptyTable,

    #[error("reference normals required")]
    NormalsRequired,
    #[error("invalid PSNR peak {0}")]
    InvalidPeak(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("missing column {0:?}")]
    Column(String),
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: Some(path.into()),
            source,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(source: std::io::Error) -> Self {
        Error::Io { path: None, source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
