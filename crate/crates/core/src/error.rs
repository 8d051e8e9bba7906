use std::path::PathBuf;

use crate::raster::BandId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: bad magic, expected RAWB")]
    BadMagic { path: PathBuf },

    #[error("{path}: unsupported bits per sample {bits}, expected 16")]
    UnsupportedBitDepth { path: PathBuf, bits: u32 },

    #[error("{path}: truncated sample data, header declares {expected} samples but file holds {found}")]
    Truncated {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("{path}: {found} trailing bytes after sample data")]
    TrailingData { path: PathBuf, found: usize },

    #[error("{path}: unknown band id `{id}`")]
    UnknownBand { path: PathBuf, id: String },

    #[error("unknown band id `{0}`")]
    InvalidBandId(String),

    #[error("{path}: key `{key}`: {reason}")]
    Metadata {
        path: PathBuf,
        key: String,
        reason: String,
    },

    #[error("{path}: no band files found")]
    NoBands { path: PathBuf },

    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    #[error("window {window:?} does not fit in a {height}x{width} raster")]
    WindowOutOfBounds {
        window: crate::raster::Window,
        height: usize,
        width: usize,
    },

    #[error("invalid granule: {0}")]
    InvalidGranule(String),

    #[error("band {0} is not present")]
    MissingBand(BandId),

    #[error("no shift coefficients for {satellite} detector {detector}")]
    MissingShiftSet { satellite: String, detector: u8 },

    #[error("shift coefficient {from}->{to} missing for {satellite} detector {detector}")]
    MissingCoefficient {
        satellite: String,
        detector: u8,
        from: BandId,
        to: BandId,
    },

    #[error("shift table line {line}: {reason}")]
    ShiftTableSyntax { line: usize, reason: String },

    #[error("shift ({along}, {across}) px is not smaller than the {height}x{width} band {band}")]
    DegenerateShift {
        band: BandId,
        along: i64,
        across: i64,
        height: usize,
        width: usize,
    },

    #[error("no texture: input raster has zero variance")]
    NoTexture,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("every estimate for {from}->{to} was rejected as an outlier")]
    AllRejected { from: BandId, to: BandId },

    #[error("invalid coordinate: {0}")]
    InvalidCoordinate(String),

    #[error("geotransform is not invertible")]
    SingularTransform,

    #[error("tiles are inconsistent: {0}")]
    InconsistentTiles(String),

    #[error("footprint lon {foot_lon:?} lat {foot_lat:?} does not overlap mosaic lon {mosaic_lon:?} lat {mosaic_lat:?}")]
    NoOverlap {
        foot_lon: (f64, f64),
        foot_lat: (f64, f64),
        mosaic_lon: (f64, f64),
        mosaic_lat: (f64, f64),
    },

    #[error("non-finite reflectance at row {row}, col {col}")]
    NonFiniteReflectance { row: usize, col: usize },

    #[error("collinear correspondence points")]
    Collinear,

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
