//! Processing of raw pushbroom multispectral granules: coarse band
//! coregistration from precomputed shift tables, coarse georeferencing of
//! band footprints, L1C-guided thermal hotspot labelling and patch
//! decomposition, plus a registration latency harness.

pub mod bench;
pub mod coreg;
pub mod error;
pub mod georef;
pub mod granule;
pub mod hotspot;
pub mod kv;
pub mod l1c;
pub mod patch;
pub mod pipeline;
pub mod raster;
pub mod warp;

pub use error::{Error, Result};
pub use granule::{Detector, Granule, GranuleMetadata, Satellite};
pub use raster::{BandId, Mask, Plane, Raster, Window};
