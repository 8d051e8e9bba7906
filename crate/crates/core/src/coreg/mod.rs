//! Coarse spatial coregistration: bands are moved onto a reference band by
//! fixed, precomputed per-detector shifts instead of per-image matching.

mod apply;
mod clahe;
mod correlate;
mod estimate;
mod shift;

pub use apply::{apply_coarse_coregistration, translate, Coregistered, FillPolicy};
pub use clahe::{equalize_contrast, equalize_with, ClaheConfig};
pub use correlate::{phase_correlate, Translation};
pub use estimate::{estimate_shift_coefficients, trim_outliers, EstimationConfig, PairSample};
pub use shift::{
    b8a_b11_reference_table, compose_shift, lookup_shift, order_index, ShiftCoefficientSet, ShiftTable,
    ShiftVector, B8A_B11_OFFSETS, BAND_ORDER,
};
