//! Synthetic granules, tiles and tables shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::TimeZone;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rawband::coreg::{ShiftCoefficientSet, ShiftTable, ShiftVector, BAND_ORDER};
use rawband::georef::GeoPoint;
use rawband::l1c::{GeoTransform, L1CTile, DEFAULT_QUANTIFICATION};
use rawband::{BandId, Detector, Granule, GranuleMetadata, Raster, Satellite};

pub const SCENE_ROWS: usize = 60;
pub const SCENE_COLS: usize = 50;
/// 20 m L1C pixel size in degrees.
pub const L1C_PX: f64 = 0.001;
pub const TILE_WEST: f64 = 14.99;
pub const TILE_NORTH: f64 = 38.01;
pub const TILE_ROWS: usize = 90;
pub const TILE_COLS: usize = 80;
/// Raw granule corners: north-up, 0.06 x 0.05 degrees.
pub const NORTH: f64 = 38.0;
pub const SOUTH: f64 = 37.94;
pub const WEST: f64 = 15.0;
pub const EAST: f64 = 15.05;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn noise(h: usize, w: usize, seed: u64) -> Raster {
    let mut r = rng(seed);
    Raster::from_fn(h, w, |_, _| r.gen_range(1..4096)).unwrap()
}

/// Smooth-ish texture: noise averaged over `k x k` blocks and upsampled,
/// so that resampled copies keep their structure.
pub fn blocky(h: usize, w: usize, k: usize, seed: u64) -> Raster {
    let coarse = noise(h.div_ceil(k), w.div_ceil(k), seed);
    Raster::from_fn(h, w, |r, c| coarse.at(r / k, c / k)).unwrap()
}

pub fn metadata(satellite: Satellite, detector: u8) -> GranuleMetadata {
    let p = |lat, lon| GeoPoint::new(lat, lon).unwrap();
    GranuleMetadata::new(
        satellite,
        Detector::new(detector).unwrap(),
        chrono::Utc.with_ymd_and_hms(2021, 8, 12, 9, 40, 0).unwrap(),
        [p(NORTH, WEST), p(NORTH, EAST), p(SOUTH, WEST), p(SOUTH, EAST)],
    )
    .unwrap()
}

/// Every adjacent link present and zero.
pub fn zero_table(satellite: Satellite, detector: u8) -> ShiftTable {
    let mut set = ShiftCoefficientSet::new(satellite, Detector::new(detector).unwrap());
    for k in 0..BAND_ORDER.len() - 1 {
        let from = BAND_ORDER[k];
        set.insert(from, BAND_ORDER[k + 1], ShiftVector::zero(from.resolution()))
            .unwrap();
    }
    let mut t = ShiftTable::new();
    t.insert(set);
    t
}

/// Rectangle on the 20 m L1C grid, in tile pixels.
#[derive(Clone, Copy, Debug)]
pub struct Block {
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Block {
    pub fn contains(&self, r: usize, c: usize) -> bool {
        (self.row0..self.row0 + self.rows).contains(&r) && (self.col0..self.col0 + self.cols).contains(&c)
    }
}

/// Hot pixels inside the raw footprint: the footprint spans tile rows
/// 10..70 and cols 10..60.
pub const INSIDE: Block = Block {
    row0: 30,
    col0: 30,
    rows: 4,
    cols: 4,
};

/// South of the footprint, inside the tile.
pub const OUTSIDE: Block = Block {
    row0: 78,
    col0: 30,
    rows: 4,
    cols: 4,
};

/// Eight hot pixels, one short of the cluster threshold.
pub const EIGHT: Block = Block {
    row0: 30,
    col0: 30,
    rows: 2,
    cols: 4,
};

/// Cold background `(ρ8A, ρ11, ρ12)` and a pixel passing the α test.
pub const COLD: (f64, f64, f64) = (0.20, 0.15, 0.10);
pub const HOT: (f64, f64, f64) = (0.20, 0.25, 0.40);

pub fn tile_with(blocks: &[Block]) -> L1CTile {
    let gt = GeoTransform::north_up(TILE_WEST, TILE_NORTH, L1C_PX / 2.0, L1C_PX / 2.0).unwrap();
    let band = |pick: fn((f64, f64, f64)) -> f64| {
        Raster::from_fn(TILE_ROWS, TILE_COLS, |r, c| {
            let v = if blocks.iter().any(|b| b.contains(r, c)) { HOT } else { COLD };
            (pick(v) * DEFAULT_QUANTIFICATION).round() as u16
        })
        .unwrap()
    };
    let bands = BTreeMap::from([
        (BandId::B8A, band(|v| v.0)),
        (BandId::B11, band(|v| v.1)),
        (BandId::B12, band(|v| v.2)),
    ]);
    L1CTile::new("T33SWB", gt, DEFAULT_QUANTIFICATION, bands).unwrap()
}

pub fn scene_granule(seed: u64) -> Granule {
    let bands = BTreeMap::from([
        (BandId::B8A, noise(SCENE_ROWS, SCENE_COLS, seed)),
        (BandId::B11, noise(SCENE_ROWS, SCENE_COLS, seed + 1)),
        (BandId::B12, noise(SCENE_ROWS, SCENE_COLS, seed + 2)),
    ]);
    Granule::new(metadata(Satellite::S2A, 1), bands).unwrap()
}

/// Stacked-granule fixture for registration: B11 and B12 are copies of B8A
/// translated by the given shifts relative to B8A (B8A at index 0).
pub fn translated_granule(
    satellite: Satellite,
    detector: u8,
    base: &Raster,
    shifts: &[(BandId, (i64, i64))],
) -> Granule {
    let mut bands = BTreeMap::from([(BandId::B8A, base.clone())]);
    for &(band, (al, ac)) in shifts {
        bands.insert(band, rawband::coreg::translate(base, al, ac));
    }
    Granule::new(metadata(satellite, detector), bands).unwrap()
}

pub fn to_rows(r: &Raster) -> Vec<Vec<f64>> {
    (0..r.height()).map(|y| r.row(y).iter().map(|&v| f64::from(v)).collect()).collect()
}

/// Every satellite and detector: all links zero except the B11..B8A chain,
/// which carries the measured B8A-B11 offsets. B8A is then displaced from
/// B02 by those offsets.
pub fn full_reference_table() -> ShiftTable {
    let mut t = ShiftTable::new();
    for (sat, det, along, across) in rawband::coreg::B8A_B11_OFFSETS {
        let zero = zero_table(sat, det);
        let set = zero
            .get(sat, Detector::new(det).unwrap())
            .unwrap()
            .clone()
            .with_composite(BandId::B8A, BandId::B11, along, across)
            .unwrap();
        t.insert(set);
    }
    t
}
