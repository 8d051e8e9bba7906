//! Raster grids, band identifiers and the `.rawb` band file format.
//!
//! A `.rawb` file is a 16-byte header followed by the samples:
//!
//! | offset | size | content                         |
//! |--------|------|---------------------------------|
//! | 0      | 4    | magic `RAWB`                    |
//! | 4      | 4    | width, u32 LE                   |
//! | 8      | 4    | height, u32 LE                  |
//! | 12     | 4    | bits per sample, u32 LE (16)    |
//! | 16     | 2·wh | samples, u16 LE, row-major      |
//!
//! Row 0 is the first scanned line.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RAWB";
const HEADER_LEN: usize = 16;

/// A dense row-major 2-D grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// Unsigned 16-bit band raster holding raw digital numbers.
pub type Raster = Grid<u16>;
/// Real-valued plane, e.g. TOA reflectance.
pub type Plane = Grid<f64>;
/// Boolean mask.
pub type Mask = Grid<bool>;

impl<T> Grid<T> {
    pub fn from_vec(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster(format!(
                "dimensions must be positive, got {height}x{width}"
            )));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::InvalidRaster("dimensions overflow".into()))?;
        if data.len() != expected {
            return Err(Error::InvalidRaster(format!(
                "{height}x{width} grid needs {expected} samples, got {}",
                data.len()
            )));
        }
        Ok(Grid {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(width.saturating_mul(height));
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::from_vec(height, width, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.width..(r + 1) * self.width]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Option<&T> {
        (r < self.height && c < self.width).then(|| &self.data[r * self.width + c])
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Copy> Grid<T> {
    pub fn filled(height: usize, width: usize, value: T) -> Result<Self> {
        Self::from_vec(height, width, vec![value; width.saturating_mul(height)])
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> T {
        self.data[r * self.width + c]
    }
}

impl<T> std::ops::Index<(usize, usize)> for Grid<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        assert!(r < self.height && c < self.width, "({r}, {c}) out of bounds");
        &self.data[r * self.width + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Grid<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        assert!(r < self.height && c < self.width, "({r}, {c}) out of bounds");
        &mut self.data[r * self.width + c]
    }
}

/// Sentinel-2 MSI spectral band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BandId {
    B01,
    B02,
    B03,
    B04,
    B05,
    B06,
    B07,
    B08,
    B8A,
    B09,
    B10,
    B11,
    B12,
}

impl BandId {
    pub const ALL: [BandId; 13] = [
        BandId::B01,
        BandId::B02,
        BandId::B03,
        BandId::B04,
        BandId::B05,
        BandId::B06,
        BandId::B07,
        BandId::B08,
        BandId::B8A,
        BandId::B09,
        BandId::B10,
        BandId::B11,
        BandId::B12,
    ];

    /// Ground sampling distance in meters per pixel.
    pub const fn resolution(self) -> f64 {
        match self {
            BandId::B02 | BandId::B03 | BandId::B04 | BandId::B08 => 10.0,
            BandId::B05 | BandId::B06 | BandId::B07 | BandId::B8A | BandId::B11 | BandId::B12 => 20.0,
            BandId::B01 | BandId::B09 | BandId::B10 => 60.0,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            BandId::B01 => "B01",
            BandId::B02 => "B02",
            BandId::B03 => "B03",
            BandId::B04 => "B04",
            BandId::B05 => "B05",
            BandId::B06 => "B06",
            BandId::B07 => "B07",
            BandId::B08 => "B08",
            BandId::B8A => "B8A",
            BandId::B09 => "B09",
            BandId::B10 => "B10",
            BandId::B11 => "B11",
            BandId::B12 => "B12",
        }
    }
}

impl fmt::Display for BandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BandId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BandId::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidBandId(s.to_string()))
    }
}

/// Rectangular pixel window, `rows x cols` starting at `(row0, col0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Window {
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Window {
    pub const fn new(row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        Window {
            row0,
            col0,
            rows,
            cols,
        }
    }

    pub fn full<T>(grid: &Grid<T>) -> Self {
        Window::new(0, 0, grid.height(), grid.width())
    }

    pub fn fits(&self, height: usize, width: usize) -> bool {
        self.rows > 0
            && self.cols > 0
            && self.row0.checked_add(self.rows).is_some_and(|end| end <= height)
            && self.col0.checked_add(self.cols).is_some_and(|end| end <= width)
    }
}

/// Copies the pixels under `window` into a new grid.
pub fn crop<T: Copy>(grid: &Grid<T>, window: Window) -> Result<Grid<T>> {
    if !window.fits(grid.height(), grid.width()) {
        return Err(Error::WindowOutOfBounds {
            window,
            height: grid.height(),
            width: grid.width(),
        });
    }
    let mut data = Vec::with_capacity(window.rows * window.cols);
    for r in window.row0..window.row0 + window.rows {
        data.extend_from_slice(&grid.row(r)[window.col0..window.col0 + window.cols]);
    }
    Grid::from_vec(window.rows, window.cols, data)
}

/// Crops a band raster.
pub fn crop_band(raster: &Raster, window: Window) -> Result<Raster> {
    crop(raster, window)
}

pub fn encode_rawb(raster: &Raster) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + raster.as_slice().len() * 2);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(raster.width() as u32).to_le_bytes());
    out.extend_from_slice(&(raster.height() as u32).to_le_bytes());
    out.extend_from_slice(&16u32.to_le_bytes());
    for &s in raster.as_slice() {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

pub fn decode_rawb(bytes: &[u8], path: &Path) -> Result<Raster> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic { path: path.into() });
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4-byte slice"));
    let width = word(4) as usize;
    let height = word(8) as usize;
    let bits = word(12);
    if bits != 16 {
        return Err(Error::UnsupportedBitDepth {
            path: path.into(),
            bits,
        });
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidRaster(format!(
            "{}: header declares {height}x{width}",
            path.display()
        )));
    }
    let expected = width * height;
    let payload = &bytes[HEADER_LEN..];
    let found = payload.len() / 2;
    if found < expected {
        return Err(Error::Truncated {
            path: path.into(),
            expected,
            found,
        });
    }
    if payload.len() != expected * 2 {
        return Err(Error::TrailingData {
            path: path.into(),
            found: payload.len() - expected * 2,
        });
    }
    let samples = payload
        .chunks_exact(2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .collect();
    Grid::from_vec(height, width, samples)
}

pub fn read_rawb(path: &Path) -> Result<Raster> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_rawb(&bytes, path)
}

pub fn write_rawb(raster: &Raster, path: &Path) -> Result<()> {
    std::fs::write(path, encode_rawb(raster)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counting(h: usize, w: usize) -> Raster {
        Raster::from_fn(h, w, |r, c| (r * w + c) as u16).unwrap()
    }

    #[test]
    fn rejects_mismatched_sample_count() {
        assert!(Raster::from_vec(8, 8, vec![0; 63]).is_err());
        assert!(Raster::from_vec(0, 8, vec![]).is_err());
    }

    #[test]
    fn full_window_is_identity() {
        let r = counting(5, 7);
        assert_eq!(crop_band(&r, Window::full(&r)).unwrap(), r);
    }

    #[test]
    fn single_pixel_window() {
        let r = counting(5, 7);
        let c = crop_band(&r, Window::new(0, 0, 1, 1)).unwrap();
        assert_eq!(c.as_slice(), &[r[(0, 0)]]);
    }

    #[test]
    fn two_by_two_window_of_counting_pattern() {
        // value = r * 7 + c, window at (2, 3)
        let r = counting(5, 7);
        let c = crop_band(&r, Window::new(2, 3, 2, 2)).unwrap();
        assert_eq!(c.as_slice(), &[17, 18, 24, 25]);
    }

    #[test]
    fn out_of_bounds_window() {
        let r = counting(5, 7);
        assert!(matches!(
            crop_band(&r, Window::new(4, 0, 2, 1)),
            Err(Error::WindowOutOfBounds { .. })
        ));
        assert!(crop_band(&r, Window::new(0, 0, 0, 1)).is_err());
        assert!(crop_band(&r, Window::new(0, usize::MAX, 1, 1)).is_err());
    }

    #[test]
    fn band_ids_parse_and_resolve() {
        for b in BandId::ALL {
            assert_eq!(b.name().parse::<BandId>().unwrap(), b);
        }
        assert_eq!(BandId::B8A.resolution(), 20.0);
        assert_eq!(BandId::B10.resolution(), 60.0);
        assert_eq!(BandId::B08.resolution(), 10.0);
        assert!("B13".parse::<BandId>().is_err());
        assert!("b02".parse::<BandId>().is_err());
    }

    #[test]
    fn rawb_decoding_errors() {
        let p = Path::new("B02.rawb");
        let mut bytes = encode_rawb(&counting(8, 8));
        assert!(decode_rawb(&bytes, p).is_ok());

        bytes.truncate(bytes.len() - 2);
        assert!(matches!(
            decode_rawb(&bytes, p),
            Err(Error::Truncated {
                expected: 64,
                found: 63,
                ..
            })
        ));

        let mut bad = encode_rawb(&counting(2, 2));
        bad[0] = b'X';
        assert!(matches!(decode_rawb(&bad, p), Err(Error::BadMagic { .. })));

        let mut depth = encode_rawb(&counting(2, 2));
        depth[12] = 8;
        assert!(matches!(
            decode_rawb(&depth, p),
            Err(Error::UnsupportedBitDepth { bits: 8, .. })
        ));

        let mut extra = encode_rawb(&counting(2, 2));
        extra.push(0);
        assert!(matches!(decode_rawb(&extra, p), Err(Error::TrailingData { .. })));
    }
}
