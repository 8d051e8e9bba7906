//! Contrast-limited adaptive histogram equalization for 16-bit rasters.
//!
//! Histograms are built over `bins` levels spanning the raster's own
//! `[min, max]` range, so a tile of a few dozen pixels does not need a
//! 65536-entry histogram. Per-tile mappings are bilinearly interpolated
//! between tile centres and the result is stretched to the full u16 range.

use crate::error::{Error, Result};
use crate::raster::Raster;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClaheConfig {
    /// Tile edge in pixels.
    pub tile_size: usize,
    /// Histogram clip limit as a multiple of the mean bin count.
    pub clip_limit: f64,
    /// Maximum number of histogram levels.
    pub bins: usize,
}

impl Default for ClaheConfig {
    fn default() -> Self {
        ClaheConfig {
            tile_size: 8,
            clip_limit: 2.0,
            bins: 256,
        }
    }
}

/// Equalizes `raster` with square tiles of `tile` pixels and clip ratio `clip`.
///
/// Constant rasters are returned unchanged. A raster smaller than one tile in
/// either direction falls back to global histogram equalization.
pub fn equalize_contrast(raster: &Raster, tile: usize, clip: f64) -> Result<Raster> {
    equalize_with(
        raster,
        &ClaheConfig {
            tile_size: tile,
            clip_limit: clip,
            ..ClaheConfig::default()
        },
    )
}

pub fn equalize_with(raster: &Raster, config: &ClaheConfig) -> Result<Raster> {
    if config.tile_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "CLAHE tile size {} < 2",
            config.tile_size
        )));
    }
    if !(config.clip_limit.is_finite() && config.clip_limit > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "CLAHE clip limit {} must be positive",
            config.clip_limit
        )));
    }
    if config.bins < 2 {
        return Err(Error::InvalidParameter("CLAHE needs at least 2 bins".into()));
    }

    let samples = raster.as_slice();
    let lo = *samples.iter().min().expect("non-empty raster");
    let hi = *samples.iter().max().expect("non-empty raster");
    if lo == hi {
        return Ok(raster.clone());
    }
    let range = u64::from(hi - lo);
    let nbins = config.bins.min(range as usize + 1);
    let bin_of = |v: u16| (u64::from(v - lo) * (nbins as u64 - 1) / range) as usize;
    let bins: Vec<u16> = samples.iter().map(|&v| bin_of(v) as u16).collect();

    let (h, w) = raster.dims();
    let tile = config.tile_size;
    let mapped = if h < tile || w < tile {
        global_equalization(&bins, nbins)
    } else {
        tiled_equalization(&bins, h, w, nbins, tile, config.clip_limit)
    };

    let out = stretch(&mapped).unwrap_or_else(|| {
        samples
            .iter()
            .map(|&v| ((u64::from(v - lo) * 65535 + range / 2) / range) as u16)
            .collect()
    });
    Raster::from_vec(h, w, out)
}

fn global_equalization(bins: &[u16], nbins: usize) -> Vec<f32> {
    let mut hist = vec![0f64; nbins];
    for &b in bins {
        hist[b as usize] += 1.0;
    }
    let lut = cdf_lut(&hist);
    bins.iter().map(|&b| lut[b as usize]).collect()
}

fn tiled_equalization(bins: &[u16], h: usize, w: usize, nbins: usize, tile: usize, clip: f64) -> Vec<f32> {
    let ty = h.div_ceil(tile);
    let tx = w.div_ceil(tile);
    let mut luts = Vec::with_capacity(ty * tx);
    let mut hist = vec![0f64; nbins];
    for i in 0..ty {
        for j in 0..tx {
            hist.iter_mut().for_each(|v| *v = 0.0);
            let (r0, r1) = (i * tile, ((i + 1) * tile).min(h));
            let (c0, c1) = (j * tile, ((j + 1) * tile).min(w));
            for r in r0..r1 {
                for &b in &bins[r * w + c0..r * w + c1] {
                    hist[b as usize] += 1.0;
                }
            }
            let n = ((r1 - r0) * (c1 - c0)) as f64;
            clip_histogram(&mut hist, (clip * n / nbins as f64).max(1.0));
            luts.push(cdf_lut(&hist));
        }
    }

    let axis = |p: usize, tiles: usize| {
        let f = (p as f64 + 0.5) / tile as f64 - 0.5;
        let i0 = (f.floor().max(0.0) as usize).min(tiles - 1);
        let i1 = (i0 + 1).min(tiles - 1);
        let t = (f - i0 as f64).clamp(0.0, 1.0) as f32;
        (i0, i1, t)
    };
    let cols: Vec<_> = (0..w).map(|c| axis(c, tx)).collect();
    let mut out = Vec::with_capacity(h * w);
    for r in 0..h {
        let (i0, i1, wy) = axis(r, ty);
        for (c, &(j0, j1, wx)) in cols.iter().enumerate() {
            let b = bins[r * w + c] as usize;
            let top = (1.0 - wx) * luts[i0 * tx + j0][b] + wx * luts[i0 * tx + j1][b];
            let bottom = (1.0 - wx) * luts[i1 * tx + j0][b] + wx * luts[i1 * tx + j1][b];
            out.push((1.0 - wy) * top + wy * bottom);
        }
    }
    out
}

/// Clips every bin at `limit` and spreads the excess evenly over all bins.
fn clip_histogram(hist: &mut [f64], limit: f64) {
    let mut excess = 0.0;
    for v in hist.iter_mut() {
        if *v > limit {
            excess += *v - limit;
            *v = limit;
        }
    }
    let share = excess / hist.len() as f64;
    hist.iter_mut().for_each(|v| *v += share);
}

fn cdf_lut(hist: &[f64]) -> Vec<f32> {
    let total: f64 = hist.iter().sum();
    let mut acc = 0.0;
    hist.iter()
        .map(|&v| {
            acc += v;
            (acc / total) as f32
        })
        .collect()
}

/// Linear stretch to `[0, 65535]`; `None` when all values are equal.
fn stretch(values: &[f32]) -> Option<Vec<u16>> {
    let (lo, hi) = values
        .iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    (hi > lo).then(|| {
        let scale = 65535.0 / f64::from(hi - lo);
        values
            .iter()
            .map(|&v| (f64::from(v - lo) * scale).round() as u16)
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_raster_is_unchanged() {
        let r = Raster::filled(20, 20, 777).unwrap();
        assert_eq!(equalize_contrast(&r, 8, 2.0).unwrap(), r);
    }

    #[test]
    fn two_level_checkerboard_separates_and_keeps_order() {
        let r = Raster::from_fn(32, 32, |r, c| if (r + c) % 2 == 0 { 100 } else { 200 }).unwrap();
        let out = equalize_contrast(&r, 8, 2.0).unwrap();
        let mut levels: Vec<u16> = out.as_slice().to_vec();
        levels.sort_unstable();
        levels.dedup();
        assert_eq!(levels, vec![0, 65535]);
        for (a, b) in r.as_slice().iter().zip(out.as_slice()) {
            assert_eq!(*b, if *a == 100 { 0 } else { 65535 });
        }
    }

    #[test]
    fn output_spans_full_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (h, w) in [(40, 37), (5, 5), (3, 64)] {
            let r = Raster::from_fn(h, w, |_, _| rng.gen_range(1000..1400)).unwrap();
            let out = equalize_contrast(&r, 8, 2.0).unwrap();
            assert_eq!(out.as_slice().iter().min(), Some(&0));
            assert_eq!(out.as_slice().iter().max(), Some(&65535));
        }
    }

    #[test]
    fn global_offset_changes_nothing() {
        // levels are binned relative to the raster minimum
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = Raster::from_fn(24, 24, |_, _| rng.gen_range(0..5000)).unwrap();
        let brighter = r.map(|&v| v + 100);
        let a = equalize_contrast(&r, 8, 2.0).unwrap();
        let b = equalize_contrast(&brighter, 8, 2.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn small_raster_uses_global_equalization() {
        let r = Raster::from_vec(2, 2, vec![10, 20, 30, 40]).unwrap();
        let out = equalize_contrast(&r, 8, 2.0).unwrap();
        assert_eq!(out.as_slice(), &[0, 21845, 43690, 65535]);
    }

    #[test]
    fn rejects_bad_parameters() {
        let r = Raster::filled(4, 4, 1).unwrap();
        assert!(equalize_contrast(&r, 1, 2.0).is_err());
        assert!(equalize_contrast(&r, 8, 0.0).is_err());
        assert!(equalize_contrast(&r, 8, f64::NAN).is_err());
    }
}
