//! Estimation of adjacent-band shift coefficients from stacked image pairs.

use std::collections::BTreeMap;

use crate::coreg::clahe::{equalize_with, ClaheConfig};
use crate::coreg::correlate::phase_correlate;
use crate::coreg::shift::{order_index, ShiftCoefficientSet, ShiftVector, BAND_ORDER};
use crate::error::{Error, Result};
use crate::granule::{Detector, Satellite};
use crate::raster::{BandId, Raster};

/// One observation of an adjacent couple: `first` is band `from` and
/// `second` is band `to` of the same along-track stacked granule.
#[derive(Clone, Copy, Debug)]
pub struct PairSample<'a> {
    pub from: BandId,
    pub to: BandId,
    pub first: &'a Raster,
    pub second: &'a Raster,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimationConfig {
    pub max_shift: usize,
    pub clahe: ClaheConfig,
    /// Estimates farther than this many standard deviations from the median
    /// are discarded.
    pub sigma: f64,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            max_shift: 32,
            clahe: ClaheConfig::default(),
            sigma: 2.0,
        }
    }
}

/// Estimates `N_k` for every couple present in `pairs`.
///
/// Each pair is contrast-equalized and matched; the estimates of a couple
/// are sorted, trimmed with [`trim_outliers`] and averaged. The number of
/// retained estimates is recorded as the coefficient's sample count.
pub fn estimate_shift_coefficients(
    satellite: Satellite,
    detector: Detector,
    pairs: &[PairSample<'_>],
    config: &EstimationConfig,
) -> Result<ShiftCoefficientSet> {
    let mut by_couple: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for pair in pairs {
        let k = order_index(pair.from);
        if BAND_ORDER.get(k + 1) != Some(&pair.to) {
            return Err(Error::InvalidParameter(format!(
                "{}->{} is not an adjacent couple",
                pair.from, pair.to
            )));
        }
        let second = if pair.from.resolution() == pair.to.resolution() {
            pair.second.clone()
        } else {
            resample_nearest(pair.second, pair.first.height(), pair.first.width())?
        };
        let a = equalize_with(pair.first, &config.clahe)?;
        let b = equalize_with(&second, &config.clahe)?;
        let t = phase_correlate(&a, &b, config.max_shift)?;
        by_couple
            .entry(k)
            .or_default()
            .push((t.along as f64, t.across as f64));
    }

    let mut set = ShiftCoefficientSet::new(satellite, detector);
    for (k, mut estimates) in by_couple {
        let (from, to) = (BAND_ORDER[k], BAND_ORDER[k + 1]);
        estimates.sort_by(|x, y| x.partial_cmp(y).expect("finite estimates"));
        let kept = trim_outliers(&estimates, config.sigma);
        if kept.is_empty() {
            return Err(Error::AllRejected { from, to });
        }
        let n = kept.len() as f64;
        let along = kept.iter().map(|e| e.0).sum::<f64>() / n;
        let across = kept.iter().map(|e| e.1).sum::<f64>() / n;
        set.insert(from, to, ShiftVector::new(along, across, from.resolution())?)?;
        set.set_samples(from, kept.len());
    }
    Ok(set)
}

/// Keeps the estimates within `sigma` population standard deviations of the
/// per-axis median on both axes.
///
/// Centring on the median rather than the mean lets a single gross outlier
/// be rejected even among as few as three estimates.
pub fn trim_outliers(estimates: &[(f64, f64)], sigma: f64) -> Vec<(f64, f64)> {
    if estimates.len() < 3 {
        return estimates.to_vec();
    }
    let along: Vec<f64> = estimates.iter().map(|e| e.0).collect();
    let across: Vec<f64> = estimates.iter().map(|e| e.1).collect();
    let (med_al, sd_al) = (median(&along), std_dev(&along));
    let (med_ac, sd_ac) = (median(&across), std_dev(&across));
    estimates
        .iter()
        .copied()
        .filter(|&(al, ac)| (al - med_al).abs() <= sigma * sd_al && (ac - med_ac).abs() <= sigma * sd_ac)
        .collect()
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Nearest-neighbour resampling onto a `height x width` grid covering the
/// same area.
fn resample_nearest(r: &Raster, height: usize, width: usize) -> Result<Raster> {
    let fy = r.height() as f64 / height as f64;
    let fx = r.width() as f64 / width as f64;
    Raster::from_fn(height, width, |row, col| {
        let sr = ((row as f64 * fy) as usize).min(r.height() - 1);
        let sc = ((col as f64 * fx) as usize).min(r.width() - 1);
        r.at(sr, sc)
    })
}
