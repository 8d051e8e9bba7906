//! Band acquisition order, adjacent-band shift coefficients and their
//! composition into arbitrary band-to-band shifts.
//!
//! A coefficient `N_k` is the shift that maps band `I(k)` onto band `I(k+1)`,
//! expressed in pixels of `I(k)`. The shift of band `I(n)` relative to band
//! `I(m)` for `n > m` is the chain
//!
//! ```text
//! S(n, m) = sum_{k=m}^{n-1} N_k * R(I(k)) / R(I(n))
//! ```
//!
//! in pixels of `I(n)`, and `S(n, m) = -S(m, n) * R(I(m)) / R(I(n))` for
//! `n < m`. Each term converts from the resolution the coefficient was
//! measured in. A literal `R(I(k+1))` factor (another common reading of this
//! chain) is only equivalent when adjacent bands share a resolution.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::granule::{Detector, Satellite};
use crate::raster::BandId;

/// Bands sorted by acquisition delay relative to B02.
pub const BAND_ORDER: [BandId; 13] = [
    BandId::B02,
    BandId::B08,
    BandId::B03,
    BandId::B10,
    BandId::B04,
    BandId::B05,
    BandId::B11,
    BandId::B06,
    BandId::B07,
    BandId::B8A,
    BandId::B12,
    BandId::B01,
    BandId::B09,
];

/// Position of `band` in [`BAND_ORDER`].
pub fn order_index(band: BandId) -> usize {
    BAND_ORDER
        .iter()
        .position(|&b| b == band)
        .expect("BAND_ORDER is a permutation of all bands")
}

/// Along/across-track displacement in pixels of a band at `resolution` m/px.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftVector {
    pub along: f64,
    pub across: f64,
    pub resolution: f64,
}

impl ShiftVector {
    pub fn new(along: f64, across: f64, resolution: f64) -> Result<Self> {
        if !(along.is_finite() && across.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite shift ({along}, {across})"
            )));
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::InvalidParameter(format!("bad resolution {resolution}")));
        }
        Ok(ShiftVector {
            along,
            across,
            resolution,
        })
    }

    pub const fn zero(resolution: f64) -> Self {
        ShiftVector {
            along: 0.0,
            across: 0.0,
            resolution,
        }
    }

    /// The same displacement expressed in pixels of `resolution`.
    pub fn in_resolution(self, resolution: f64) -> Self {
        let f = self.resolution / resolution;
        ShiftVector {
            along: self.along * f,
            across: self.across * f,
            resolution,
        }
    }

    /// Rounds half away from zero to whole pixels.
    pub fn rounded(self) -> (i64, i64) {
        (self.along.round() as i64, self.across.round() as i64)
    }
}

/// Adjacent-band coefficients of one satellite detector. Key `k` holds
/// `N_k`, the shift from `BAND_ORDER[k]` to `BAND_ORDER[k + 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftCoefficientSet {
    pub satellite: Satellite,
    pub detector: Detector,
    coefficients: BTreeMap<usize, ShiftVector>,
    samples: BTreeMap<usize, usize>,
}

impl ShiftCoefficientSet {
    pub fn new(satellite: Satellite, detector: Detector) -> Self {
        ShiftCoefficientSet {
            satellite,
            detector,
            coefficients: BTreeMap::new(),
            samples: BTreeMap::new(),
        }
    }

    /// Stores the coefficient for the adjacent couple `from -> to`.
    pub fn insert(&mut self, from: BandId, to: BandId, shift: ShiftVector) -> Result<()> {
        let k = order_index(from);
        if k + 1 >= BAND_ORDER.len() || BAND_ORDER[k + 1] != to {
            return Err(Error::InvalidParameter(format!(
                "{from}->{to} is not an adjacent couple of the band order"
            )));
        }
        if shift.resolution != from.resolution() {
            return Err(Error::InvalidParameter(format!(
                "{from}->{to} coefficient must be in {from} pixels ({} m), got {} m",
                from.resolution(),
                shift.resolution
            )));
        }
        self.coefficients.insert(k, shift);
        Ok(())
    }

    pub(crate) fn set_samples(&mut self, from: BandId, count: usize) {
        self.samples.insert(order_index(from), count);
    }

    pub fn coefficient(&self, from: BandId) -> Option<ShiftVector> {
        self.coefficients.get(&order_index(from)).copied()
    }

    /// Number of per-pair estimates averaged into the coefficient starting at
    /// `from`, when it was estimated rather than loaded.
    pub fn sample_count(&self, from: BandId) -> Option<usize> {
        self.samples.get(&order_index(from)).copied()
    }

    /// `(from, to, shift)` for every stored coefficient in band order.
    pub fn iter(&self) -> impl Iterator<Item = (BandId, BandId, ShiftVector)> + '_ {
        self.coefficients
            .iter()
            .map(|(&k, &s)| (BAND_ORDER[k], BAND_ORDER[k + 1], s))
    }

    /// Sets the chain between `m` and `n` so that `compose_shift(n, m)`
    /// equals `target` (pixels of `n`): the last link carries the whole
    /// displacement, links in between are zero.
    pub fn with_composite(mut self, n: BandId, m: BandId, along: f64, across: f64) -> Result<Self> {
        let (i_n, i_m) = (order_index(n), order_index(m));
        if i_n == i_m {
            return Err(Error::InvalidParameter("composite of a band with itself".into()));
        }
        let sign = if i_n > i_m { 1.0 } else { -1.0 };
        let (lo, hi) = (i_n.min(i_m), i_n.max(i_m));
        for k in lo..hi {
            let from = BAND_ORDER[k];
            let shift = if k + 1 == hi {
                ShiftVector::new(
                    sign * along * n.resolution() / from.resolution(),
                    sign * across * n.resolution() / from.resolution(),
                    from.resolution(),
                )?
            } else {
                ShiftVector::zero(from.resolution())
            };
            self.insert(from, BAND_ORDER[k + 1], shift)?;
        }
        Ok(self)
    }
}

/// Shift of band `n` relative to band `m`, in pixels of `n`.
pub fn compose_shift(set: &ShiftCoefficientSet, n: BandId, m: BandId) -> Result<ShiftVector> {
    let (i_n, i_m) = (order_index(n), order_index(m));
    let r_n = n.resolution();
    if i_n == i_m {
        return Ok(ShiftVector::zero(r_n));
    }
    // Accumulate in meters so the conversion to pixels of `n` rounds once.
    let (lo, hi) = (i_n.min(i_m), i_n.max(i_m));
    let (mut along_m, mut across_m) = (0.0, 0.0);
    for k in lo..hi {
        let coeff = set.coefficients.get(&k).ok_or_else(|| Error::MissingCoefficient {
            satellite: set.satellite.to_string(),
            detector: set.detector.get(),
            from: BAND_ORDER[k],
            to: BAND_ORDER[k + 1],
        })?;
        along_m += coeff.along * coeff.resolution;
        across_m += coeff.across * coeff.resolution;
    }
    if i_n < i_m {
        along_m = -along_m;
        across_m = -across_m;
    }
    Ok(ShiftVector {
        along: along_m / r_n,
        across: across_m / r_n,
        resolution: r_n,
    })
}

/// Per-detector coefficient sets of every satellite.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ShiftTable {
    sets: BTreeMap<(Satellite, Detector), ShiftCoefficientSet>,
}

impl ShiftTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, set: ShiftCoefficientSet) {
        self.sets.insert((set.satellite, set.detector), set);
    }

    pub fn get(&self, satellite: Satellite, detector: Detector) -> Result<&ShiftCoefficientSet> {
        self.sets
            .get(&(satellite, detector))
            .ok_or_else(|| Error::MissingShiftSet {
                satellite: satellite.to_string(),
                detector: detector.get(),
            })
    }

    pub fn sets(&self) -> impl Iterator<Item = &ShiftCoefficientSet> {
        self.sets.values()
    }

    /// Parses `satellite detector bandFrom bandTo along across resolution`
    /// lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = ShiftTable::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let bad = |reason: String| Error::ShiftTableSyntax {
                line: line_no,
                reason,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [sat, det, from, to, along, across, res] = fields[..] else {
                return Err(bad(format!("expected 7 fields, got {}", fields.len())));
            };
            let satellite: Satellite = sat.parse().map_err(|e: Error| bad(e.to_string()))?;
            let detector: Detector = det.parse().map_err(|e: Error| bad(e.to_string()))?;
            let from: BandId = from.parse().map_err(|e: Error| bad(e.to_string()))?;
            let to: BandId = to.parse().map_err(|e: Error| bad(e.to_string()))?;
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")));
            let shift = ShiftVector::new(num(along)?, num(across)?, num(res)?).map_err(|e| bad(e.to_string()))?;
            table
                .sets
                .entry((satellite, detector))
                .or_insert_with(|| ShiftCoefficientSet::new(satellite, detector))
                .insert(from, to, shift)
                .map_err(|e| bad(e.to_string()))?;
        }
        Ok(table)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# satellite detector bandFrom bandTo along across resolution\n");
        for set in self.sets.values() {
            for (from, to, v) in set.iter() {
                let _ = writeln!(
                    s,
                    "{} {} {from} {to} {} {} {}",
                    set.satellite, set.detector, v.along, v.across, v.resolution
                );
            }
        }
        s
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

/// Shift of band `n` relative to band `m` for one satellite detector.
pub fn lookup_shift(
    table: &ShiftTable,
    satellite: Satellite,
    detector: Detector,
    n: BandId,
    m: BandId,
) -> Result<ShiftVector> {
    compose_shift(table.get(satellite, detector)?, n, m)
}

/// Mean B8A-B11 registration offsets (along, across) in 20 m pixels per
/// satellite and detector, as measured against a keypoint matcher.
pub const B8A_B11_OFFSETS: [(Satellite, u8, f64, f64); 24] = [
    (Satellite::S2A, 1, -174.8, -1.93),
    (Satellite::S2A, 2, 188.0, -6.0),
    (Satellite::S2A, 3, -173.08, -2.0),
    (Satellite::S2A, 4, 186.0, -3.2),
    (Satellite::S2A, 5, -170.5, -1.88),
    (Satellite::S2A, 6, 184.0, -2.0),
    (Satellite::S2A, 7, -170.0, -1.0),
    (Satellite::S2A, 8, 185.56, -0.64),
    (Satellite::S2A, 9, -170.55, -1.73),
    (Satellite::S2A, 10, 187.0, 1.5),
    (Satellite::S2A, 11, -176.0, -0.5),
    (Satellite::S2A, 12, 193.0, 4.0),
    (Satellite::S2B, 1, -178.33, -12.78),
    (Satellite::S2B, 2, 186.83, -16.5),
    (Satellite::S2B, 3, -174.77, -13.0),
    (Satellite::S2B, 4, 183.22, -14.06),
    (Satellite::S2B, 5, -172.5, -13.0),
    (Satellite::S2B, 6, 183.0, -12.75),
    (Satellite::S2B, 7, -173.0, -11.67),
    (Satellite::S2B, 8, 184.12, -10.96),
    (Satellite::S2B, 9, -172.6, -11.0),
    (Satellite::S2B, 10, 185.13, -9.33),
    (Satellite::S2B, 11, -174.88, -11.88),
    (Satellite::S2B, 12, 189.17, -7.33),
];

/// A table whose B11..B8A chain reproduces [`B8A_B11_OFFSETS`], so that
/// `lookup_shift(.., B8A, B11)` returns the measured offsets.
pub fn b8a_b11_reference_table() -> ShiftTable {
    let mut table = ShiftTable::new();
    for (sat, det, along, across) in B8A_B11_OFFSETS {
        let set = ShiftCoefficientSet::new(sat, Detector::new(det).expect("valid detector"))
            .with_composite(BandId::B8A, BandId::B11, along, across)
            .expect("B11 precedes B8A");
        table.insert(set);
    }
    table
}
