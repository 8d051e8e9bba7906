use std::collections::BTreeMap;

use crate::coreg::shift::{compose_shift, ShiftTable};
use crate::error::{Error, Result};
use crate::granule::Granule;
use crate::raster::{crop, BandId, Raster, Window};

/// What happens to pixels vacated by a translation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FillPolicy {
    #[default]
    ZeroFill,
    /// Crop every band to the region valid in all of them.
    CropToValid,
}

impl std::str::FromStr for FillPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero_fill" => Ok(FillPolicy::ZeroFill),
            "crop_to_valid" => Ok(FillPolicy::CropToValid),
            other => Err(Error::Parse(format!("unknown fill policy `{other}`"))),
        }
    }
}

/// Translates `raster` by `(along, across)`: `out[r][c] = in[r + along][c + across]`,
/// zero outside. A band whose footprint is shifted by `s` from a reference
/// is `translate(reference, s)`; `translate(band, -s)` undoes it.
pub fn translate(raster: &Raster, along: i64, across: i64) -> Raster {
    let (h, w) = (raster.height() as i64, raster.width() as i64);
    let mut out = vec![0u16; raster.as_slice().len()];
    let c_lo = (-across).clamp(0, w);
    let c_hi = (w - across).clamp(0, w);
    if c_lo < c_hi {
        for r in 0..h {
            let src_r = r + along;
            if !(0..h).contains(&src_r) {
                continue;
            }
            let src = raster.row(src_r as usize);
            let dst = &mut out[(r * w) as usize..((r + 1) * w) as usize];
            dst[c_lo as usize..c_hi as usize]
                .copy_from_slice(&src[(c_lo + across) as usize..(c_hi + across) as usize]);
        }
    }
    Raster::from_vec(raster.height(), raster.width(), out).expect("same dimensions")
}

/// Output of [`apply_coarse_coregistration`].
#[derive(Clone, Debug, PartialEq)]
pub struct Coregistered {
    /// Granule holding only the registered band collection.
    pub granule: Granule,
    /// Rounded shift of each band relative to the reference, in its own
    /// pixels. The band was translated by the negation.
    pub shifts: BTreeMap<BandId, (i64, i64)>,
    /// Under [`FillPolicy::CropToValid`], the window of each band's original
    /// grid that was kept.
    pub windows: Option<BTreeMap<BandId, Window>>,
}

/// Moves every band of `bands` onto the first one using the stored
/// systematic shifts of the granule's satellite and detector: band `k` is
/// translated by `-round(compose_shift(k, first))`.
pub fn apply_coarse_coregistration(
    granule: &Granule,
    bands: &[BandId],
    table: &ShiftTable,
    fill: FillPolicy,
) -> Result<Coregistered> {
    let &reference = bands
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty band collection".into()))?;
    let meta = granule.metadata();
    let set = table.get(meta.satellite, meta.detector)?;

    let mut shifts = BTreeMap::new();
    for &band in bands {
        let raster = granule.band(band)?;
        let (along, across) = if band == reference {
            (0, 0)
        } else {
            compose_shift(set, band, reference)?.rounded()
        };
        if along.unsigned_abs() >= raster.height() as u64 || across.unsigned_abs() >= raster.width() as u64 {
            return Err(Error::DegenerateShift {
                band,
                along,
                across,
                height: raster.height(),
                width: raster.width(),
            });
        }
        shifts.insert(band, (along, across));
    }

    let mut translated: BTreeMap<BandId, Raster> = shifts
        .iter()
        .map(|(&band, &(along, across))| {
            let raster = granule.band(band).expect("checked above");
            let out = if along == 0 && across == 0 {
                raster.clone()
            } else {
                translate(raster, -along, -across)
            };
            (band, out)
        })
        .collect();

    let windows = match fill {
        FillPolicy::ZeroFill => None,
        FillPolicy::CropToValid => {
            let windows = common_valid_windows(granule, &shifts)?;
            for (band, w) in &windows {
                let cropped = crop(&translated[band], *w)?;
                translated.insert(*band, cropped);
            }
            Some(windows)
        }
    };

    Ok(Coregistered {
        granule: Granule::new(meta.clone(), translated)?,
        shifts,
        windows,
    })
}

/// Intersects the valid output regions of all bands in ground units (meters
/// from the grid origin) and maps the intersection back to each band's grid.
fn common_valid_windows(
    granule: &Granule,
    shifts: &BTreeMap<BandId, (i64, i64)>,
) -> Result<BTreeMap<BandId, Window>> {
    // out[r] = in[r - shift] is valid for r in [shift, len + shift)
    let valid = |shift: i64, len: usize| {
        let len = len as i64;
        (shift.max(0), (len + shift).min(len))
    };
    let (mut rows, mut cols) = ((f64::MIN, f64::MAX), (f64::MIN, f64::MAX));
    for (&band, &(along, across)) in shifts {
        let raster = granule.band(band)?;
        let res = band.resolution();
        let (r0, r1) = valid(along, raster.height());
        let (c0, c1) = valid(across, raster.width());
        rows = (rows.0.max(r0 as f64 * res), rows.1.min(r1 as f64 * res));
        cols = (cols.0.max(c0 as f64 * res), cols.1.min(c1 as f64 * res));
    }

    let mut windows = BTreeMap::new();
    for &band in shifts.keys() {
        let res = band.resolution();
        let (r0, r1) = ((rows.0 / res).ceil(), (rows.1 / res).floor());
        let (c0, c1) = ((cols.0 / res).ceil(), (cols.1 / res).floor());
        if r1 <= r0 || c1 <= c0 {
            return Err(Error::InvalidGranule("no region is valid in every band".into()));
        }
        windows.insert(
            band,
            Window::new(r0 as usize, c0 as usize, (r1 - r0) as usize, (c1 - c0) as usize),
        );
    }
    Ok(windows)
}
