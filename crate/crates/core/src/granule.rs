//! Granules: per-band rasters of one detector acquisition plus metadata, and
//! their on-disk bundle format.
//!
//! A bundle is a directory with a `metadata.txt` (`satellite`, `detector`,
//! `sensing_time`, `corner0`..`corner3` as `lat,lon`) and one `B<ID>.rawb`
//! file per band.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};

use crate::error::{Error, Result};
use crate::georef::{is_simple_quad, GeoPoint};
use crate::kv::{parse_pair, KeyValues};
use crate::raster::{read_rawb, write_rawb, BandId, Raster};

pub const METADATA_FILE: &str = "metadata.txt";
pub const BAND_EXTENSION: &str = "rawb";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Satellite {
    S2A,
    S2B,
}

impl fmt::Display for Satellite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Satellite::S2A => "S2A",
            Satellite::S2B => "S2B",
        })
    }
}

impl FromStr for Satellite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S2A" => Ok(Satellite::S2A),
            "S2B" => Ok(Satellite::S2B),
            other => Err(Error::Parse(format!("unknown satellite `{other}`"))),
        }
    }
}

/// MSI detector number, 1 through 12.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Detector(u8);

impl Detector {
    pub fn new(n: u8) -> Result<Self> {
        if (1..=12).contains(&n) {
            Ok(Detector(n))
        } else {
            Err(Error::InvalidParameter(format!("detector {n} outside 1..=12")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Detector> {
        (1..=12).map(Detector)
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n: u8 = s
            .parse()
            .map_err(|_| Error::Parse(format!("bad detector `{s}`")))?;
        Detector::new(n)
    }
}

/// Granule metadata.
///
/// Corner order: 0 and 1 are the west and east corners of the first scanned
/// line, 2 and 3 the west and east corners of the last scanned line. The
/// footprint polygon therefore runs 0, 1, 3, 2.
#[derive(Clone, Debug, PartialEq)]
pub struct GranuleMetadata {
    pub satellite: Satellite,
    pub detector: Detector,
    pub sensing_time: DateTime<Utc>,
    pub corners: [GeoPoint; 4],
}

impl GranuleMetadata {
    pub fn new(
        satellite: Satellite,
        detector: Detector,
        sensing_time: DateTime<Utc>,
        corners: [GeoPoint; 4],
    ) -> Result<Self> {
        let [c0, c1, c2, c3] = corners;
        if !is_simple_quad([c0, c1, c3, c2]) {
            return Err(Error::InvalidGranule(
                "corners do not form a simple quadrilateral".into(),
            ));
        }
        Ok(GranuleMetadata {
            satellite,
            detector,
            sensing_time,
            corners,
        })
    }

    pub fn parse(kv: &KeyValues) -> Result<Self> {
        let satellite = kv
            .require("satellite")?
            .parse()
            .map_err(|_| kv.error("satellite", "expected S2A or S2B"))?;
        let detector = kv
            .require("detector")?
            .parse()
            .map_err(|_| kv.error("detector", "expected an integer in 1..=12"))?;
        let sensing_time = DateTime::parse_from_rfc3339(kv.require("sensing_time")?)
            .map_err(|e| kv.error("sensing_time", &e.to_string()))?
            .with_timezone(&Utc);
        let mut corners = [GeoPoint::default(); 4];
        for (i, corner) in corners.iter_mut().enumerate() {
            let key = format!("corner{i}");
            let (lat, lon) = parse_pair(kv.require(&key)?)
                .ok_or_else(|| kv.error(&key, "expected <lat>,<lon>"))?;
            *corner = GeoPoint::new(lat, lon).map_err(|e| kv.error(&key, &e.to_string()))?;
        }
        Self::new(satellite, detector, sensing_time, corners)
            .map_err(|e| kv.error("corner0", &e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "satellite={}\ndetector={}\nsensing_time={}\n",
            self.satellite,
            self.detector,
            self.sensing_time.to_rfc3339_opts(SecondsFormat::AutoSi, true)
        );
        for (i, c) in self.corners.iter().enumerate() {
            s.push_str(&format!("corner{i}={},{}\n", c.lat, c.lon));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Granule {
    metadata: GranuleMetadata,
    bands: BTreeMap<BandId, Raster>,
}

impl Granule {
    /// Builds a granule, checking that band dimensions agree with their
    /// resolutions: bands of equal resolution have equal dimensions, and a
    /// band at resolution `R` is `round(d * Rf / R)` pixels for a finer band
    /// of `d` pixels at `Rf`, within one pixel of rounding.
    pub fn new(metadata: GranuleMetadata, bands: BTreeMap<BandId, Raster>) -> Result<Self> {
        for (&a, ra) in &bands {
            for (&b, rb) in &bands {
                if a.resolution() > b.resolution() || a >= b && a.resolution() == b.resolution() {
                    continue;
                }
                check_dims(a, ra, b, rb)?;
            }
        }
        Ok(Granule { metadata, bands })
    }

    pub fn metadata(&self) -> &GranuleMetadata {
        &self.metadata
    }

    pub fn bands(&self) -> &BTreeMap<BandId, Raster> {
        &self.bands
    }

    pub fn band(&self, band: BandId) -> Result<&Raster> {
        self.bands.get(&band).ok_or(Error::MissingBand(band))
    }

    pub fn into_parts(self) -> (GranuleMetadata, BTreeMap<BandId, Raster>) {
        (self.metadata, self.bands)
    }
}

fn check_dims(fine: BandId, rf: &Raster, coarse: BandId, rc: &Raster) -> Result<()> {
    let ratio = fine.resolution() / coarse.resolution();
    let ok = |df: usize, dc: usize| {
        if fine.resolution() == coarse.resolution() {
            df == dc
        } else {
            ((df as f64 * ratio).round() - dc as f64).abs() <= 1.0
        }
    };
    if ok(rf.height(), rc.height()) && ok(rf.width(), rc.width()) {
        Ok(())
    } else {
        Err(Error::InvalidGranule(format!(
            "{fine} is {}x{} but {coarse} is {}x{}",
            rf.height(),
            rf.width(),
            rc.height(),
            rc.width()
        )))
    }
}

/// Reads every `B<ID>.rawb` file in `dir`.
pub(crate) fn load_band_files(dir: &Path) -> Result<BTreeMap<BandId, Raster>> {
    let mut bands = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some(BAND_EXTENSION) {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let band: BandId = stem.parse().map_err(|_| Error::UnknownBand {
            path: path.clone(),
            id: stem.to_string(),
        })?;
        bands.insert(band, read_rawb(&path)?);
    }
    if bands.is_empty() {
        return Err(Error::NoBands { path: dir.into() });
    }
    Ok(bands)
}

pub(crate) fn save_band_files(dir: &Path, bands: &BTreeMap<BandId, Raster>) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (band, raster) in bands {
        write_rawb(raster, &dir.join(format!("{band}.{BAND_EXTENSION}")))?;
    }
    Ok(())
}

pub fn load_granule_bundle(dir: &Path) -> Result<Granule> {
    let meta_path = dir.join(METADATA_FILE);
    let metadata = GranuleMetadata::parse(&KeyValues::read(&meta_path)?)?;
    let bands = load_band_files(dir)?;
    Granule::new(metadata, bands)
}

pub fn save_granule_bundle(granule: &Granule, dir: &Path) -> Result<()> {
    save_band_files(dir, &granule.bands)?;
    let meta_path = dir.join(METADATA_FILE);
    std::fs::write(&meta_path, granule.metadata.to_text()).map_err(|e| Error::io(meta_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    pub(crate) fn metadata() -> GranuleMetadata {
        GranuleMetadata::new(
            Satellite::S2A,
            Detector::new(3).unwrap(),
            Utc.with_ymd_and_hms(2021, 8, 30, 9, 40, 21).unwrap(),
            [
                GeoPoint::new(37.81, 14.92).unwrap(),
                GeoPoint::new(37.79, 15.21).unwrap(),
                GeoPoint::new(37.58, 14.90).unwrap(),
                GeoPoint::new(37.56, 15.19).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn detector_range() {
        assert!(Detector::new(0).is_err());
        assert!(Detector::new(13).is_err());
        assert_eq!(Detector::all().count(), 12);
    }

    #[test]
    fn self_intersecting_corners_rejected() {
        let m = metadata();
        let [c0, c1, c2, c3] = m.corners;
        // swapping the last-scanned corners makes the polygon 0,1,3,2 a bow tie
        assert!(GranuleMetadata::new(m.satellite, m.detector, m.sensing_time, [c0, c1, c3, c2]).is_err());
    }

    #[test]
    fn dimension_rule_across_resolutions() {
        let r = |h, w| Raster::filled(h, w, 0).unwrap();
        let ok = BTreeMap::from([(BandId::B02, r(20, 22)), (BandId::B8A, r(10, 11)), (BandId::B09, r(3, 4))]);
        assert!(Granule::new(metadata(), ok).is_ok());

        let same_res = BTreeMap::from([(BandId::B11, r(10, 11)), (BandId::B8A, r(10, 12))]);
        assert!(Granule::new(metadata(), same_res).is_err());

        let off = BTreeMap::from([(BandId::B02, r(20, 22)), (BandId::B8A, r(13, 11))]);
        assert!(Granule::new(metadata(), off).is_err());
    }

    #[test]
    fn metadata_text_round_trip() {
        let m = metadata();
        let kv = KeyValues::parse(&m.to_text(), Path::new(METADATA_FILE)).unwrap();
        assert_eq!(GranuleMetadata::parse(&kv).unwrap(), m);
    }

    #[test]
    fn malformed_metadata_names_the_key() {
        let text = metadata().to_text().replace("detector=3", "detector=14");
        let err = GranuleMetadata::parse(&KeyValues::parse(&text, Path::new("m")).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Metadata { ref key, .. } if key == "detector"), "{err}");

        let text = metadata().to_text().replace("corner2=37.58,14.9", "corner2=37.58");
        let err = GranuleMetadata::parse(&KeyValues::parse(&text, Path::new("m")).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Metadata { ref key, .. } if key == "corner2"), "{err}");
    }
}
