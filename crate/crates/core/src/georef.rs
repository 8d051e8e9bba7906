//! Coarse georeferencing: per-band corner coordinates derived from the
//! granule corners and the stored band shifts, plus pixel-to-ground mapping.
//!
//! A footprint is described by its prior coordinates (the two corners of the
//! first scanned line) and its afterward coordinates (the last scanned line).
//! All geodesy is equirectangular: over a granule's ~25 km extent the error
//! of treating degrees as a flat grid is far below the method's coarseness.

use std::fmt;
use std::str::FromStr;

use crate::coreg::{lookup_shift, ShiftTable};
use crate::error::{Error, Result};
use crate::granule::{Granule, GranuleMetadata};
use crate::kv::parse_pair;
use crate::raster::{BandId, Window};

/// The band whose grid the granule corners refer to.
pub const REFERENCE_BAND: BandId = BandId::B02;

pub const KM_PER_DEGREE: f64 = 111.32;

/// Half of the north-south extent of a download polygon, in km.
pub const DOWNLOAD_HALF_HEIGHT_KM: f64 = 14.0;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(lat.is_finite() && lon.is_finite()) || lat.abs() > 90.0 || lon.abs() > 180.0 {
            return Err(Error::InvalidCoordinate(format!("({lat}, {lon})")));
        }
        Ok(GeoPoint { lat, lon })
    }

    fn offset(self, d: ArcDelta) -> Result<Self> {
        GeoPoint::new(self.lat + d.dlat, self.lon + d.dlon)
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.lat, self.lon)
    }
}

impl FromStr for GeoPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lat, lon) = parse_pair(s).ok_or_else(|| Error::Parse(format!("expected <lat>,<lon>, got `{s}`")))?;
        GeoPoint::new(lat, lon)
    }
}

/// A displacement in degrees.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ArcDelta {
    pub dlat: f64,
    pub dlon: f64,
}

impl ArcDelta {
    fn between(from: GeoPoint, to: GeoPoint) -> Self {
        ArcDelta {
            dlat: to.lat - from.lat,
            dlon: to.lon - from.lon,
        }
    }

    fn scale(self, k: f64) -> Self {
        ArcDelta {
            dlat: self.dlat * k,
            dlon: self.dlon * k,
        }
    }

    fn plus(self, o: ArcDelta) -> Self {
        ArcDelta {
            dlat: self.dlat + o.dlat,
            dlon: self.dlon + o.dlon,
        }
    }
}

/// True when the polygon `p0 p1 p2 p3` has non-zero area and no two
/// non-adjacent edges touch.
pub fn is_simple_quad(p: [GeoPoint; 4]) -> bool {
    let xy = p.map(|g| (g.lon, g.lat));
    let area2: f64 = (0..4)
        .map(|i| {
            let (a, b) = (xy[i], xy[(i + 1) % 4]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    if area2 == 0.0 || !area2.is_finite() {
        return false;
    }
    !segments_touch(xy[0], xy[1], xy[2], xy[3]) && !segments_touch(xy[1], xy[2], xy[3], xy[0])
}

fn segments_touch(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let orient = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| {
        let v = (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0);
        v.partial_cmp(&0.0).map_or(0, |o| o as i8)
    };
    let on_segment = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| {
        r.0 >= p.0.min(q.0) && r.0 <= p.0.max(q.0) && r.1 >= p.1.min(q.1) && r.1 <= p.1.max(q.1)
    };
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if o1 != o2 && o3 != o4 && o1 * o2 <= 0 && o3 * o4 <= 0 {
        return true;
    }
    (o1 == 0 && on_segment(a, b, c))
        || (o2 == 0 && on_segment(a, b, d))
        || (o3 == 0 && on_segment(c, d, a))
        || (o4 == 0 && on_segment(c, d, b))
}

/// Ground footprint of one band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandFootprint {
    pub band: BandId,
    /// West and east corners of the first scanned line.
    pub prior: [GeoPoint; 2],
    /// West and east corners of the last scanned line.
    pub afterward: [GeoPoint; 2],
}

impl BandFootprint {
    pub fn new(band: BandId, prior: [GeoPoint; 2], afterward: [GeoPoint; 2]) -> Result<Self> {
        if !is_simple_quad([prior[0], prior[1], afterward[1], afterward[0]]) {
            return Err(Error::InvalidCoordinate(format!(
                "footprint of {band} is not a simple quadrilateral"
            )));
        }
        Ok(BandFootprint { band, prior, afterward })
    }

    /// Corners in metadata order: prior west, prior east, afterward west,
    /// afterward east.
    pub fn corners(&self) -> [GeoPoint; 4] {
        [self.prior[0], self.prior[1], self.afterward[0], self.afterward[1]]
    }

    /// `(lat_min, lat_max, lon_min, lon_max)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        self.corners().iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), p| (a.min(p.lat), b.max(p.lat), c.min(p.lon), d.max(p.lon)),
        )
    }

    /// `band lat0,lon0 lat1,lon1 lat2,lon2 lat3,lon3`
    pub fn to_line(&self) -> String {
        let [a, b, c, d] = self.corners();
        format!("{} {a} {b} {c} {d}", self.band)
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::Parse(format!("footprint line needs 5 fields: `{line}`")));
        }
        let band = fields[0].parse()?;
        let p: Vec<GeoPoint> = fields[1..].iter().map(|f| f.parse()).collect::<Result<_>>()?;
        BandFootprint::new(band, [p[0], p[1]], [p[2], p[3]])
    }
}

pub fn footprints_to_text(footprints: &[BandFootprint]) -> String {
    footprints.iter().map(|f| f.to_line() + "\n").collect()
}

pub fn parse_footprints(text: &str) -> Result<Vec<BandFootprint>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or_default().trim())
        .filter(|l| !l.is_empty())
        .map(BandFootprint::parse_line)
        .collect()
}

/// Size of the granule on the reference band grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GranuleGeometry {
    /// `G_L`: number of reference-band rows.
    pub length: usize,
    /// Number of reference-band columns.
    pub width: usize,
}

impl GranuleGeometry {
    pub fn new(length: usize, width: usize) -> Result<Self> {
        if length == 0 || width == 0 {
            return Err(Error::InvalidParameter("granule length and width must be positive".into()));
        }
        Ok(GranuleGeometry { length, width })
    }

    /// Taken from the reference band when present, otherwise scaled from
    /// the finest band present.
    pub fn of_granule(granule: &Granule) -> Result<Self> {
        let (&band, raster) = granule
            .bands()
            .get_key_value(&REFERENCE_BAND)
            .or_else(|| {
                granule
                    .bands()
                    .iter()
                    .min_by(|a, b| a.0.resolution().total_cmp(&b.0.resolution()))
            })
            .ok_or_else(|| Error::InvalidGranule("granule has no bands".into()))?;
        let scale = band.resolution() / REFERENCE_BAND.resolution();
        GranuleGeometry::new(
            (raster.height() as f64 * scale).round() as usize,
            (raster.width() as f64 * scale).round() as usize,
        )
    }
}

/// Per-pixel displacement of the granule on its west and east sides:
/// along-track from the first to the last scanned corner, across-track
/// along the first scanned line.
fn arc_per_pixel(meta: &GranuleMetadata, geometry: GranuleGeometry) -> ([ArcDelta; 2], ArcDelta) {
    let [c0, c1, c2, c3] = meta.corners;
    let gl = geometry.length as f64;
    let along = [ArcDelta::between(c0, c2).scale(1.0 / gl), ArcDelta::between(c1, c3).scale(1.0 / gl)];
    let across = ArcDelta::between(c0, c1).scale(1.0 / geometry.width as f64);
    (along, across)
}

/// Prior coordinates of `band`: the granule's first scanned corners moved by
/// the band's signed shift relative to the reference band, converted to
/// reference-band pixels and then to degrees.
///
/// The along-track component moves each corner along its own side of the
/// granule, the across-track component along the first scanned line.
pub fn compute_band_prior_coords(
    meta: &GranuleMetadata,
    table: &ShiftTable,
    band: BandId,
    geometry: GranuleGeometry,
) -> Result<[GeoPoint; 2]> {
    let [c0, c1, ..] = meta.corners;
    if band == REFERENCE_BAND {
        return Ok([c0, c1]);
    }
    let s = lookup_shift(table, meta.satellite, meta.detector, band, REFERENCE_BAND)?
        .in_resolution(REFERENCE_BAND.resolution());
    let (along, across) = arc_per_pixel(meta, geometry);
    let move_by = |i: usize| along[i].scale(s.along).plus(across.scale(s.across));
    Ok([c0.offset(move_by(0))?, c1.offset(move_by(1))?])
}

/// Along-track extent of a band and its afterward coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandExtent {
    /// `Δ = B_l · G_a / G_L` for the west and east sides.
    pub delta: [ArcDelta; 2],
    pub afterward: [GeoPoint; 2],
}

/// Extent of a band `band_length` reference-band rows long whose first
/// scanned corners are `prior`.
///
/// `G_a` is the arc between the first and last scanned corner of each side
/// of the granule. The afterward corners equal `prior + Δ`; they are
/// evaluated relative to the granule's last scanned corners so that a band
/// covering exactly the granule reproduces them bit for bit.
pub fn compute_band_extent(
    meta: &GranuleMetadata,
    geometry: GranuleGeometry,
    prior: [GeoPoint; 2],
    band_length: usize,
) -> Result<BandExtent> {
    if geometry.length == 0 {
        return Err(Error::InvalidParameter("granule length is zero".into()));
    }
    let c = meta.corners;
    let t = band_length as f64 / geometry.length as f64;
    let mut delta = [ArcDelta::default(); 2];
    let mut afterward = [GeoPoint::default(); 2];
    for i in 0..2 {
        let ga = ArcDelta::between(c[i], c[i + 2]);
        delta[i] = ga.scale(band_length as f64).scale(1.0 / geometry.length as f64);
        // prior + t·G_a == last corner + (prior - first corner) + (t - 1)·G_a
        let d = ArcDelta::between(c[i], prior[i]).plus(ga.scale(t - 1.0));
        afterward[i] = c[i + 2].offset(d)?;
    }
    Ok(BandExtent { delta, afterward })
}

/// Everything needed to georeference the pixels of one band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeoRefModel {
    pub footprint: BandFootprint,
    /// `B_l`: band rows.
    pub band_length: usize,
    pub band_width: usize,
    pub geometry: GranuleGeometry,
    pub delta: [ArcDelta; 2],
}

impl GeoRefModel {
    pub fn new(
        meta: &GranuleMetadata,
        table: &ShiftTable,
        band: BandId,
        geometry: GranuleGeometry,
        band_length: usize,
        band_width: usize,
    ) -> Result<Self> {
        if band_length == 0 || band_width == 0 {
            return Err(Error::InvalidParameter("band dimensions must be positive".into()));
        }
        let prior = compute_band_prior_coords(meta, table, band, geometry)?;
        let ref_rows = band_length as f64 * band.resolution() / REFERENCE_BAND.resolution();
        let extent = compute_band_extent(meta, geometry, prior, ref_rows.round() as usize)?;
        Ok(GeoRefModel {
            footprint: BandFootprint::new(band, prior, extent.afterward)?,
            band_length,
            band_width,
            geometry,
            delta: extent.delta,
        })
    }

    pub fn for_granule(granule: &Granule, table: &ShiftTable, band: BandId) -> Result<Self> {
        let raster = granule.band(band)?;
        GeoRefModel::new(
            granule.metadata(),
            table,
            band,
            GranuleGeometry::of_granule(granule)?,
            raster.height(),
            raster.width(),
        )
    }

    /// Footprint of the pixels inside `window`.
    pub fn sub_footprint(&self, window: Window) -> Result<BandFootprint> {
        if window.rows == 0 || window.cols == 0 || !window.fits(self.band_length, self.band_width) {
            return Err(Error::WindowOutOfBounds {
                window,
                height: self.band_length,
                width: self.band_width,
            });
        }
        let (r0, c0) = (window.row0, window.col0);
        let (r1, c1) = (r0 + window.rows - 1, c0 + window.cols - 1);
        BandFootprint::new(
            self.footprint.band,
            [georeference_pixel(self, r0, c0)?, georeference_pixel(self, r0, c1)?],
            [georeference_pixel(self, r1, c0)?, georeference_pixel(self, r1, c1)?],
        )
    }
}

/// Bilinear interpolation of the footprint corners at `u = col / (width - 1)`,
/// `v = row / (B_l - 1)`. Raster corners map exactly onto footprint corners.
pub fn georeference_pixel(model: &GeoRefModel, row: usize, col: usize) -> Result<GeoPoint> {
    if row >= model.band_length || col >= model.band_width {
        return Err(Error::InvalidParameter(format!(
            "pixel ({row}, {col}) outside the {}x{} band",
            model.band_length, model.band_width
        )));
    }
    let norm = |i: usize, n: usize| if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
    let (u, v) = (norm(col, model.band_width), norm(row, model.band_length));
    let [p0, p1, a0, a1] = model.footprint.corners();
    let w = [(1.0 - u) * (1.0 - v), u * (1.0 - v), (1.0 - u) * v, u * v];
    let mix = |f: fn(&GeoPoint) -> f64| w[0] * f(&p0) + w[1] * f(&p1) + w[2] * f(&a0) + w[3] * f(&a1);
    GeoPoint::new(mix(|p| p.lat), mix(|p| p.lon))
}

/// Axis-aligned download rectangle around an event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DownloadPolygon {
    pub south: f64,
    pub north: f64,
    pub west: f64,
    pub east: f64,
}

impl DownloadPolygon {
    /// North-west, north-east, south-east, south-west.
    pub fn corners(&self) -> [GeoPoint; 4] {
        [
            GeoPoint { lat: self.north, lon: self.west },
            GeoPoint { lat: self.north, lon: self.east },
            GeoPoint { lat: self.south, lon: self.east },
            GeoPoint { lat: self.south, lon: self.west },
        ]
    }
}

/// 28 km north-south by `k` km east-west rectangle centred on `center`.
///
/// The north-south extent covers the largest along-track distance between
/// bands of one acquisition, so every band of the event lands in the
/// selected granules.
pub fn compute_download_polygon(center: GeoPoint, k: f64) -> Result<DownloadPolygon> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter(format!("polygon width {k} km must be positive")));
    }
    if center.lat.abs() > 85.0 {
        return Err(Error::InvalidCoordinate(format!(
            "latitude {} too close to a pole for longitude scaling",
            center.lat
        )));
    }
    let dlat = DOWNLOAD_HALF_HEIGHT_KM / KM_PER_DEGREE;
    let dlon = k / 2.0 / (KM_PER_DEGREE * center.lat.to_radians().cos());
    Ok(DownloadPolygon {
        south: center.lat - dlat,
        north: center.lat + dlat,
        west: center.lon - dlon,
        east: center.lon + dlon,
    })
}
