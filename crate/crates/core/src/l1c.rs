//! L1C reference tiles: bundle I/O, mosaicking, cropping onto a raw band
//! footprint and reduction to the coarsest band grid as TOA reflectance.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::georef::BandFootprint;
use crate::granule::{load_band_files, save_band_files, METADATA_FILE};
use crate::kv::KeyValues;
use crate::raster::{crop, BandId, Plane, Raster, Window};

/// DN scale of standard L1C products: `ρ = DN / 10000`.
pub const DEFAULT_QUANTIFICATION: f64 = 10000.0;

/// Resolution of the grid a tile's geotransform describes.
pub const GEOTRANSFORM_RESOLUTION: f64 = 10.0;

/// Snapping distance for pixel coordinates that are integers up to rounding.
const SNAP: f64 = 1e-9;

/// Affine map from `(col, row)` to `(lon, lat)`:
/// `lon = a + col·b + row·c`, `lat = d + col·e + row·f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeoTransform(pub [f64; 6]);

impl GeoTransform {
    pub fn new(coeffs: [f64; 6]) -> Result<Self> {
        let g = GeoTransform(coeffs);
        if !coeffs.iter().all(|v| v.is_finite()) || g.det().abs() <= 1e-300 {
            return Err(Error::SingularTransform);
        }
        Ok(g)
    }

    /// North-up grid with square-ish pixels of `dlon` x `dlat` degrees.
    pub fn north_up(west: f64, north: f64, dlon: f64, dlat: f64) -> Result<Self> {
        GeoTransform::new([west, dlon, 0.0, north, 0.0, -dlat])
    }

    fn det(&self) -> f64 {
        let [_, b, c, _, e, f] = self.0;
        b * f - c * e
    }

    pub fn apply(&self, col: f64, row: f64) -> (f64, f64) {
        let [a, b, c, d, e, f] = self.0;
        (a + col * b + row * c, d + col * e + row * f)
    }

    /// `(col, row)` of a `(lon, lat)` position.
    pub fn invert(&self, lon: f64, lat: f64) -> (f64, f64) {
        let [a, b, c, d, e, f] = self.0;
        let (x, y) = (lon - a, lat - d);
        let det = self.det();
        ((f * x - c * y) / det, (b * y - e * x) / det)
    }

    /// The same ground grid with pixels `factor` times larger.
    pub fn coarsened(&self, factor: f64) -> Self {
        let [a, b, c, d, e, f] = self.0;
        GeoTransform([a, b * factor, c * factor, d, e * factor, f * factor])
    }

    /// Grid shifted to start at pixel `(col, row)`.
    pub fn shifted(&self, col: f64, row: f64) -> Self {
        let (a, d) = self.apply(col, row);
        let [_, b, c, _, e, f] = self.0;
        GeoTransform([a, b, c, d, e, f])
    }

    pub fn is_north_up(&self) -> bool {
        self.0[2] == 0.0 && self.0[4] == 0.0
    }

    /// `(lon_min, lon_max, lat_min, lat_max)` of a `height x width` grid.
    pub fn extent(&self, height: usize, width: usize) -> ((f64, f64), (f64, f64)) {
        let pts = [(0.0, 0.0), (width as f64, 0.0), (0.0, height as f64), (width as f64, height as f64)]
            .map(|(c, r)| self.apply(c, r));
        let lon = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |m, p| (m.0.min(p.0), m.1.max(p.0)));
        let lat = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |m, p| (m.0.min(p.1), m.1.max(p.1)));
        (lon, lat)
    }
}

impl fmt::Display for GeoTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d, e, g] = self.0;
        write!(f, "{a},{b},{c},{d},{e},{g}")
    }
}

impl std::str::FromStr for GeoTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse(format!("bad geotransform `{s}`")))?;
        let coeffs: [f64; 6] = v
            .try_into()
            .map_err(|_| Error::Parse(format!("geotransform needs 6 values: `{s}`")))?;
        GeoTransform::new(coeffs)
    }
}

/// One L1C tile. The geotransform describes the tile's 10 m grid; a band at
/// resolution `R` uses the same transform with pixels `R / 10` times larger.
#[derive(Clone, Debug, PartialEq)]
pub struct L1CTile {
    pub tile_id: String,
    pub geotransform: GeoTransform,
    pub quantification: f64,
    pub bands: BTreeMap<BandId, Raster>,
}

impl L1CTile {
    pub fn new(
        tile_id: impl Into<String>,
        geotransform: GeoTransform,
        quantification: f64,
        bands: BTreeMap<BandId, Raster>,
    ) -> Result<Self> {
        let tile_id = tile_id.into();
        if tile_id.is_empty() || tile_id.chars().any(char::is_whitespace) {
            return Err(Error::InvalidParameter(format!("bad tile id `{tile_id}`")));
        }
        if !(quantification.is_finite() && quantification > 0.0) {
            return Err(Error::InvalidParameter(format!("quantification {quantification} must be positive")));
        }
        GeoTransform::new(geotransform.0)?;
        Ok(L1CTile {
            tile_id,
            geotransform,
            quantification,
            bands,
        })
    }

    pub fn band_geotransform(&self, band: BandId) -> GeoTransform {
        self.geotransform.coarsened(band.resolution() / GEOTRANSFORM_RESOLUTION)
    }

    pub fn band_layer(&self, band: BandId) -> Result<GeoRaster> {
        Ok(GeoRaster {
            band,
            raster: self.bands.get(&band).ok_or(Error::MissingBand(band))?.clone(),
            geotransform: self.band_geotransform(band),
            quantification: self.quantification,
        })
    }
}

pub fn load_tile_bundle(dir: &Path) -> Result<L1CTile> {
    let kv = KeyValues::read(&dir.join(METADATA_FILE))?;
    let tile_id = kv.require("tile_id")?.to_string();
    let quantification = kv
        .parse_with("quantification", |s| s.parse::<f64>().ok())?
        .unwrap_or(DEFAULT_QUANTIFICATION);
    let geotransform = kv
        .require("geotransform")?
        .parse()
        .map_err(|e: Error| kv.error("geotransform", &e.to_string()))?;
    let bands = load_band_files(dir)?;
    L1CTile::new(tile_id, geotransform, quantification, bands).map_err(|e| kv.error("tile_id", &e.to_string()))
}

pub fn save_tile_bundle(tile: &L1CTile, dir: &Path) -> Result<()> {
    save_band_files(dir, &tile.bands)?;
    let text = format!(
        "tile_id={}\nquantification={}\ngeotransform={}\n",
        tile.tile_id, tile.quantification, tile.geotransform
    );
    let path = dir.join(METADATA_FILE);
    std::fs::write(&path, text).map_err(|e| Error::io(path, e))
}

/// A georeferenced single-band raster of digital numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct GeoRaster {
    pub band: BandId,
    pub raster: Raster,
    /// Transform of this raster's own pixel grid.
    pub geotransform: GeoTransform,
    pub quantification: f64,
}

impl GeoRaster {
    fn pixel_size(&self) -> (f64, f64) {
        (self.geotransform.0[1].abs(), self.geotransform.0[5].abs())
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

fn snap(x: f64) -> f64 {
    if (x - x.round()).abs() < SNAP {
        x.round()
    } else {
        x
    }
}

/// Mosaics `band` of every tile carrying it onto the smallest grid covering
/// them all. Overlaps take the first non-zero value in ascending tile-id
/// order; uncovered cells are 0.
pub fn mosaic_tiles(tiles: &[L1CTile], band: BandId) -> Result<GeoRaster> {
    let mut layers: Vec<(&str, GeoRaster)> = tiles
        .iter()
        .filter(|t| t.bands.contains_key(&band))
        .map(|t| Ok((t.tile_id.as_str(), t.band_layer(band)?)))
        .collect::<Result<_>>()?;
    if layers.is_empty() {
        return Err(Error::InconsistentTiles(format!("no tile carries {band}")));
    }
    layers.sort_by(|a, b| a.0.cmp(b.0));
    if let Some(w) = layers.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::InconsistentTiles(format!("duplicate tile id `{}`", w[0].0)));
    }

    let first = &layers[0].1;
    let [a0, b, _, d0, _, f] = first.geotransform.0;
    let mut placed = Vec::with_capacity(layers.len());
    for (id, layer) in &layers {
        let g = layer.geotransform.0;
        if !layer.geotransform.is_north_up() {
            return Err(Error::InconsistentTiles(format!("tile `{id}` is not north-up")));
        }
        if !close(g[1], b) || !close(g[5], f) {
            return Err(Error::InconsistentTiles(format!(
                "tile `{id}` has pixel size ({}, {}) for {band}, expected ({b}, {f})",
                g[1], g[5]
            )));
        }
        if layer.quantification != first.quantification {
            return Err(Error::InconsistentTiles(format!("tile `{id}` has a different quantification")));
        }
        let (col, row) = ((g[0] - a0) / b, (g[3] - d0) / f);
        if (col - col.round()).abs() > 1e-6 || (row - row.round()).abs() > 1e-6 {
            return Err(Error::InconsistentTiles(format!("tile `{id}` is not aligned to the pixel grid")));
        }
        placed.push((col.round() as i64, row.round() as i64, &layer.raster));
    }

    let col_min = placed.iter().map(|p| p.0).min().expect("non-empty");
    let row_min = placed.iter().map(|p| p.1).min().expect("non-empty");
    let col_max = placed.iter().map(|p| p.0 + p.2.width() as i64).max().expect("non-empty");
    let row_max = placed.iter().map(|p| p.1 + p.2.height() as i64).max().expect("non-empty");
    let (h, w) = ((row_max - row_min) as usize, (col_max - col_min) as usize);
    let mut out = vec![0u16; h * w];
    for (col, row, raster) in placed {
        let (c0, r0) = ((col - col_min) as usize, (row - row_min) as usize);
        for r in 0..raster.height() {
            let dst = &mut out[(r0 + r) * w + c0..(r0 + r) * w + c0 + raster.width()];
            for (d, &s) in dst.iter_mut().zip(raster.row(r)) {
                if *d == 0 {
                    *d = s;
                }
            }
        }
    }
    Ok(GeoRaster {
        band,
        raster: Raster::from_vec(h, w, out)?,
        geotransform: first.geotransform.shifted((col_min) as f64, (row_min) as f64),
        quantification: first.quantification,
    })
}

/// Crops `mosaic` to the bounding box of `footprint`.
pub fn crop_to_footprint(mosaic: &GeoRaster, footprint: &BandFootprint) -> Result<GeoRaster> {
    let (lat_min, lat_max, lon_min, lon_max) = footprint.bounds();
    crop_to_bounds(mosaic, (lon_min, lon_max), (lat_min, lat_max)).map(|(g, _)| g)
}

/// Crops to a `(lon_min, lon_max)` x `(lat_min, lat_max)` box: pixel bounds
/// are the floor and ceiling of the inverse-mapped box corners, clipped to
/// the raster. Also returns the window taken.
pub fn crop_to_bounds(mosaic: &GeoRaster, lon: (f64, f64), lat: (f64, f64)) -> Result<(GeoRaster, Window)> {
    let (h, w) = mosaic.raster.dims();
    let corners = [(lon.0, lat.0), (lon.1, lat.0), (lon.0, lat.1), (lon.1, lat.1)]
        .map(|(x, y)| mosaic.geotransform.invert(x, y));
    let fold = |f: fn(&(f64, f64)) -> f64| {
        corners
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |m, v| (m.0.min(v), m.1.max(v)))
    };
    let (cmin, cmax) = fold(|p| p.0);
    let (rmin, rmax) = fold(|p| p.1);
    let c0 = snap(cmin).floor().max(0.0);
    let c1 = snap(cmax).ceil().min(w as f64);
    let r0 = snap(rmin).floor().max(0.0);
    let r1 = snap(rmax).ceil().min(h as f64);
    if !(c1 > c0 && r1 > r0) {
        let (mosaic_lon, mosaic_lat) = mosaic.geotransform.extent(h, w);
        return Err(Error::NoOverlap {
            foot_lon: lon,
            foot_lat: lat,
            mosaic_lon,
            mosaic_lat,
        });
    }
    let window = Window::new(r0 as usize, c0 as usize, (r1 - r0) as usize, (c1 - c0) as usize);
    Ok((
        GeoRaster {
            band: mosaic.band,
            raster: crop(&mosaic.raster, window)?,
            geotransform: mosaic.geotransform.shifted(c0, r0),
            quantification: mosaic.quantification,
        },
        window,
    ))
}

/// How finer bands are reduced onto the coarsest grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Resampling {
    /// Mean reflectance of each block.
    #[default]
    BlockMean,
    /// Top-left sample of each block.
    Nearest,
}

impl std::str::FromStr for Resampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "block_mean" => Ok(Resampling::BlockMean),
            "nearest" => Ok(Resampling::Nearest),
            other => Err(Error::Parse(format!("unknown resampling `{other}`"))),
        }
    }
}

/// Reflectance planes on a common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Resampled {
    pub planes: BTreeMap<BandId, Plane>,
    pub geotransform: GeoTransform,
}

/// Converts every layer to reflectance on the grid of the coarsest one.
///
/// A finer layer must cover exactly the same area: its dimensions are the
/// coarse ones times the integer pixel-size ratio.
pub fn resample_to_coarsest(layers: &[GeoRaster], method: Resampling) -> Result<Resampled> {
    let coarse = layers
        .iter()
        .max_by(|a, b| a.pixel_size().0.total_cmp(&b.pixel_size().0))
        .ok_or_else(|| Error::InvalidParameter("no layers to resample".into()))?;
    let (h, w) = coarse.raster.dims();
    let mut planes = BTreeMap::new();
    for layer in layers {
        let ratio = coarse.pixel_size().0 / layer.pixel_size().0;
        let k = ratio.round();
        if (ratio - k).abs() > 1e-9 * ratio || k < 1.0 || !close(coarse.pixel_size().1 / layer.pixel_size().1, k) {
            return Err(Error::InvalidParameter(format!(
                "{} pixel size is not an integer fraction of {}",
                layer.band, coarse.band
            )));
        }
        let k = k as usize;
        if layer.raster.dims() != (h * k, w * k) {
            return Err(Error::InvalidParameter(format!(
                "{} is {:?}, expected {:?} to cover the {} grid",
                layer.band,
                layer.raster.dims(),
                (h * k, w * k),
                coarse.band
            )));
        }
        let q = layer.quantification;
        let src = &layer.raster;
        let plane = match method {
            Resampling::BlockMean => Plane::from_fn(h, w, |r, c| {
                let mut sum = 0.0;
                for y in r * k..(r + 1) * k {
                    for &v in &src.row(y)[c * k..(c + 1) * k] {
                        sum += f64::from(v) / q;
                    }
                }
                sum / (k * k) as f64
            })?,
            Resampling::Nearest => Plane::from_fn(h, w, |r, c| f64::from(src.at(r * k, c * k)) / q)?,
        };
        if planes.insert(layer.band, plane).is_some() {
            return Err(Error::InvalidParameter(format!("band {} given twice", layer.band)));
        }
    }
    Ok(Resampled {
        planes,
        geotransform: coarse.geotransform,
    })
}

/// The three reflectance planes of the hotspot detector.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectanceStack {
    pub b8a: Plane,
    pub b11: Plane,
    pub b12: Plane,
    pub geotransform: Option<GeoTransform>,
}

impl ReflectanceStack {
    pub fn new(b8a: Plane, b11: Plane, b12: Plane) -> Result<Self> {
        if b8a.dims() != b11.dims() || b8a.dims() != b12.dims() {
            return Err(Error::InvalidParameter("reflectance planes differ in size".into()));
        }
        for plane in [&b8a, &b11, &b12] {
            if let Some(i) = plane.as_slice().iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::NonFiniteReflectance {
                    row: i / plane.width(),
                    col: i % plane.width(),
                });
            }
        }
        Ok(ReflectanceStack {
            b8a,
            b11,
            b12,
            geotransform: None,
        })
    }

    pub fn from_resampled(mut r: Resampled) -> Result<Self> {
        let mut take = |b| r.planes.remove(&b).ok_or(Error::MissingBand(b));
        let (b8a, b11, b12) = (take(BandId::B8A)?, take(BandId::B11)?, take(BandId::B12)?);
        let mut stack = ReflectanceStack::new(b8a, b11, b12)?;
        stack.geotransform = Some(r.geotransform);
        Ok(stack)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.b8a.dims()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::georef::GeoPoint;

    fn counting(h: usize, w: usize, start: u16) -> Raster {
        Raster::from_fn(h, w, |r, c| start + (r * w + c) as u16).unwrap()
    }

    /// 20 m band grid with 0.001 deg pixels.
    fn tile(id: &str, west: f64, north: f64, raster: Raster) -> L1CTile {
        let gt = GeoTransform::north_up(west, north, 0.0005, 0.0005).unwrap();
        L1CTile::new(id, gt, DEFAULT_QUANTIFICATION, BTreeMap::from([(BandId::B11, raster)])).unwrap()
    }

    #[test]
    fn geotransform_inverse() {
        let g = GeoTransform::new([10.0, 0.01, 0.002, 40.0, -0.001, -0.01]).unwrap();
        let (lon, lat) = g.apply(3.5, 7.25);
        let (c, r) = g.invert(lon, lat);
        assert!((c - 3.5).abs() < 1e-9 && (r - 7.25).abs() < 1e-9);
        assert!(GeoTransform::new([0.0, 1.0, 2.0, 0.0, 2.0, 4.0]).is_err());
        let text = g.to_string();
        assert_eq!(text.parse::<GeoTransform>().unwrap(), g);
    }

    #[test]
    fn single_tile_mosaic_is_the_tile() {
        let t = tile("T1", 15.0, 38.0, counting(4, 5, 1));
        let m = mosaic_tiles(&[t.clone()], BandId::B11).unwrap();
        assert_eq!(m.raster, t.bands[&BandId::B11]);
        assert_eq!(m.geotransform, t.band_geotransform(BandId::B11));
    }

    #[test]
    fn adjacent_tiles_concatenate() {
        let a = tile("T1", 15.0, 38.0, counting(4, 5, 1));
        let b = tile("T2", 15.005, 38.0, counting(4, 3, 100));
        let m = mosaic_tiles(&[b, a], BandId::B11).unwrap();
        assert_eq!(m.raster.dims(), (4, 8));
        for r in 0..4 {
            for c in 0..8 {
                let expected = if c < 5 { 1 + r * 5 + c } else { 100 + r * 3 + c - 5 };
                assert_eq!(m.raster[(r, c)] as usize, expected);
            }
        }
    }

    #[test]
    fn overlap_goes_to_the_smaller_tile_id() {
        let a = tile("A", 15.0, 38.0, Raster::filled(4, 4, 7).unwrap());
        let b = tile("B", 15.0, 38.0, Raster::filled(4, 4, 9).unwrap());
        let mut hole = Raster::filled(4, 4, 7).unwrap();
        hole[(1, 1)] = 0;
        let a_hole = tile("A", 15.0, 38.0, hole);
        assert!(mosaic_tiles(&[b.clone(), a], BandId::B11).unwrap().raster.as_slice().iter().all(|&v| v == 7));
        let m = mosaic_tiles(&[b, a_hole], BandId::B11).unwrap();
        assert_eq!(m.raster[(1, 1)], 9);
        assert_eq!(m.raster[(0, 0)], 7);
    }

    #[test]
    fn inconsistent_tiles_are_rejected() {
        let a = tile("A", 15.0, 38.0, counting(4, 4, 1));
        let mut b = tile("B", 15.0, 38.0, counting(4, 4, 1));
        b.geotransform = GeoTransform::north_up(15.0, 38.0, 0.001, 0.001).unwrap();
        assert!(mosaic_tiles(&[a.clone(), b], BandId::B11).is_err());
        assert!(mosaic_tiles(&[a.clone(), a.clone()], BandId::B11).is_err());
        assert!(mosaic_tiles(&[], BandId::B11).is_err());
        let shifted = tile("C", 15.0004, 38.0, counting(4, 4, 1));
        assert!(mosaic_tiles(&[a, shifted], BandId::B11).is_err());
    }

    fn footprint(north: f64, west: f64, south: f64, east: f64) -> BandFootprint {
        let p = |lat, lon| GeoPoint::new(lat, lon).unwrap();
        BandFootprint::new(BandId::B11, [p(north, west), p(north, east)], [p(south, west), p(south, east)]).unwrap()
    }

    #[test]
    fn crops() {
        let m = mosaic_tiles(&[tile("T", 15.0, 38.0, counting(10, 10, 1))], BandId::B11).unwrap();
        let full = crop_to_footprint(&m, &footprint(38.0, 15.0, 37.99, 15.01)).unwrap();
        assert_eq!(full, m);

        // 2.2 x 3.5 pixels starting on a pixel corner
        let inner = crop_to_footprint(&m, &footprint(37.998, 15.004, 37.9958, 15.0075)).unwrap();
        assert_eq!(inner.raster.dims(), (3, 4));
        assert_eq!(inner.raster[(0, 0)], m.raster[(2, 4)]);

        assert!(matches!(
            crop_to_footprint(&m, &footprint(39.0, 15.0, 38.9, 15.1)),
            Err(Error::NoOverlap { .. })
        ));
    }

    fn layer(band: BandId, raster: Raster) -> GeoRaster {
        let px = band.resolution() / 20.0 * 0.001;
        GeoRaster {
            band,
            raster,
            geotransform: GeoTransform::north_up(15.0, 38.0, px, px).unwrap(),
            quantification: DEFAULT_QUANTIFICATION,
        }
    }

    #[test]
    fn resampling() {
        let same = resample_to_coarsest(&[layer(BandId::B11, Raster::filled(2, 2, 2500).unwrap())], Resampling::BlockMean)
            .unwrap();
        assert!(same.planes[&BandId::B11].as_slice().iter().all(|&v| v == 0.25));

        let fine = Raster::from_vec(2, 2, vec![1000, 2000, 3000, 4000]).unwrap();
        let r = resample_to_coarsest(
            &[layer(BandId::B02, fine.clone()), layer(BandId::B11, Raster::filled(1, 1, 0).unwrap())],
            Resampling::BlockMean,
        )
        .unwrap();
        assert!((r.planes[&BandId::B02][(0, 0)] - 0.25).abs() < 1e-15);
        let n = resample_to_coarsest(
            &[layer(BandId::B02, fine), layer(BandId::B11, Raster::filled(1, 1, 0).unwrap())],
            Resampling::Nearest,
        )
        .unwrap();
        assert_eq!(n.planes[&BandId::B02][(0, 0)], 0.1);

        let constant = resample_to_coarsest(
            &[layer(BandId::B02, Raster::filled(4, 6, 5000).unwrap()), layer(BandId::B11, Raster::filled(2, 3, 0).unwrap())],
            Resampling::BlockMean,
        )
        .unwrap();
        assert!(constant.planes[&BandId::B02].as_slice().iter().all(|&v| v == 0.5));

        let mut odd = layer(BandId::B02, Raster::filled(4, 4, 0).unwrap());
        odd.geotransform = GeoTransform::north_up(15.0, 38.0, 0.0003, 0.0003).unwrap();
        assert!(resample_to_coarsest(&[odd, layer(BandId::B11, Raster::filled(2, 2, 0).unwrap())], Resampling::BlockMean).is_err());
    }

    #[test]
    fn stack_checks_values() {
        let p = |v: f64| Plane::filled(2, 2, v).unwrap();
        assert!(ReflectanceStack::new(p(0.1), p(0.2), p(0.3)).is_ok());
        assert!(matches!(ReflectanceStack::new(p(0.1), p(f64::NAN), p(0.3)), Err(Error::NonFiniteReflectance { .. })));
        assert!(ReflectanceStack::new(p(0.1), p(0.2), Plane::filled(2, 3, 0.0).unwrap()).is_err());
    }

    #[test]
    fn tile_bundle_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let t = tile("T33SVB", 15.0, 38.0, counting(3, 4, 1));
        save_tile_bundle(&t, dir.path()).unwrap();
        assert_eq!(load_tile_bundle(dir.path()).unwrap(), t);
    }
}
