//! End-to-end labelling of one raw granule from overlapping L1C tiles.
//!
//! coregister -> georeference -> mosaic/crop/resample -> hotmap -> clusters
//! -> warp into the raw frame. A granule is useful when at least one event
//! box lands inside the raw B8A footprint.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::coreg::{apply_coarse_coregistration, FillPolicy, ShiftTable};
use crate::error::{Error, Result};
use crate::georef::{BandFootprint, GeoRefModel, GranuleGeometry};
use crate::granule::Granule;
use crate::hotspot::{compute_hotmap, extract_event_boxes, BoundingBox, Connectivity, DEFAULT_MIN_CLUSTER};
use crate::kv::KeyValues;
use crate::l1c::{crop_to_bounds, crop_to_footprint, mosaic_tiles, resample_to_coarsest, GeoRaster, GeoTransform,
    L1CTile, ReflectanceStack, Resampling};
use crate::patch::{PatchGridSpec, DEFAULT_MIN_PIXELS};
use crate::raster::BandId;
use crate::warp::{fit_affine, warp_boxes, AffineTransform, DroppedBox, WarpConfig, DEFAULT_BUFFER};

/// `B_S`: the bands the detector works on; the first is the reference.
pub const DETECTION_BANDS: [BandId; 3] = [BandId::B8A, BandId::B11, BandId::B12];

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub shift_table: Option<PathBuf>,
    pub fill: FillPolicy,
    pub buffer: usize,
    /// Manual `(row, col)` box corrections per granule id.
    pub offsets: BTreeMap<String, (i64, i64)>,
    pub min_cluster: usize,
    pub connectivity: Connectivity,
    pub resampling: Resampling,
    pub patch: PatchGridSpec,
    pub min_pixels: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            shift_table: None,
            fill: FillPolicy::ZeroFill,
            buffer: DEFAULT_BUFFER,
            offsets: BTreeMap::new(),
            min_cluster: DEFAULT_MIN_CLUSTER,
            connectivity: Connectivity::Eight,
            resampling: Resampling::BlockMean,
            patch: PatchGridSpec {
                patch_size: 256,
                overlap: 0.25,
            },
            min_pixels: DEFAULT_MIN_PIXELS,
        }
    }
}

fn parse_offset(v: &str) -> Option<(i64, i64)> {
    let (r, c) = v.split_once(',')?;
    Some((r.trim().parse().ok()?, c.trim().parse().ok()?))
}

impl PipelineConfig {
    /// Reads `key=value` settings; absent keys keep their defaults. A
    /// relative `shift_table` is resolved against the config's directory.
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let mut c = PipelineConfig::default();
        for (key, value) in kv.iter() {
            let bad = || kv.error(key, &format!("malformed value `{value}`"));
            match key {
                "shift_table" => {
                    let p = PathBuf::from(value);
                    let base = kv.path().parent().unwrap_or(Path::new(""));
                    c.shift_table = Some(if p.is_relative() { base.join(p) } else { p });
                }
                "fill" => c.fill = value.parse().map_err(|_| bad())?,
                "buffer" => c.buffer = value.parse().map_err(|_| bad())?,
                "min_cluster" => c.min_cluster = value.parse().map_err(|_| bad())?,
                "connectivity" => c.connectivity = value.parse().map_err(|_| bad())?,
                "resampling" => c.resampling = value.parse().map_err(|_| bad())?,
                "patch_size" => c.patch.patch_size = value.parse().map_err(|_| bad())?,
                "overlap" => c.patch.overlap = value.parse().map_err(|_| bad())?,
                "min_pixels" => c.min_pixels = value.parse().map_err(|_| bad())?,
                _ => match key.strip_prefix("offset.") {
                    Some(id) if !id.is_empty() => {
                        c.offsets.insert(id.to_string(), parse_offset(value).ok_or_else(bad)?);
                    }
                    _ => return Err(kv.error(key, "unknown setting")),
                },
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn read(path: &Path) -> Result<Self> {
        PipelineConfig::from_kv(&KeyValues::read(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_cluster == 0 {
            return Err(Error::InvalidParameter("min_cluster must be at least 1".into()));
        }
        PatchGridSpec::new(self.patch.patch_size, self.patch.overlap)?;
        Ok(())
    }

    pub fn offset_for(&self, granule_id: &str) -> (i64, i64) {
        self.offsets.get(granule_id).copied().unwrap_or((0, 0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Useful,
    Discarded,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Useful => "useful",
            Verdict::Discarded => "discarded",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UsefulGranuleVerdict {
    pub granule_id: String,
    pub verdict: Verdict,
    pub reason: String,
    /// Event boxes in the raw reference-band frame.
    pub boxes: Vec<BoundingBox>,
    /// Boxes found in the L1C crop that fell outside the raw frame.
    pub dropped: Vec<DroppedBox>,
}

impl UsefulGranuleVerdict {
    fn discarded(id: &str, reason: String) -> Self {
        UsefulGranuleVerdict {
            granule_id: id.to_string(),
            verdict: Verdict::Discarded,
            reason,
            boxes: Vec::new(),
            dropped: Vec::new(),
        }
    }

    pub fn is_useful(&self) -> bool {
        self.verdict == Verdict::Useful
    }

    /// `key=value` summary; the boxes go in their own file.
    pub fn to_text(&self) -> String {
        format!(
            "granule={}\nverdict={}\nreason={}\nboxes={}\ndropped={}\n",
            self.granule_id,
            self.verdict,
            self.reason,
            self.boxes.len(),
            self.dropped.len()
        )
    }
}

/// Intermediate products of [`classify_useful_granule`], for callers that
/// want more than the verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct Labelled {
    pub verdict: UsefulGranuleVerdict,
    pub footprint: BandFootprint,
    /// Maps L1C crop pixel coordinates to raw pixel coordinates.
    pub transform: Option<AffineTransform>,
    /// Boxes in the L1C crop frame.
    pub l1c_boxes: Vec<BoundingBox>,
    /// `(rows, cols)` of the registered reference band the raw boxes live in.
    pub frame: (usize, usize),
}

/// Decides whether `granule` shows a thermal event, using `tiles` as the
/// L1C reference.
pub fn classify_useful_granule(
    granule_id: &str,
    granule: &Granule,
    tiles: &[L1CTile],
    table: &ShiftTable,
    config: &PipelineConfig,
) -> Result<UsefulGranuleVerdict> {
    label_granule(granule_id, granule, tiles, table, config).map(|l| l.verdict)
}

pub fn label_granule(
    granule_id: &str,
    granule: &Granule,
    tiles: &[L1CTile],
    table: &ShiftTable,
    config: &PipelineConfig,
) -> Result<Labelled> {
    let reference = DETECTION_BANDS[0];
    let registered = apply_coarse_coregistration(granule, &DETECTION_BANDS, table, config.fill)
        .map_err(|e| e.in_stage("coregister"))?;
    let raw = registered.granule.band(reference).expect("registered band");
    let (raw_h, raw_w) = raw.dims();

    let footprint = {
        let original = granule.band(reference).expect("registered band");
        let geometry = GranuleGeometry::of_granule(granule).map_err(|e| e.in_stage("georef"))?;
        let model = GeoRefModel::new(
            granule.metadata(),
            table,
            reference,
            geometry,
            original.height(),
            original.width(),
        )
        .map_err(|e| e.in_stage("georef"))?;
        match &registered.windows {
            Some(w) => model.sub_footprint(w[&reference]),
            None => Ok(model.footprint),
        }
        .map_err(|e| e.in_stage("georef"))?
    };
    let discard = |reason: String| Labelled {
        verdict: UsefulGranuleVerdict::discarded(granule_id, reason),
        footprint,
        transform: None,
        l1c_boxes: Vec::new(),
        frame: (raw_h, raw_w),
    };

    let layers = match crop_detection_layers(tiles, &footprint) {
        Ok(l) => l,
        Err(Error::NoOverlap { .. }) => return Ok(discard("no L1C tile overlaps the footprint".into())),
        Err(e) => return Err(e.in_stage("mosaic")),
    };
    let resampled = resample_to_coarsest(&layers, config.resampling).map_err(|e| e.in_stage("resample"))?;
    let stack = ReflectanceStack::from_resampled(resampled).map_err(|e| e.in_stage("resample"))?;
    let geotransform = stack.geotransform.expect("set by from_resampled");
    let hotmap = compute_hotmap(&stack).map_err(|e| e.in_stage("detect"))?;
    let l1c_boxes =
        extract_event_boxes(&hotmap, config.min_cluster, config.connectivity).map_err(|e| e.in_stage("detect"))?;
    if l1c_boxes.is_empty() {
        return Ok(discard(format!("no hotspot cluster of at least {} pixels", config.min_cluster)));
    }

    let transform = l1c_to_raw(&footprint, &geotransform, raw_h, raw_w).map_err(|e| e.in_stage("warp"))?;
    let warp = WarpConfig {
        buffer: config.buffer,
        offset: config.offset_for(granule_id),
    };
    let (boxes, dropped) = warp_boxes(&transform, &l1c_boxes, &warp, raw_h, raw_w);
    let (verdict, reason) = if boxes.is_empty() {
        (Verdict::Discarded, format!("all {} event boxes fall outside the {reference} footprint", dropped.len()))
    } else {
        (Verdict::Useful, format!("{} event boxes inside the {reference} footprint", boxes.len()))
    };
    Ok(Labelled {
        verdict: UsefulGranuleVerdict {
            granule_id: granule_id.to_string(),
            verdict,
            reason,
            boxes,
            dropped,
        },
        footprint,
        transform: Some(transform),
        l1c_boxes,
        frame: (raw_h, raw_w),
    })
}

/// Mosaics each detection band and crops it: the coarsest band to the
/// footprint's bounding box, finer bands to the same ground area.
pub fn crop_detection_layers(tiles: &[L1CTile], footprint: &BandFootprint) -> Result<Vec<GeoRaster>> {
    let mosaics: Vec<GeoRaster> = DETECTION_BANDS
        .iter()
        .map(|&b| mosaic_tiles(tiles, b))
        .collect::<Result<_>>()?;
    let coarsest = mosaics
        .iter()
        .max_by(|a, b| a.band.resolution().total_cmp(&b.band.resolution()))
        .expect("three bands");
    let coarse = crop_to_footprint(coarsest, footprint)?;
    let (lon, lat) = coarse.geotransform.extent(coarse.raster.height(), coarse.raster.width());
    mosaics
        .iter()
        .map(|m| {
            if m.band == coarse.band {
                Ok(coarse.clone())
            } else {
                crop_to_bounds(m, lon, lat).map(|(g, _)| g)
            }
        })
        .collect()
}

/// Affine map from L1C crop pixel coordinates to raw pixel coordinates,
/// fitted on three footprint corners. Footprint corners sit at the centres
/// of the raw corner pixels.
pub fn l1c_to_raw(
    footprint: &BandFootprint,
    geotransform: &GeoTransform,
    raw_height: usize,
    raw_width: usize,
) -> Result<AffineTransform> {
    let [p0, p1, a0, _] = footprint.corners();
    let to_l1c = |p: crate::georef::GeoPoint| {
        let (col, row) = geotransform.invert(p.lon, p.lat);
        (row, col)
    };
    let (h, w) = (raw_height as f64, raw_width as f64);
    fit_affine(
        [to_l1c(p0), to_l1c(p1), to_l1c(a0)],
        [(0.5, 0.5), (0.5, w - 0.5), (h - 0.5, 0.5)],
    )
}
