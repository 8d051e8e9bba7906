//! `rawband`: runs the raw-granule processing stages individually or as one
//! labelling pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rawband::bench::{
    benchmark_methods, BenchConfig, CorrelationRegistrar, CscRegistrar, Registrar, BASELINE_MAX_SHIFT,
    DEFAULT_BANDS,
};
use rawband::coreg::{apply_coarse_coregistration, FillPolicy, ShiftTable};
use rawband::georef::{footprints_to_text, parse_footprints, BandFootprint, GeoRefModel};
use rawband::granule::{load_granule_bundle, save_granule_bundle, METADATA_FILE};
use rawband::hotspot::{boxes_to_text, compute_hotmap, extract_event_boxes, parse_boxes, BoundingBox, Connectivity};
use rawband::l1c::{
    load_tile_bundle, resample_to_coarsest, save_tile_bundle, L1CTile, ReflectanceStack, Resampling,
    GEOTRANSFORM_RESOLUTION,
};
use rawband::patch::{dataset_stats, label_patches, labels_to_text, patch_grid, PatchGridSpec};
use rawband::pipeline::{crop_detection_layers, l1c_to_raw, label_granule, PipelineConfig, DETECTION_BANDS};
use rawband::warp::{warp_boxes, DroppedBox, WarpConfig};
use rawband::{BandId, Granule, Window};

#[derive(Parser)]
#[command(name = "rawband", version, about = "Raw multispectral granule processing")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; they override values from `--config`.
#[derive(Args)]
struct Common {
    /// `key=value` pipeline configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input bundle (or directory of bundles, where supported).
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    shift_table: Option<PathBuf>,
    #[arg(long, global = true)]
    patch_size: Option<usize>,
    #[arg(long, global = true)]
    overlap: Option<f64>,
    #[arg(long, global = true)]
    min_cluster: Option<usize>,
    #[arg(long, global = true)]
    buffer: Option<usize>,
    /// `zero_fill` or `crop_to_valid`.
    #[arg(long, global = true)]
    fill: Option<FillPolicy>,
    #[arg(long, global = true)]
    min_pixels: Option<usize>,
    /// `4` or `8`.
    #[arg(long, global = true)]
    connectivity: Option<Connectivity>,
    /// `bilinear` or `nearest`.
    #[arg(long, global = true)]
    resampling: Option<Resampling>,
    /// Granule id used for manual offsets; defaults to the input directory name.
    #[arg(long, global = true)]
    id: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Register the detection bands onto B8A with the stored shifts.
    Coregister,
    /// Write the footprint of every band of a raw granule.
    Georef {
        /// `windows.txt` from `coregister` under crop_to_valid.
        #[arg(long)]
        windows: Option<PathBuf>,
    },
    /// Mosaic L1C tiles and crop them to the B8A footprint.
    Mosaic {
        /// Tile bundle, or directory of tile bundles.
        #[arg(long)]
        tiles: PathBuf,
        #[arg(long)]
        footprint: PathBuf,
    },
    /// Find thermal event boxes in an L1C crop.
    Detect,
    /// Map L1C crop boxes into the frame of a registered granule.
    Warp {
        /// L1C crop written by `mosaic`.
        #[arg(long)]
        l1c: PathBuf,
        #[arg(long)]
        footprint: PathBuf,
        #[arg(long)]
        boxes: PathBuf,
    },
    /// Split a granule's B8A frame into labelled patches.
    Patchify {
        /// Event boxes in the granule frame; none means every patch is a non-event.
        #[arg(long)]
        boxes: Option<PathBuf>,
    },
    /// Time coarse coregistration against the correlation baseline.
    Bench {
        #[arg(long, default_value_t = BenchConfig::default().runs)]
        runs: usize,
        #[arg(long, default_value_t = BenchConfig::default().warmups)]
        warmups: usize,
        #[arg(long, default_value_t = BASELINE_MAX_SHIFT)]
        max_shift: usize,
    },
    /// Classify and label raw granules end to end.
    Pipeline {
        /// Tile bundle, or directory of tile bundles.
        #[arg(long)]
        tiles: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Usage,
    Data,
}

#[derive(Debug)]
struct Failure {
    kind: Kind,
    message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    Failure {
        kind: Kind::Usage,
        message: message.into(),
    }
    .into()
}

fn data(message: impl Into<String>) -> anyhow::Error {
    Failure {
        kind: Kind::Data,
        message: message.into(),
    }
    .into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return match f.kind {
                Kind::Usage => 1,
                Kind::Data => 2,
            };
        }
        if cause.downcast_ref::<rawband::Error>().is_some() {
            return 2;
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(3),
    }
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    let config = load_config(c)?;
    let out = c.out.as_deref().ok_or_else(|| usage("--out is required"))?;
    match &cli.command {
        Command::Coregister => coregister(c, &config, out),
        Command::Georef { windows } => georef(c, &config, windows.as_deref(), out),
        Command::Mosaic { tiles, footprint } => mosaic(tiles, footprint, out),
        Command::Detect => detect(c, &config, out),
        Command::Warp { l1c, footprint, boxes } => warp(c, &config, l1c, footprint, boxes, out),
        Command::Patchify { boxes } => patchify(c, &config, boxes.as_deref(), out),
        Command::Bench {
            runs,
            warmups,
            max_shift,
        } => bench(c, &config, BenchConfig { runs: *runs, warmups: *warmups }, *max_shift, out),
        Command::Pipeline { tiles } => pipeline(c, &config, tiles, out),
    }
}

fn load_config(c: &Common) -> Result<PipelineConfig> {
    let mut config = match &c.config {
        Some(path) => PipelineConfig::read(path).map_err(|e| usage(e.to_string()))?,
        None => PipelineConfig::default(),
    };
    if let Some(p) = &c.shift_table {
        config.shift_table = Some(p.clone());
    }
    if let Some(v) = c.fill {
        config.fill = v;
    }
    if let Some(v) = c.buffer {
        config.buffer = v;
    }
    if let Some(v) = c.min_cluster {
        config.min_cluster = v;
    }
    if let Some(v) = c.connectivity {
        config.connectivity = v;
    }
    if let Some(v) = c.resampling {
        config.resampling = v;
    }
    if let Some(v) = c.min_pixels {
        config.min_pixels = v;
    }
    if c.patch_size.is_some() || c.overlap.is_some() {
        let size = c.patch_size.unwrap_or(config.patch.patch_size);
        let overlap = c.overlap.unwrap_or(config.patch.overlap);
        config.patch = PatchGridSpec::new(size, overlap).map_err(|e| usage(e.to_string()))?;
    }
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

fn input(c: &Common) -> Result<&Path> {
    c.input.as_deref().ok_or_else(|| usage("--in is required"))
}

fn shift_table(config: &PipelineConfig) -> Result<ShiftTable> {
    let path = config
        .shift_table
        .as_deref()
        .ok_or_else(|| usage("a shift table is required: pass --shift-table or set shift_table in --config"))?;
    Ok(ShiftTable::read(path)?)
}

fn dir_name(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "granule".into())
}

fn granule_id(c: &Common, dir: &Path) -> String {
    c.id.clone().unwrap_or_else(|| dir_name(dir))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

/// A bundle directory, or a directory whose subdirectories are bundles,
/// in name order.
fn bundle_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    if dir.join(METADATA_FILE).is_file() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let entries = fs::read_dir(dir).map_err(|e| data(format!("{}: {e}", dir.display())))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(METADATA_FILE).is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(data(format!("{}: no bundles found", dir.display())));
    }
    Ok(dirs)
}

fn load_tiles(dir: &Path) -> Result<Vec<L1CTile>> {
    bundle_dirs(dir)?
        .iter()
        .map(|d| load_tile_bundle(d).map_err(Into::into))
        .collect()
}

fn reference_footprint(path: &Path) -> Result<BandFootprint> {
    let reference = DETECTION_BANDS[0];
    parse_footprints(&read_text(path)?)?
        .into_iter()
        .find(|f| f.band == reference)
        .ok_or_else(|| data(format!("{}: no {reference} footprint", path.display())))
}

fn reference_frame(granule: &Granule) -> Result<(usize, usize)> {
    Ok(granule.band(DETECTION_BANDS[0])?.dims())
}

fn windows_to_text(windows: &BTreeMap<BandId, Window>) -> String {
    windows
        .iter()
        .map(|(b, w)| format!("{b} {} {} {} {}\n", w.row0, w.col0, w.rows, w.cols))
        .collect()
}

fn parse_windows(text: &str) -> Result<BTreeMap<BandId, Window>> {
    let mut out = BTreeMap::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let bad = || data(format!("bad window line `{line}`"));
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(bad());
        }
        let n: Vec<usize> = f[1..].iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(|_| bad())?;
        out.insert(f[0].parse::<BandId>()?, Window::new(n[0], n[1], n[2], n[3]));
    }
    Ok(out)
}

fn dropped_to_text(dropped: &[DroppedBox]) -> String {
    dropped.iter().map(|d| format!("{} # {}\n", d.source, d.reason)).collect()
}

fn write_patches(frame: (usize, usize), boxes: &[BoundingBox], config: &PipelineConfig, out: &Path) -> Result<()> {
    let windows = patch_grid(frame.0, frame.1, &config.patch)?;
    let labels = label_patches(&windows, boxes, config.min_pixels);
    let stats = dataset_stats(&labels)?;
    write(out, "labels.txt", &labels_to_text(&windows, &labels))?;
    write(
        out,
        "stats.txt",
        &format!(
            "events={}\nnonevents={}\nproportion={:.6}\n",
            stats.events, stats.nonevents, stats.proportion
        ),
    )
}

fn coregister(c: &Common, config: &PipelineConfig, out: &Path) -> Result<()> {
    let granule = load_granule_bundle(input(c)?)?;
    let table = shift_table(config)?;
    let reg = apply_coarse_coregistration(&granule, &DETECTION_BANDS, &table, config.fill)?;
    save_granule_bundle(&reg.granule, out)?;
    let shifts: String = reg.shifts.iter().map(|(b, (al, ac))| format!("{b} {al} {ac}\n")).collect();
    write(out, "shifts.txt", &shifts)?;
    if let Some(w) = &reg.windows {
        write(out, "windows.txt", &windows_to_text(w))?;
    }
    Ok(())
}

fn georef(c: &Common, config: &PipelineConfig, windows: Option<&Path>, out: &Path) -> Result<()> {
    let granule = load_granule_bundle(input(c)?)?;
    let table = shift_table(config)?;
    let windows = match windows {
        Some(p) => parse_windows(&read_text(p)?)?,
        None => BTreeMap::new(),
    };
    let mut footprints = Vec::new();
    for &band in granule.bands().keys() {
        let model = GeoRefModel::for_granule(&granule, &table, band)?;
        footprints.push(match windows.get(&band) {
            Some(&w) => model.sub_footprint(w)?,
            None => model.footprint,
        });
    }
    write(out, "footprints.txt", &footprints_to_text(&footprints))
}

fn mosaic(tiles: &Path, footprint: &Path, out: &Path) -> Result<()> {
    let tiles = load_tiles(tiles)?;
    let footprint = reference_footprint(footprint)?;
    let layers = crop_detection_layers(&tiles, &footprint)?;
    let first = &layers[0];
    let geotransform = first
        .geotransform
        .coarsened(GEOTRANSFORM_RESOLUTION / first.band.resolution());
    let mut bands = BTreeMap::new();
    for layer in &layers {
        if layer.quantification != first.quantification {
            return Err(data("tiles disagree on the quantification value"));
        }
        bands.insert(layer.band, layer.raster.clone());
    }
    let crop = L1CTile::new("crop", geotransform, first.quantification, bands)?;
    for layer in &layers {
        anyhow::ensure!(
            crop.band_geotransform(layer.band) == layer.geotransform,
            "{} crop is not on the common grid",
            layer.band
        );
    }
    save_tile_bundle(&crop, out)?;
    Ok(())
}

fn detect(c: &Common, config: &PipelineConfig, out: &Path) -> Result<()> {
    let crop = load_tile_bundle(input(c)?)?;
    let layers = DETECTION_BANDS
        .iter()
        .map(|&b| crop.band_layer(b))
        .collect::<rawband::Result<Vec<_>>>()?;
    let stack = ReflectanceStack::from_resampled(resample_to_coarsest(&layers, config.resampling)?)?;
    let hotmap = compute_hotmap(&stack)?;
    let boxes = extract_event_boxes(&hotmap, config.min_cluster, config.connectivity)?;
    write(out, "boxes.txt", &boxes_to_text(&boxes))
}

fn warp(c: &Common, config: &PipelineConfig, l1c: &Path, footprint: &Path, boxes: &Path, out: &Path) -> Result<()> {
    let dir = input(c)?;
    let granule = load_granule_bundle(dir)?;
    let (h, w) = reference_frame(&granule)?;
    let crop = load_tile_bundle(l1c)?;
    let coarsest = DETECTION_BANDS
        .iter()
        .map(|b| b.resolution())
        .fold(f64::MIN, f64::max);
    let geotransform = crop.geotransform.coarsened(coarsest / GEOTRANSFORM_RESOLUTION);
    let transform = l1c_to_raw(&reference_footprint(footprint)?, &geotransform, h, w)?;
    let boxes = parse_boxes(&read_text(boxes)?)?;
    let cfg = WarpConfig {
        buffer: config.buffer,
        offset: config.offset_for(&granule_id(c, dir)),
    };
    let (kept, dropped) = warp_boxes(&transform, &boxes, &cfg, h, w);
    write(out, "transform.txt", &format!("{transform}\n"))?;
    write(out, "boxes.txt", &boxes_to_text(&kept))?;
    write(out, "dropped.txt", &dropped_to_text(&dropped))
}

fn patchify(c: &Common, config: &PipelineConfig, boxes: Option<&Path>, out: &Path) -> Result<()> {
    let granule = load_granule_bundle(input(c)?)?;
    let boxes = match boxes {
        Some(p) => parse_boxes(&read_text(p)?)?,
        None => Vec::new(),
    };
    write_patches(reference_frame(&granule)?, &boxes, config, out)
}

fn bench(c: &Common, config: &PipelineConfig, cfg: BenchConfig, max_shift: usize, out: &Path) -> Result<()> {
    let granules = bundle_dirs(input(c)?)?
        .iter()
        .map(|d| load_granule_bundle(d))
        .collect::<rawband::Result<Vec<_>>>()?;
    let csc = CscRegistrar {
        table: shift_table(config)?,
    };
    let baseline = CorrelationRegistrar { max_shift };
    let methods: [&dyn Registrar; 2] = [&csc, &baseline];
    let report = benchmark_methods(&granules, &DEFAULT_BANDS, &methods, cfg)?;
    let table = report.to_table();
    print!("{table}");
    write(out, "report.txt", &table)?;
    write(out, "bench.txt", &report.to_machine_lines())
}

fn pipeline(c: &Common, config: &PipelineConfig, tiles: &Path, out: &Path) -> Result<()> {
    let input = input(c)?;
    let dirs = bundle_dirs(input)?;
    let tiles = load_tiles(tiles)?;
    let table = shift_table(config)?;
    let single = dirs.len() == 1 && dirs[0] == input;
    let mut summary = String::new();
    for dir in &dirs {
        // --id only names a single granule; batch ids are the directory names
        let id = if single { granule_id(c, dir) } else { dir_name(dir) };
        let granule = load_granule_bundle(dir)?;
        let labelled = label_granule(&id, &granule, &tiles, &table, config).with_context(|| format!("granule {id}"))?;
        let v = &labelled.verdict;
        let dest = if single { out.to_path_buf() } else { out.join(&id) };
        write(&dest, "verdict.txt", &v.to_text())?;
        write(&dest, "footprint.txt", &footprints_to_text(&[labelled.footprint]))?;
        write(&dest, "l1c_boxes.txt", &boxes_to_text(&labelled.l1c_boxes))?;
        write(&dest, "boxes.txt", &boxes_to_text(&v.boxes))?;
        write(&dest, "dropped.txt", &dropped_to_text(&v.dropped))?;
        if let Some(t) = &labelled.transform {
            write(&dest, "transform.txt", &format!("{t}\n"))?;
        }
        if v.is_useful() {
            write_patches(labelled.frame, &v.boxes, config, &dest)?;
        }
        summary.push_str(&format!("{id} {}\n", v.verdict));
    }
    if !single {
        write(out, "summary.txt", &summary)?;
    }
    print!("{summary}");
    Ok(())
}
