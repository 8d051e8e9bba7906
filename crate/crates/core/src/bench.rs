//! Registration latency harness: table-driven shifts against exhaustive
//! correlation, with untimed warm-ups and averaged timed passes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use crate::coreg::{apply_coarse_coregistration, phase_correlate, translate, FillPolicy, ShiftTable};
use crate::error::{Error, Result};
use crate::granule::Granule;
use crate::raster::{BandId, Raster};

pub const DEFAULT_BANDS: [BandId; 3] = [BandId::B8A, BandId::B11, BandId::B12];
/// Search half-width of the correlation baseline; covers the largest
/// along-track offsets between B8A and B11.
pub const BASELINE_MAX_SHIFT: usize = 192;

/// A band registration method under test.
pub trait Registrar {
    fn name(&self) -> &str;
    /// Registers `bands` of `granule` onto `bands[0]`.
    fn register(&self, granule: &Granule, bands: &[BandId]) -> Result<BTreeMap<BandId, Raster>>;
}

/// Coarse coregistration from a table held in memory.
pub struct CscRegistrar {
    pub table: ShiftTable,
}

impl Registrar for CscRegistrar {
    fn name(&self) -> &str {
        "csc"
    }

    fn register(&self, granule: &Granule, bands: &[BandId]) -> Result<BTreeMap<BandId, Raster>> {
        let out = apply_coarse_coregistration(granule, bands, &self.table, FillPolicy::ZeroFill)?;
        Ok(out.granule.into_parts().1)
    }
}

/// Per-image exhaustive correlation of every band against the reference.
pub struct CorrelationRegistrar {
    pub max_shift: usize,
}

impl Default for CorrelationRegistrar {
    fn default() -> Self {
        CorrelationRegistrar {
            max_shift: BASELINE_MAX_SHIFT,
        }
    }
}

impl Registrar for CorrelationRegistrar {
    fn name(&self) -> &str {
        "correlation"
    }

    fn register(&self, granule: &Granule, bands: &[BandId]) -> Result<BTreeMap<BandId, Raster>> {
        let &reference = bands
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty band collection".into()))?;
        let base = granule.band(reference)?;
        let mut out = BTreeMap::from([(reference, base.clone())]);
        for &band in &bands[1..] {
            let raster = granule.band(band)?;
            let s = phase_correlate(base, raster, self.max_shift)?;
            out.insert(band, translate(raster, -s.along, -s.across));
        }
        Ok(out)
    }
}

/// Does nothing; its timings bound the harness overhead.
pub struct NoOpRegistrar;

impl Registrar for NoOpRegistrar {
    fn name(&self) -> &str {
        "noop"
    }

    fn register(&self, _: &Granule, _: &[BandId]) -> Result<BTreeMap<BandId, Raster>> {
        Ok(BTreeMap::new())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BenchConfig {
    pub runs: usize,
    pub warmups: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { runs: 3, warmups: 15 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodTiming {
    pub method: String,
    /// Wall time of each full pass over all granules.
    pub run_ms: Vec<f64>,
    pub mean_ms: f64,
    pub per_granule_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub methods: Vec<MethodTiming>,
    pub granules: usize,
    pub bands: Vec<BandId>,
    pub warmups: usize,
    pub runs: usize,
}

impl BenchReport {
    pub fn method(&self, name: &str) -> Option<&MethodTiming> {
        self.methods.iter().find(|m| m.method == name)
    }

    /// How many times faster `fast` is than `slow`.
    pub fn speedup(&self, fast: &str, slow: &str) -> Option<f64> {
        Some(self.method(slow)?.mean_ms / self.method(fast)?.mean_ms)
    }

    pub fn to_table(&self) -> String {
        let bands: Vec<String> = self.bands.iter().map(BandId::to_string).collect();
        let mut s = format!(
            "granules={} bands={} warmups={} runs={}\n",
            self.granules,
            bands.join(","),
            self.warmups,
            self.runs
        );
        let _ = writeln!(s, "{:<12} {:>12} {:>14}", "method", "mean [ms]", "granule [ms]");
        for m in &self.methods {
            let _ = writeln!(s, "{:<12} {:>12.3} {:>14.3}", m.method, m.mean_ms, m.per_granule_ms);
        }
        if let Some(x) = self.speedup("csc", "correlation") {
            let _ = writeln!(s, "speedup csc vs correlation: {x:.1}x");
        }
        s
    }

    /// `method mean_ms run1_ms run2_ms ...`
    pub fn to_machine_lines(&self) -> String {
        self.methods
            .iter()
            .map(|m| {
                let runs: Vec<String> = m.run_ms.iter().map(|t| format!("{t:.6}")).collect();
                format!("{} {:.6} {}\n", m.method, m.mean_ms, runs.join(" "))
            })
            .collect()
    }
}

/// Times each method: `warmups` untimed registrations of the first granule,
/// then `runs` timed passes over all granules. Everything runs on the
/// calling thread.
pub fn benchmark_methods(
    granules: &[Granule],
    bands: &[BandId],
    methods: &[&dyn Registrar],
    config: BenchConfig,
) -> Result<BenchReport> {
    let first = granules
        .first()
        .ok_or_else(|| Error::InvalidParameter("no granules to benchmark".into()))?;
    if config.runs == 0 {
        return Err(Error::InvalidParameter("at least one timed run is required".into()));
    }
    if bands.is_empty() {
        return Err(Error::InvalidParameter("empty band collection".into()));
    }
    let mut timings = Vec::new();
    for method in methods {
        for _ in 0..config.warmups {
            black_box(method.register(black_box(first), bands)?);
        }
        let mut run_ms = Vec::with_capacity(config.runs);
        for _ in 0..config.runs {
            let start = Instant::now();
            for g in granules {
                black_box(method.register(black_box(g), bands)?);
            }
            run_ms.push(start.elapsed().as_secs_f64() * 1e3);
        }
        let mean_ms = run_ms.iter().sum::<f64>() / run_ms.len() as f64;
        timings.push(MethodTiming {
            method: method.name().to_string(),
            run_ms,
            mean_ms,
            per_granule_ms: mean_ms / granules.len() as f64,
        });
    }
    Ok(BenchReport {
        methods: timings,
        granules: granules.len(),
        bands: bands.to_vec(),
        warmups: config.warmups,
        runs: config.runs,
    })
}

/// Coarse coregistration with `table` against the correlation baseline.
pub fn benchmark_registration(
    granules: &[Granule],
    table: &ShiftTable,
    bands: &[BandId],
    config: BenchConfig,
) -> Result<BenchReport> {
    let csc = CscRegistrar { table: table.clone() };
    let baseline = CorrelationRegistrar::default();
    benchmark_methods(granules, bands, &[&csc, &baseline], config)
}
