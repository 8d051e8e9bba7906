//! Decomposition of granules into overlapping square patches and event labels.

use std::fmt;

use crate::error::{Error, Result};
use crate::hotspot::BoundingBox;
use crate::raster::Window;

/// A patch is an event when more than this many annotated pixels fall in it.
pub const DEFAULT_MIN_PIXELS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatchGridSpec {
    pub patch_size: usize,
    pub overlap: f64,
}

impl PatchGridSpec {
    pub fn new(patch_size: usize, overlap: f64) -> Result<Self> {
        if patch_size == 0 {
            return Err(Error::InvalidParameter("patch size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&overlap) {
            return Err(Error::InvalidParameter(format!("overlap {overlap} is outside [0, 1)")));
        }
        let spec = PatchGridSpec { patch_size, overlap };
        if spec.stride() == 0 {
            return Err(Error::InvalidParameter(format!(
                "overlap {overlap} leaves a zero stride for {patch_size} px patches"
            )));
        }
        Ok(spec)
    }

    pub fn stride(&self) -> usize {
        (self.patch_size as f64 * (1.0 - self.overlap)).round() as usize
    }
}

fn origins(len: usize, size: usize, stride: usize) -> Vec<usize> {
    let last = len - size;
    let mut v: Vec<usize> = (0..=last).step_by(stride).collect();
    if v.last() != Some(&last) {
        v.push(last);
    }
    v
}

/// Windows at multiples of the stride, plus a final row/column of windows
/// flush with the bottom/right edge when the stride does not land on it.
/// Row-major order.
pub fn patch_grid(height: usize, width: usize, spec: &PatchGridSpec) -> Result<Vec<Window>> {
    let size = spec.patch_size;
    if size > height.min(width) {
        return Err(Error::InvalidParameter(format!(
            "{size} px patches do not fit a {height}x{width} raster"
        )));
    }
    let rows = origins(height, size, spec.stride());
    let cols = origins(width, size, spec.stride());
    Ok(rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| Window::new(r, c, size, size)))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Event,
    NonEvent,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Event => "event",
            Label::NonEvent => "nonevent",
        })
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "event" => Ok(Label::Event),
            "nonevent" => Ok(Label::NonEvent),
            other => Err(Error::Parse(format!("unknown label `{other}`"))),
        }
    }
}

/// Labels each window by the number of its pixels covered by at least one
/// box: an event iff that count exceeds `min_pixels`. Overlapping boxes are
/// not double counted; boxes may extend past the raster.
pub fn label_patches(windows: &[Window], boxes: &[BoundingBox], min_pixels: usize) -> Vec<Label> {
    if boxes.is_empty() || windows.is_empty() {
        return vec![Label::NonEvent; windows.len()];
    }
    let h = windows.iter().map(|w| w.row0 + w.rows).max().unwrap_or(0);
    let w = windows.iter().map(|w| w.col0 + w.cols).max().unwrap_or(0);
    // summed-area table over the union of boxes, restricted to the windows' extent
    let stride = w + 1;
    let mut sat = vec![0u32; (h + 1) * stride];
    let mut covered = vec![false; h * w];
    for b in boxes {
        for r in b.row0.min(h)..(b.row0 + b.rows).min(h) {
            covered[r * w + b.col0.min(w)..r * w + (b.col0 + b.cols).min(w)].fill(true);
        }
    }
    for r in 0..h {
        let mut run = 0u32;
        for c in 0..w {
            run += covered[r * w + c] as u32;
            sat[(r + 1) * stride + c + 1] = sat[r * stride + c + 1] + run;
        }
    }
    windows
        .iter()
        .map(|win| {
            let (r0, c0, r1, c1) = (win.row0, win.col0, win.row0 + win.rows, win.col0 + win.cols);
            let area = sat[r1 * stride + c1] + sat[r0 * stride + c0] - sat[r0 * stride + c1] - sat[r1 * stride + c0];
            if area as usize > min_pixels {
                Label::Event
            } else {
                Label::NonEvent
            }
        })
        .collect()
}

/// `row0 col0 label`, one window per line.
pub fn labels_to_text(windows: &[Window], labels: &[Label]) -> String {
    windows
        .iter()
        .zip(labels)
        .map(|(w, l)| format!("{} {} {l}\n", w.row0, w.col0))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DatasetStats {
    pub events: usize,
    pub nonevents: usize,
    pub proportion: f64,
}

pub fn dataset_stats(labels: &[Label]) -> Result<DatasetStats> {
    if labels.is_empty() {
        return Err(Error::InvalidParameter("no labels".into()));
    }
    let events = labels.iter().filter(|&&l| l == Label::Event).count();
    Ok(stats_from_counts(events, labels.len() - events))
}

pub fn stats_from_counts(events: usize, nonevents: usize) -> DatasetStats {
    let total = events + nonevents;
    DatasetStats {
        events,
        nonevents,
        proportion: if total == 0 { 0.0 } else { events as f64 / total as f64 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(size: usize, overlap: f64) -> PatchGridSpec {
        PatchGridSpec::new(size, overlap).unwrap()
    }

    fn bx(row0: usize, col0: usize, rows: usize, cols: usize) -> BoundingBox {
        BoundingBox {
            row0,
            col0,
            rows,
            cols,
            active_pixels: rows * cols,
        }
    }

    #[test]
    fn grid_examples() {
        assert_eq!(patch_grid(128, 128, &spec(128, 0.0)).unwrap(), vec![Window::new(0, 0, 128, 128)]);
        let tiles = patch_grid(512, 512, &spec(128, 0.0)).unwrap();
        assert_eq!(tiles.len(), 16);
        let g = patch_grid(256, 1296, &spec(256, 0.25)).unwrap();
        let cols: Vec<usize> = g.iter().map(|w| w.col0).collect();
        assert_eq!(cols, vec![0, 192, 384, 576, 768, 960, 1040]);
        assert!(patch_grid(100, 300, &spec(128, 0.5)).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(PatchGridSpec::new(0, 0.0).is_err());
        assert!(PatchGridSpec::new(16, 1.0).is_err());
        assert!(PatchGridSpec::new(1, 0.75).is_err());
        assert_eq!(spec(512, 0.75).stride(), 128);
    }

    #[test]
    fn labelling_boundary() {
        let win = [Window::new(0, 0, 16, 16)];
        assert_eq!(label_patches(&win, &[], 5), vec![Label::NonEvent]);
        assert_eq!(label_patches(&win, &[bx(2, 2, 3, 2)], 5), vec![Label::Event]);
        assert_eq!(label_patches(&win, &[bx(2, 2, 5, 1)], 5), vec![Label::NonEvent]);
        // two overlapping 2x3 boxes cover 9 pixels, not 12
        assert_eq!(label_patches(&win, &[bx(0, 0, 2, 3), bx(1, 0, 2, 3)], 9), vec![Label::NonEvent]);
        assert_eq!(label_patches(&win, &[bx(0, 0, 2, 3), bx(1, 0, 2, 3)], 8), vec![Label::Event]);
    }

    #[test]
    fn partial_intersection_counts_only_the_overlap() {
        let wins = [Window::new(0, 0, 4, 4), Window::new(0, 4, 4, 4)];
        // 2x4 box straddling the two windows: 6 px left, 2 px right
        let labels = label_patches(&wins, &[bx(0, 1, 2, 4)], 5);
        assert_eq!(labels, vec![Label::Event, Label::NonEvent]);
    }

    #[test]
    fn stats() {
        let s = stats_from_counts(1090, 33335);
        assert!((s.proportion - 0.031663).abs() < 5e-6);
        let s = stats_from_counts(2189, 7603);
        assert!((s.proportion - 0.223550).abs() < 5e-6);
        let s = dataset_stats(&[Label::NonEvent; 4]).unwrap();
        assert_eq!((s.events, s.nonevents, s.proportion), (0, 4, 0.0));
        assert!(dataset_stats(&[]).is_err());
    }

    #[test]
    fn label_text() {
        let wins = [Window::new(0, 0, 4, 4), Window::new(0, 4, 4, 4)];
        let text = labels_to_text(&wins, &[Label::Event, Label::NonEvent]);
        assert_eq!(text, "0 0 event\n0 4 nonevent\n");
    }
}
