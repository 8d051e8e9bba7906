//! Thermal hotspot detection on TOA reflectance: per-pixel spectral tests,
//! neighbourhood gating and clustering of hot pixels into event boxes.
//!
//! A pixel is hot when any of four conditions holds:
//!
//! ```text
//! α = ρ12/ρ11 ≥ 1.4 ∧ ρ12/ρ8A ≥ 1.2 ∧ ρ12 ≥ 0.15
//! β = ρ11/ρ8A ≥ 2 ∧ ρ11 ≥ 0.5 ∧ ρ12 ≥ 0.5
//! S = (ρ12 ≥ 1.2 ∧ ρ8A ≤ 1) ∨ (ρ11 ≥ 1.5 ∧ ρ8A ≥ 1)
//! γ = ρ12 ≥ 1 ∧ ρ11 ≥ 1 ∧ ρ8A ≥ 0.5 ∧ SUR(α ∨ β)
//! ```
//!
//! where SUR is a 3x3 dilation. A ratio with a zero denominator fails its
//! comparison. The cluster-adaptive statistical thresholds of the full
//! detector are not applied.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::l1c::ReflectanceStack;
use crate::raster::{Mask, Window};

/// Clusters with fewer active pixels are discarded.
pub const DEFAULT_MIN_CLUSTER: usize = 9;

fn ratio_at_least(num: f64, den: f64, t: f64) -> bool {
    den != 0.0 && num / den >= t
}

fn alpha(r8a: f64, r11: f64, r12: f64) -> bool {
    ratio_at_least(r12, r11, 1.4) && ratio_at_least(r12, r8a, 1.2) && r12 >= 0.15
}

fn beta(r8a: f64, r11: f64, r12: f64) -> bool {
    ratio_at_least(r11, r8a, 2.0) && r11 >= 0.5 && r12 >= 0.5
}

fn saturated(r8a: f64, r11: f64, r12: f64) -> bool {
    (r12 >= 1.2 && r8a <= 1.0) || (r11 >= 1.5 && r8a >= 1.0)
}

fn gamma_bands(r8a: f64, r11: f64, r12: f64) -> bool {
    r12 >= 1.0 && r11 >= 1.0 && r8a >= 0.5
}

/// Boolean hotmap of `stack`.
pub fn compute_hotmap(stack: &ReflectanceStack) -> Result<Mask> {
    let (h, w) = stack.dims();
    let (p8a, p11, p12) = (stack.b8a.as_slice(), stack.b11.as_slice(), stack.b12.as_slice());
    if let Some(i) = (0..h * w).find(|&i| p8a[i].is_nan() || p11[i].is_nan() || p12[i].is_nan()) {
        return Err(Error::NonFiniteReflectance { row: i / w, col: i % w });
    }
    let ab = Mask::from_fn(h, w, |r, c| {
        let i = r * w + c;
        alpha(p8a[i], p11[i], p12[i]) || beta(p8a[i], p11[i], p12[i])
    })?;
    let sr = surround(&ab);
    Mask::from_fn(h, w, |r, c| {
        let i = r * w + c;
        let (a, b, d) = (p8a[i], p11[i], p12[i]);
        ab[(r, c)] || saturated(a, b, d) || (gamma_bands(a, b, d) && sr[(r, c)])
    })
}

/// True wherever the 3x3 neighbourhood (centre included, clipped at the
/// edges) holds a true pixel.
pub fn surround(mask: &Mask) -> Mask {
    let (h, w) = mask.dims();
    // separable: horizontal then vertical 3-wide max
    let horiz: Vec<bool> = (0..h * w)
        .map(|i| {
            let (r, c) = (i / w, i % w);
            let row = mask.row(r);
            row[c.saturating_sub(1)..(c + 2).min(w)].iter().any(|&v| v)
        })
        .collect();
    Mask::from_fn(h, w, |r, c| (r.saturating_sub(1)..(r + 2).min(h)).any(|y| horiz[y * w + c]))
        .expect("same dimensions")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl std::str::FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "4" => Ok(Connectivity::Four),
            "8" => Ok(Connectivity::Eight),
            other => Err(Error::Parse(format!("connectivity must be 4 or 8, got `{other}`"))),
        }
    }
}

/// Tight box around one cluster of hot pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoundingBox {
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
    pub active_pixels: usize,
}

impl BoundingBox {
    pub fn window(&self) -> Window {
        Window::new(self.row0, self.col0, self.rows, self.cols)
    }

    pub fn area(&self) -> usize {
        self.rows * self.cols
    }
}

impl fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {} {}", self.row0, self.col0, self.rows, self.cols, self.active_pixels)
    }
}

impl std::str::FromStr for BoundingBox {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<usize> = s
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse(format!("bad box line `{s}`")))?;
        match v[..] {
            [row0, col0, rows, cols, active_pixels] if rows > 0 && cols > 0 => Ok(BoundingBox {
                row0,
                col0,
                rows,
                cols,
                active_pixels,
            }),
            _ => Err(Error::Parse(format!("box line needs `row0 col0 rows cols active_pixels`: `{s}`"))),
        }
    }
}

/// `row0 col0 rows cols active_pixels`, one box per line.
pub fn boxes_to_text(boxes: &[BoundingBox]) -> String {
    boxes.iter().map(|b| format!("{b}\n")).collect()
}

pub fn parse_boxes(text: &str) -> Result<Vec<BoundingBox>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or_default().trim())
        .filter(|l| !l.is_empty())
        .map(str::parse)
        .collect()
}

/// One box per connected cluster of at least `min_cluster` true pixels,
/// sorted by origin.
pub fn extract_event_boxes(hotmap: &Mask, min_cluster: usize, connectivity: Connectivity) -> Result<Vec<BoundingBox>> {
    if min_cluster == 0 {
        return Err(Error::InvalidParameter("minimum cluster size must be at least 1".into()));
    }
    let (h, w) = hotmap.dims();
    let mut label = vec![usize::MAX; h * w];
    let mut boxes = Vec::new();
    let mut queue = VecDeque::new();
    let offsets: &[(isize, isize)] = match connectivity {
        Connectivity::Four => &[(-1, 0), (1, 0), (0, -1), (0, 1)],
        Connectivity::Eight => &[(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)],
    };
    let data = hotmap.as_slice();
    for start in 0..h * w {
        if !data[start] || label[start] != usize::MAX {
            continue;
        }
        let id = boxes.len();
        label[start] = id;
        queue.push_back(start);
        let (mut r0, mut r1, mut c0, mut c1, mut n) = (h, 0, w, 0, 0);
        while let Some(i) = queue.pop_front() {
            let (r, c) = (i / w, i % w);
            (r0, r1, c0, c1, n) = (r0.min(r), r1.max(r), c0.min(c), c1.max(c), n + 1);
            for &(dr, dc) in offsets {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                    continue;
                }
                let j = nr as usize * w + nc as usize;
                if data[j] && label[j] == usize::MAX {
                    label[j] = id;
                    queue.push_back(j);
                }
            }
        }
        boxes.push(BoundingBox {
            row0: r0,
            col0: c0,
            rows: r1 - r0 + 1,
            cols: c1 - c0 + 1,
            active_pixels: n,
        });
    }
    boxes.retain(|b| b.active_pixels >= min_cluster);
    boxes.sort();
    Ok(boxes)
}
