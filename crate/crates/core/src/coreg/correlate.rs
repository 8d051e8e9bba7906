//! Exhaustive normalized cross-correlation over an integer shift window.
//!
//! Every candidate shift is scored with the zero-mean NCC of the overlapping
//! region of the two images. The raw cross products for all shifts come
//! from one FFT correlation; per-overlap sums come from integral images.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::raster::Raster;

/// Integer translation in pixels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Translation {
    pub along: i64,
    pub across: i64,
}

impl Translation {
    pub const fn new(along: i64, across: i64) -> Self {
        Translation { along, across }
    }

    fn tie_key(self) -> (i64, i64, i64) {
        (self.along * self.along + self.across * self.across, self.along, self.across)
    }
}

/// Scores within this distance of the best are ties.
const TIE_EPS: f64 = 1e-9;

/// Finds the translation `s` for which `b[r][c] ≈ a[r + s.along][c + s.across]`,
/// i.e. `b` is `a` translated by `s` (see [`translate`](crate::coreg::translate)),
/// searching `|s| <= max_shift` on both axes.
///
/// Ties go to the smallest shift magnitude, then the smaller along-track
/// component, then the smaller across-track component.
pub fn phase_correlate(a: &Raster, b: &Raster, max_shift: usize) -> Result<Translation> {
    if a.dims() != b.dims() {
        return Err(Error::InvalidParameter(format!(
            "image dimensions differ: {:?} vs {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let (h, w) = a.dims();
    if 2 * max_shift >= h.min(w) {
        return Err(Error::InvalidParameter(format!(
            "max shift {max_shift} must be below half of the smaller dimension of {h}x{w}"
        )));
    }
    let a = standardize(a)?;
    let b = standardize(b)?;

    let ph = next_fast_len(h + max_shift);
    let pw = next_fast_len(w + max_shift);
    let fft = Fft2::new(ph, pw);
    let mut fa = pad(&a, h, w, ph, pw);
    let mut fb = pad(&b, h, w, ph, pw);
    fft.forward(&mut fa);
    fft.forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = x.conj() * y;
    }
    fft.inverse(&mut fa);
    let norm = (ph * pw) as f64;

    let ia = Integral::new(&a, h, w);
    let ib = Integral::new(&b, h, w);

    let m = max_shift as i64;
    let (hi, wi) = (h as i64, w as i64);
    let mut best: Option<(f64, Translation)> = None;
    for sa in -m..=m {
        let (r0, r1) = ((-sa).max(0), (hi - sa).min(hi));
        for sc in -m..=m {
            let (c0, c1) = ((-sc).max(0), (wi - sc).min(wi));
            let n = ((r1 - r0) * (c1 - c0)) as f64;
            let (sum_a, sq_a) = ia.rect(r0, r1, c0, c1);
            let (sum_b, sq_b) = ib.rect(r0 + sa, r1 + sa, c0 + sc, c1 + sc);
            let idx = sa.rem_euclid(ph as i64) as usize * pw + sc.rem_euclid(pw as i64) as usize;
            let cross = fa[idx].re / norm;
            let var_a = sq_a - sum_a * sum_a / n;
            let var_b = sq_b - sum_b * sum_b / n;
            if var_a <= 1e-9 * n || var_b <= 1e-9 * n {
                continue;
            }
            let score = (cross - sum_a * sum_b / n) / (var_a * var_b).sqrt();
            // a[x] pairs with b[x + (sa, sc)], so b is a translated by the negation
            let cand = Translation::new(-sa, -sc);
            let better = match best {
                None => true,
                Some((s, t)) => score > s + TIE_EPS || (score >= s - TIE_EPS && cand.tie_key() < t.tie_key()),
            };
            if better {
                best = Some((score, cand));
            }
        }
    }
    best.map(|(_, t)| t).ok_or(Error::NoTexture)
}

/// Zero mean, unit variance copy; errors on a flat image.
fn standardize(r: &Raster) -> Result<Vec<f64>> {
    let n = r.as_slice().len() as f64;
    let mean = r.as_slice().iter().map(|&v| f64::from(v)).sum::<f64>() / n;
    let var = r
        .as_slice()
        .iter()
        .map(|&v| (f64::from(v) - mean).powi(2))
        .sum::<f64>()
        / n;
    if var <= 0.0 {
        return Err(Error::NoTexture);
    }
    let inv = var.sqrt().recip();
    Ok(r.as_slice().iter().map(|&v| (f64::from(v) - mean) * inv).collect())
}

fn pad(v: &[f64], h: usize, w: usize, ph: usize, pw: usize) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::new(0.0, 0.0); ph * pw];
    for r in 0..h {
        for c in 0..w {
            out[r * pw + c].re = v[r * w + c];
        }
    }
    out
}

/// Smallest `n >= len` whose only prime factors are 2, 3 and 5.
fn next_fast_len(len: usize) -> usize {
    (len.max(1)..)
        .find(|&n| {
            let mut m = n;
            for p in [2, 3, 5] {
                while m % p == 0 {
                    m /= p;
                }
            }
            m == 1
        })
        .expect("5-smooth numbers are unbounded")
}

struct Fft2 {
    rows: usize,
    cols: usize,
    fwd_row: Arc<dyn Fft<f64>>,
    fwd_col: Arc<dyn Fft<f64>>,
    inv_row: Arc<dyn Fft<f64>>,
    inv_col: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            rows,
            cols,
            fwd_row: planner.plan_fft_forward(cols),
            fwd_col: planner.plan_fft_forward(rows),
            inv_row: planner.plan_fft_inverse(cols),
            inv_col: planner.plan_fft_inverse(rows),
        }
    }

    fn forward(&self, data: &mut [Complex<f64>]) {
        self.run(data, &self.fwd_row, &self.fwd_col);
    }

    fn inverse(&self, data: &mut [Complex<f64>]) {
        self.run(data, &self.inv_row, &self.inv_col);
    }

    fn run(&self, data: &mut [Complex<f64>], row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) {
        row.process(data);
        let mut t = transpose(data, self.rows, self.cols);
        col.process(&mut t);
        data.copy_from_slice(&transpose(&t, self.cols, self.rows));
    }
}

fn transpose(data: &[Complex<f64>], rows: usize, cols: usize) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::new(0.0, 0.0); data.len()];
    const BLOCK: usize = 32;
    for rb in (0..rows).step_by(BLOCK) {
        for cb in (0..cols).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(rows) {
                for c in cb..(cb + BLOCK).min(cols) {
                    out[c * rows + r] = data[r * cols + c];
                }
            }
        }
    }
    out
}

/// Summed-area tables of values and squares.
struct Integral {
    w: usize,
    sum: Vec<f64>,
    sq: Vec<f64>,
}

impl Integral {
    fn new(v: &[f64], h: usize, w: usize) -> Self {
        let stride = w + 1;
        let mut sum = vec![0.0; (h + 1) * stride];
        let mut sq = vec![0.0; (h + 1) * stride];
        for r in 0..h {
            let (mut rs, mut rq) = (0.0, 0.0);
            for c in 0..w {
                let x = v[r * w + c];
                rs += x;
                rq += x * x;
                sum[(r + 1) * stride + c + 1] = sum[r * stride + c + 1] + rs;
                sq[(r + 1) * stride + c + 1] = sq[r * stride + c + 1] + rq;
            }
        }
        Integral { w, sum, sq }
    }

    /// Sums over rows `[r0, r1)` and columns `[c0, c1)`.
    fn rect(&self, r0: i64, r1: i64, c0: i64, c1: i64) -> (f64, f64) {
        let s = self.w + 1;
        let at = |t: &[f64], r: i64, c: i64| t[r as usize * s + c as usize];
        let q = |t: &[f64]| at(t, r1, c1) - at(t, r0, c1) - at(t, r1, c0) + at(t, r0, c0);
        (q(&self.sum), q(&self.sq))
    }
}
