//! Brute-force reference implementations for cross-checking `rawband`.
//!
//! Everything here works on plain vectors and tuples and is written as the
//! most literal loop available, trading speed for obviousness. None of it
//! calls into the production crate.

/// A value together with the name of the oracle that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<T> {
    pub value: T,
    pub oracle: &'static str,
}

impl<T> OracleResult<T> {
    fn new(value: T, oracle: &'static str) -> Self {
        OracleResult { value, oracle }
    }
}

fn ratio_ge(num: f64, den: f64, t: f64) -> bool {
    if den == 0.0 {
        return false;
    }
    num / den >= t
}

fn alpha_or_beta(r8a: f64, r11: f64, r12: f64) -> bool {
    let alpha = ratio_ge(r12, r11, 1.4) && ratio_ge(r12, r8a, 1.2) && r12 >= 0.15;
    let beta = ratio_ge(r11, r8a, 2.0) && r11 >= 0.5 && r12 >= 0.5;
    alpha || beta
}

/// One pixel of the hotmap. `neighbour_hot` says whether any pixel of the
/// 3x3 neighbourhood (centre included) passes the α or β test.
pub fn hotmap_pixel(r8a: f64, r11: f64, r12: f64, neighbour_hot: bool) -> bool {
    let ab = alpha_or_beta(r8a, r11, r12);
    let saturated = (r12 >= 1.2 && r8a <= 1.0) || (r11 >= 1.5 && r8a >= 1.0);
    let gamma = r12 >= 1.0 && r11 >= 1.0 && r8a >= 0.5 && neighbour_hot;
    ab || saturated || gamma
}

/// Whole hotmap of row-major planes, evaluating the neighbourhood by
/// direct lookup for every pixel.
pub fn hotmap(b8a: &[Vec<f64>], b11: &[Vec<f64>], b12: &[Vec<f64>]) -> OracleResult<Vec<Vec<bool>>> {
    let h = b8a.len();
    let w = if h > 0 { b8a[0].len() } else { 0 };
    let mut out = vec![vec![false; w]; h];
    for r in 0..h {
        for c in 0..w {
            let mut hot_nearby = false;
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (y, x) = (r as i64 + dr, c as i64 + dc);
                    if y >= 0 && x >= 0 && y < h as i64 && x < w as i64 {
                        let (y, x) = (y as usize, x as usize);
                        if alpha_or_beta(b8a[y][x], b11[y][x], b12[y][x]) {
                            hot_nearby = true;
                        }
                    }
                }
            }
            out[r][c] = hotmap_pixel(b8a[r][c], b11[r][c], b12[r][c], hot_nearby);
        }
    }
    OracleResult::new(out, "per-pixel hotmap with direct 3x3 lookup")
}

/// Shift of band `n` relative to band `m`, given the adjacent-couple
/// coefficients `coeffs[k] = (along, across, resolution_m)` for the couple
/// `(order k, order k+1)`. `n` and `m` are positions in the band order,
/// `res_n` the resolution of band `n`. Sums ground displacements in meters
/// and converts to pixels of `n` once.
pub fn chain_sum(coeffs: &[(f64, f64, f64)], n: usize, m: usize, res_n: f64) -> OracleResult<(f64, f64)> {
    let mut along = 0.0;
    let mut across = 0.0;
    let (start, end) = if n < m { (n, m) } else { (m, n) };
    let mut k = start;
    while k < end {
        let (a, c, res) = coeffs[k];
        along += a * res;
        across += c * res;
        k += 1;
    }
    if n < m {
        along = -along;
        across = -across;
    }
    OracleResult::new((along / res_n, across / res_n), "literal chain loop in meters")
}

/// Connected components by stack-based flood fill, as
/// `(row0, col0, rows, cols, pixel_count)` in no particular order.
pub fn components(mask: &[Vec<bool>], eight: bool) -> OracleResult<Vec<(usize, usize, usize, usize, usize)>> {
    let h = mask.len();
    let w = if h > 0 { mask[0].len() } else { 0 };
    let mut seen = vec![vec![false; w]; h];
    let mut out = Vec::new();
    for r in 0..h {
        for c in 0..w {
            if !mask[r][c] || seen[r][c] {
                continue;
            }
            let mut stack = vec![(r, c)];
            seen[r][c] = true;
            let (mut r0, mut r1, mut c0, mut c1, mut n) = (r, r, c, c, 0);
            while let Some((y, x)) = stack.pop() {
                n += 1;
                r0 = r0.min(y);
                r1 = r1.max(y);
                c0 = c0.min(x);
                c1 = c1.max(x);
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if (dy == 0 && dx == 0) || (!eight && dy != 0 && dx != 0) {
                            continue;
                        }
                        let (ny, nx) = (y as i64 + dy, x as i64 + dx);
                        if ny < 0 || nx < 0 || ny >= h as i64 || nx >= w as i64 {
                            continue;
                        }
                        let (ny, nx) = (ny as usize, nx as usize);
                        if mask[ny][nx] && !seen[ny][nx] {
                            seen[ny][nx] = true;
                            stack.push((ny, nx));
                        }
                    }
                }
            }
            out.push((r0, c0, r1 - r0 + 1, c1 - c0 + 1, n));
        }
    }
    OracleResult::new(out, "stack flood fill")
}

/// Patch origins along one axis: every position that is a multiple of the
/// stride, plus the last position if it is not one.
pub fn patch_origins(len: usize, size: usize, stride: usize) -> OracleResult<Vec<usize>> {
    let mut out = Vec::new();
    if size <= len {
        let last = len - size;
        for p in 0..=last {
            if p % stride == 0 || p == last {
                out.push(p);
            }
        }
    }
    OracleResult::new(out, "position enumeration")
}

/// Integer shift `s` maximising the zero-mean normalized cross-correlation
/// between `b[r][c]` and `a[r + s.0][c + s.1]` over their overlap, searched
/// directly over `|s| <= max_shift`. Ties go to the smaller `|s|²`, then
/// smaller along, then smaller across.
pub fn ncc_shift(a: &[Vec<f64>], b: &[Vec<f64>], max_shift: i64) -> OracleResult<(i64, i64)> {
    let h = a.len() as i64;
    let w = a[0].len() as i64;
    let mut best: Option<(f64, (i64, i64))> = None;
    for sa in -max_shift..=max_shift {
        for sc in -max_shift..=max_shift {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for r in 0..h {
                for c in 0..w {
                    let (ar, ac) = (r + sa, c + sc);
                    if ar >= 0 && ac >= 0 && ar < h && ac < w {
                        xs.push(a[ar as usize][ac as usize]);
                        ys.push(b[r as usize][c as usize]);
                    }
                }
            }
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let mut sxy = 0.0;
            let mut sxx = 0.0;
            let mut syy = 0.0;
            for i in 0..xs.len() {
                sxy += (xs[i] - mx) * (ys[i] - my);
                sxx += (xs[i] - mx) * (xs[i] - mx);
                syy += (ys[i] - my) * (ys[i] - my);
            }
            let score = if sxx > 0.0 && syy > 0.0 { sxy / (sxx * syy).sqrt() } else { f64::NEG_INFINITY };
            let better = match best {
                None => true,
                Some((bs, (ba, bc))) => {
                    if score > bs + 1e-9 {
                        true
                    } else if score >= bs - 1e-9 {
                        (sa * sa + sc * sc, sa, sc) < (ba * ba + bc * bc, ba, bc)
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((score, (sa, sc)));
            }
        }
    }
    OracleResult::new(best.expect("non-empty search").1, "direct spatial NCC search")
}

/// Number of pixels of the window `(row0, col0, rows, cols)` covered by at
/// least one box `(row0, col0, rows, cols)`, counted pixel by pixel.
pub fn window_event_area(window: (usize, usize, usize, usize), boxes: &[(usize, usize, usize, usize)]) -> usize {
    let (wr, wc, wh, ww) = window;
    let mut count = 0;
    for r in wr..wr + wh {
        for c in wc..wc + ww {
            if boxes
                .iter()
                .any(|&(br, bc, bh, bw)| r >= br && r < br + bh && c >= bc && c < bc + bw)
            {
                count += 1;
            }
        }
    }
    count
}

/// Mean of each `k x k` block.
pub fn block_mean(plane: &[Vec<f64>], k: usize) -> OracleResult<Vec<Vec<f64>>> {
    let h = plane.len() / k;
    let w = if h > 0 { plane[0].len() / k } else { 0 };
    let mut out = vec![vec![0.0; w]; h];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            let mut s = 0.0;
            for y in 0..k {
                for x in 0..k {
                    s += plane[r * k + y][c * k + x];
                }
            }
            *v = s / (k * k) as f64;
        }
    }
    OracleResult::new(out, "block loop")
}

/// Drops estimates farther than `sigma` population standard deviations from
/// the per-axis median (only with three or more estimates) and averages
/// the rest. `None` when nothing survives.
pub fn trim_then_mean(estimates: &[(f64, f64)], sigma: f64) -> OracleResult<Option<(f64, f64)>> {
    let axis = |f: fn(&(f64, f64)) -> f64| -> (f64, f64) {
        let mut v: Vec<f64> = estimates.iter().map(f).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        (median, var.sqrt())
    };
    let kept: Vec<(f64, f64)> = if estimates.len() < 3 {
        estimates.to_vec()
    } else {
        let (ma, sa) = axis(|e| e.0);
        let (mc, sc) = axis(|e| e.1);
        estimates
            .iter()
            .copied()
            .filter(|e| (e.0 - ma).abs() <= sigma * sa && (e.1 - mc).abs() <= sigma * sc)
            .collect()
    };
    let value = if kept.is_empty() {
        None
    } else {
        let n = kept.len() as f64;
        Some((kept.iter().map(|e| e.0).sum::<f64>() / n, kept.iter().map(|e| e.1).sum::<f64>() / n))
    };
    OracleResult::new(value, "median-centred trim then mean")
}

/// Bilinear blend of four corner values at `(u, v)` in `[0,1]²`, written as
/// two linear interpolations along the edges and one across them.
pub fn bilinear(p0: f64, p1: f64, a0: f64, a1: f64, u: f64, v: f64) -> f64 {
    let top = p0 + (p1 - p0) * u;
    let bottom = a0 + (a1 - a0) * u;
    top + (bottom - top) * v
}
