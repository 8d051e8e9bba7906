//! Transfer of event boxes from the L1C pixel frame into the raw granule frame.

use std::fmt;

use crate::error::{Error, Result};
use crate::hotspot::BoundingBox;

/// Pixels added on every side of a warped box.
pub const DEFAULT_BUFFER: usize = 2;

const SNAP: f64 = 1e-9;

/// `(row, col) -> (a*row + b*col + tx, c*row + d*col + ty)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineTransform {
    pub a: f64,
    pub b: f64,
    pub tx: f64,
    pub c: f64,
    pub d: f64,
    pub ty: f64,
}

impl AffineTransform {
    pub const IDENTITY: AffineTransform = AffineTransform {
        a: 1.0,
        b: 0.0,
        tx: 0.0,
        c: 0.0,
        d: 1.0,
        ty: 0.0,
    };

    pub fn apply(&self, (row, col): (f64, f64)) -> (f64, f64) {
        (self.a * row + self.b * col + self.tx, self.c * row + self.d * col + self.ty)
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &AffineTransform) -> AffineTransform {
        AffineTransform {
            a: self.a * first.a + self.b * first.c,
            b: self.a * first.b + self.b * first.d,
            tx: self.a * first.tx + self.b * first.ty + self.tx,
            c: self.c * first.a + self.d * first.c,
            d: self.c * first.b + self.d * first.d,
            ty: self.c * first.tx + self.d * first.ty + self.ty,
        }
    }
}

impl fmt::Display for AffineTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?} {:?} {:?} {:?} {:?}", self.a, self.b, self.tx, self.c, self.d, self.ty)
    }
}

impl std::str::FromStr for AffineTransform {
    type Err = Error;

    /// Six reals, row-major: `a b tx c d ty`.
    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse(format!("bad affine transform `{}`", s.trim())))?;
        match v[..] {
            [a, b, tx, c, d, ty] if v.iter().all(|x| x.is_finite()) => Ok(AffineTransform { a, b, tx, c, d, ty }),
            _ => Err(Error::Parse("affine transform needs six finite reals `a b tx c d ty`".into())),
        }
    }
}

/// Exact affine map sending each `src[i]` to `dst[i]`.
pub fn fit_affine(src: [(f64, f64); 3], dst: [(f64, f64); 3]) -> Result<AffineTransform> {
    let [(r0, c0), (r1, c1), (r2, c2)] = src;
    let (u1, v1, u2, v2) = (r1 - r0, c1 - c0, r2 - r0, c2 - c0);
    let det = u1 * v2 - u2 * v1;
    let scale = (u1.abs() + v1.abs()).max(u2.abs() + v2.abs()).max(f64::MIN_POSITIVE);
    if !det.is_finite() || det.abs() <= 1e-12 * scale * scale {
        return Err(Error::Collinear);
    }
    // solve [u1 v1; u2 v2] [p; q] = [d1; d2] for each output coordinate
    let solve = |d1: f64, d2: f64| ((d1 * v2 - d2 * v1) / det, (u1 * d2 - u2 * d1) / det);
    let [(x0, y0), (x1, y1), (x2, y2)] = dst;
    let (a, b) = solve(x1 - x0, x2 - x0);
    let (c, d) = solve(y1 - y0, y2 - y0);
    Ok(AffineTransform {
        a,
        b,
        tx: x0 - a * r0 - b * c0,
        c,
        d,
        ty: y0 - c * r0 - d * c0,
    })
}

pub fn invert_affine(t: &AffineTransform) -> Result<AffineTransform> {
    let det = t.determinant();
    let scale = t.a.abs().max(t.b.abs()).max(t.c.abs()).max(t.d.abs());
    if !det.is_finite() || det.abs() <= 1e-12 * scale * scale || scale == 0.0 {
        return Err(Error::SingularTransform);
    }
    let (a, b, c, d) = (t.d / det, -t.b / det, -t.c / det, t.a / det);
    Ok(AffineTransform {
        a,
        b,
        tx: -(a * t.tx + b * t.ty),
        c,
        d,
        ty: -(c * t.tx + d * t.ty),
    })
}

/// Why a box did not make it into the target frame.
#[derive(Clone, Debug, PartialEq)]
pub struct DroppedBox {
    pub source: BoundingBox,
    pub reason: String,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WarpConfig {
    pub buffer: usize,
    /// Manual `(row, col)` correction added after warping.
    pub offset: (i64, i64),
}

impl Default for WarpConfig {
    fn default() -> Self {
        WarpConfig {
            buffer: DEFAULT_BUFFER,
            offset: (0, 0),
        }
    }
}

fn snap_floor(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP {
        r
    } else {
        x.floor()
    }
}

fn snap_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP {
        r
    } else {
        x.ceil()
    }
}

/// Maps the four pixel corners of each box through `t`, takes the integer
/// hull, grows it by the buffer, adds the manual offset and clips to the
/// `height x width` target. Boxes that leave the target entirely are
/// returned separately. `active_pixels` carries over unchanged.
pub fn warp_boxes(
    t: &AffineTransform,
    boxes: &[BoundingBox],
    config: &WarpConfig,
    height: usize,
    width: usize,
) -> (Vec<BoundingBox>, Vec<DroppedBox>) {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let buffer = config.buffer as f64;
    for b in boxes {
        let (r0, c0) = (b.row0 as f64, b.col0 as f64);
        let (r1, c1) = (r0 + b.rows as f64, c0 + b.cols as f64);
        let pts = [(r0, c0), (r0, c1), (r1, c0), (r1, c1)].map(|p| t.apply(p));
        let lo_r = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi_r = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let lo_c = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi_c = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        if ![lo_r, hi_r, lo_c, hi_c].iter().all(|v| v.is_finite()) {
            dropped.push(DroppedBox {
                source: *b,
                reason: "transform produced non-finite coordinates".into(),
            });
            continue;
        }
        let (or, oc) = (config.offset.0 as f64, config.offset.1 as f64);
        let top = (snap_floor(lo_r) - buffer + or).max(0.0);
        let bottom = (snap_ceil(hi_r) + buffer + or).min(height as f64);
        let left = (snap_floor(lo_c) - buffer + oc).max(0.0);
        let right = (snap_ceil(hi_c) + buffer + oc).min(width as f64);
        if bottom <= top || right <= left {
            dropped.push(DroppedBox {
                source: *b,
                reason: format!(
                    "warped to rows {:.1}..{:.1}, cols {:.1}..{:.1}: outside the {height}x{width} frame",
                    lo_r + or,
                    hi_r + or,
                    lo_c + oc,
                    hi_c + oc
                ),
            });
            continue;
        }
        kept.push(BoundingBox {
            row0: top as usize,
            col0: left as usize,
            rows: (bottom - top) as usize,
            cols: (right - left) as usize,
            active_pixels: b.active_pixels,
        });
    }
    (kept, dropped)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(row0: usize, col0: usize, rows: usize, cols: usize) -> BoundingBox {
        BoundingBox {
            row0,
            col0,
            rows,
            cols,
            active_pixels: 9,
        }
    }

    fn close(p: (f64, f64), q: (f64, f64)) -> bool {
        (p.0 - q.0).abs() < 1e-9 && (p.1 - q.1).abs() < 1e-9
    }

    #[test]
    fn fit_reproduces_its_points() {
        let src = [(0.0, 0.0), (0.0, 10.0), (7.0, 0.0)];
        let dst = [(3.0, 4.0), (5.0, 24.0), (17.0, 1.0)];
        let t = fit_affine(src, dst).unwrap();
        for i in 0..3 {
            assert!(close(t.apply(src[i]), dst[i]));
        }
        let inv = invert_affine(&t).unwrap();
        assert!(close(inv.apply(t.apply((2.5, -1.0))), (2.5, -1.0)));
        let id = inv.compose(&t);
        assert!(close((id.a, id.b), (1.0, 0.0)) && close((id.c, id.d), (0.0, 1.0)));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            fit_affine([(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)], [(0.0, 0.0); 3]),
            Err(Error::Collinear)
        ));
        let flat = AffineTransform {
            a: 1.0,
            b: 2.0,
            tx: 0.0,
            c: 2.0,
            d: 4.0,
            ty: 1.0,
        };
        assert!(matches!(invert_affine(&flat), Err(Error::SingularTransform)));
    }

    #[test]
    fn identity_warp_adds_only_the_buffer() {
        let cfg = WarpConfig::default();
        let (kept, dropped) = warp_boxes(&AffineTransform::IDENTITY, &[bx(10, 20, 3, 4)], &cfg, 100, 100);
        assert!(dropped.is_empty());
        assert_eq!(kept, vec![bx(8, 18, 7, 8)]);
        let none = WarpConfig { buffer: 0, offset: (0, 0) };
        let (kept, _) = warp_boxes(&AffineTransform::IDENTITY, &[bx(10, 20, 3, 4)], &none, 100, 100);
        assert_eq!(kept, vec![bx(10, 20, 3, 4)]);
    }

    #[test]
    fn offset_and_clipping() {
        let cfg = WarpConfig {
            buffer: 2,
            offset: (-5, 3),
        };
        let (kept, _) = warp_boxes(&AffineTransform::IDENTITY, &[bx(1, 1, 2, 2)], &cfg, 50, 50);
        // rows -6..0 after the offset: nothing left
        assert!(kept.is_empty());
        let (kept, _) = warp_boxes(&AffineTransform::IDENTITY, &[bx(47, 1, 3, 2)], &WarpConfig::default(), 50, 50);
        assert_eq!(kept, vec![bx(45, 0, 5, 5)]);
    }

    #[test]
    fn boxes_outside_are_reported() {
        let shift = AffineTransform {
            tx: 500.0,
            ..AffineTransform::IDENTITY
        };
        let (kept, dropped) = warp_boxes(&shift, &[bx(0, 0, 3, 3)], &WarpConfig::default(), 100, 100);
        assert!(kept.is_empty());
        assert_eq!(dropped.len(), 1);
        assert!(dropped[0].reason.contains("outside"));
    }

    #[test]
    fn scaling_covers_every_source_pixel() {
        // 20 m -> 10 m grid
        let t = AffineTransform {
            a: 2.0,
            d: 2.0,
            ..AffineTransform::IDENTITY
        };
        let (kept, _) = warp_boxes(&t, &[bx(5, 6, 3, 3)], &WarpConfig { buffer: 0, offset: (0, 0) }, 100, 100);
        assert_eq!(kept, vec![bx(10, 12, 6, 6)]);
    }

    #[test]
    fn text_round_trip() {
        let t = fit_affine([(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)], [(0.1, 0.2), (0.3, 1.7), (1.9, -0.4)]).unwrap();
        let back: AffineTransform = t.to_string().parse().unwrap();
        assert_eq!(back, t);
        assert!("1 2 3".parse::<AffineTransform>().is_err());
        assert!("1 2 3 4 5 NaN".parse::<AffineTransform>().is_err());
    }
}
