mod common;

use rand::Rng;
use rawband::hotspot::BoundingBox;
use rawband::warp::{fit_affine, invert_affine, warp_boxes, AffineTransform, WarpConfig};

fn random_affine(rng: &mut impl Rng) -> AffineTransform {
    loop {
        let t = AffineTransform {
            a: rng.gen_range(-2.0..2.0),
            b: rng.gen_range(-2.0..2.0),
            tx: rng.gen_range(-500.0..500.0),
            c: rng.gen_range(-2.0..2.0),
            d: rng.gen_range(-2.0..2.0),
            ty: rng.gen_range(-500.0..500.0),
        };
        let norm = t.a.abs().max(t.b.abs()).max(t.c.abs()).max(t.d.abs());
        if t.determinant().abs() > 0.2 * norm * norm {
            return t;
        }
    }
}

fn rel_close(p: (f64, f64), q: (f64, f64)) -> bool {
    let scale = p.0.abs().max(p.1.abs()).max(1.0);
    (p.0 - q.0).abs() <= 1e-9 * scale && (p.1 - q.1).abs() <= 1e-9 * scale
}

#[test]
fn fitted_maps_reproduce_their_correspondences() {
    let mut rng = common::rng(5);
    for _ in 0..200 {
        let t = random_affine(&mut rng);
        let src = [(0.0, 0.0), (0.0, 1295.0), (1151.0, 0.0)].map(|(r, c)| (r + rng.gen_range(-3.0..3.0), c));
        let dst = src.map(|p| t.apply(p));
        let fit = fit_affine(src, dst).unwrap();
        for i in 0..3 {
            assert!(rel_close(fit.apply(src[i]), dst[i]));
        }
        let probe = (rng.gen_range(0.0..1152.0), rng.gen_range(0.0..1296.0));
        assert!(rel_close(fit.apply(probe), t.apply(probe)));
    }
}

#[test]
fn box_corners_round_trip() {
    let mut rng = common::rng(6);
    for _ in 0..200 {
        let t = random_affine(&mut rng);
        let inv = invert_affine(&t).unwrap();
        let (r0, c0) = (rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0));
        for p in [(r0, c0), (r0 + 7.0, c0), (r0, c0 + 9.0), (r0 + 7.0, c0 + 9.0)] {
            assert!(rel_close(inv.apply(t.apply(p)), p));
        }
    }
}

#[test]
fn warped_boxes_cover_the_mapped_pixels() {
    let mut rng = common::rng(7);
    let cfg = WarpConfig { buffer: 0, offset: (0, 0) };
    for _ in 0..100 {
        let t = AffineTransform {
            a: rng.gen_range(0.5..2.0),
            b: rng.gen_range(-0.2..0.2),
            tx: rng.gen_range(50.0..100.0),
            c: rng.gen_range(-0.2..0.2),
            d: rng.gen_range(0.5..2.0),
            ty: rng.gen_range(50.0..100.0),
        };
        let b = BoundingBox {
            row0: rng.gen_range(0..100),
            col0: rng.gen_range(0..100),
            rows: rng.gen_range(1..10),
            cols: rng.gen_range(1..10),
            active_pixels: 9,
        };
        let (kept, dropped) = warp_boxes(&t, &[b], &cfg, 1000, 1000);
        assert!(dropped.is_empty());
        let k = kept[0];
        for r in b.row0..b.row0 + b.rows {
            for c in b.col0..b.col0 + b.cols {
                let (y, x) = t.apply((r as f64 + 0.5, c as f64 + 0.5));
                assert!(y >= k.row0 as f64 && y <= (k.row0 + k.rows) as f64);
                assert!(x >= k.col0 as f64 && x <= (k.col0 + k.cols) as f64);
            }
        }
    }
}
