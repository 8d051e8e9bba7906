mod common;

use proptest::prelude::*;
use rand::Rng;
use rawband::hotspot::{compute_hotmap, extract_event_boxes, surround, BoundingBox, Connectivity};
use rawband::l1c::ReflectanceStack;
use rawband::{Mask, Plane};
use rawband_oracle as oracle;

fn rows(p: &Plane) -> Vec<Vec<f64>> {
    (0..p.height()).map(|r| p.row(r).to_vec()).collect()
}

fn random_stack(rng: &mut impl Rng, h: usize, w: usize, max: f64) -> ReflectanceStack {
    let mut plane = || Plane::from_fn(h, w, |_, _| rng.gen_range(0.0..max)).unwrap();
    let (a, b, c) = (plane(), plane(), plane());
    ReflectanceStack::new(a, b, c).unwrap()
}

#[test]
fn hotmap_matches_the_scalar_oracle() {
    let mut rng = common::rng(1);
    for _ in 0..50 {
        let s = random_stack(&mut rng, 24, 31, 2.5);
        let fast = compute_hotmap(&s).unwrap();
        let slow = oracle::hotmap(&rows(&s.b8a), &rows(&s.b11), &rows(&s.b12)).value;
        for r in 0..24 {
            assert_eq!(fast.row(r), &slow[r][..]);
        }
    }
}

#[test]
fn hotmap_on_low_reflectances_exercises_the_ratio_tests() {
    // small values keep the absolute thresholds out of the way
    let mut rng = common::rng(2);
    for _ in 0..20 {
        let s = random_stack(&mut rng, 16, 16, 0.6);
        let fast = compute_hotmap(&s).unwrap();
        let slow = oracle::hotmap(&rows(&s.b8a), &rows(&s.b11), &rows(&s.b12)).value;
        assert!((0..16).all(|r| fast.row(r) == &slow[r][..]));
    }
}

#[test]
fn nan_reflectance_is_rejected() {
    let p = Plane::filled(2, 2, 0.1).unwrap();
    let mut bad = p.clone();
    bad[(1, 0)] = f64::NAN;
    assert!(ReflectanceStack::new(p.clone(), bad, p).is_err());
}

fn sorted_oracle(mask: &Mask, min: usize, eight: bool) -> Vec<BoundingBox> {
    let m: Vec<Vec<bool>> = (0..mask.height()).map(|r| mask.row(r).to_vec()).collect();
    let mut v: Vec<BoundingBox> = oracle::components(&m, eight)
        .value
        .into_iter()
        .filter(|c| c.4 >= min)
        .map(|(row0, col0, rows, cols, active_pixels)| BoundingBox {
            row0,
            col0,
            rows,
            cols,
            active_pixels,
        })
        .collect();
    v.sort();
    v
}

proptest! {
    #[test]
    fn clusters_match_flood_fill(bits in prop::collection::vec(any::<bool>(), 12 * 14), min in 1usize..12, eight in any::<bool>()) {
        let mask = Mask::from_vec(12, 14, bits).unwrap();
        let conn = if eight { Connectivity::Eight } else { Connectivity::Four };
        let boxes = extract_event_boxes(&mask, min, conn).unwrap();
        prop_assert_eq!(boxes, sorted_oracle(&mask, min, eight));
    }

    #[test]
    fn surround_is_a_superset_and_idempotent_on_full(bits in prop::collection::vec(any::<bool>(), 7 * 9)) {
        let mask = Mask::from_vec(7, 9, bits).unwrap();
        let s = surround(&mask);
        for (a, b) in mask.as_slice().iter().zip(s.as_slice()) {
            prop_assert!(!a || *b);
        }
        for r in 0usize..7 {
            for c in 0usize..9 {
                let any = (r.saturating_sub(1)..(r + 2).min(7))
                    .any(|y| (c.saturating_sub(1)..(c + 2).min(9)).any(|x| mask[(y, x)]));
                prop_assert_eq!(s[(r, c)], any);
            }
        }
    }
}

#[test]
fn boxes_are_tight_and_count_pixels() {
    // an L-shaped cluster of 9 and a separate 3x3 square
    let mut m = Mask::filled(10, 10, false).unwrap();
    for r in 0..5 {
        m[(r, 0)] = true;
    }
    for c in 1..5 {
        m[(4, c)] = true;
    }
    for r in 6..9 {
        for c in 6..9 {
            m[(r, c)] = true;
        }
    }
    let boxes = extract_event_boxes(&m, 9, Connectivity::Eight).unwrap();
    assert_eq!(boxes.len(), 2);
    assert_eq!((boxes[0].rows, boxes[0].cols, boxes[0].active_pixels), (5, 5, 9));
    assert_eq!((boxes[1].row0, boxes[1].col0, boxes[1].area()), (6, 6, 9));
}
