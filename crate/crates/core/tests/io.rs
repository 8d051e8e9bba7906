mod common;

use proptest::prelude::*;
use rawband::granule::{load_granule_bundle, save_granule_bundle};
use rawband::raster::{crop, decode_rawb, encode_rawb, read_rawb, write_rawb};
use rawband::{Raster, Window};
use std::path::Path;

proptest! {
    #[test]
    fn rawb_round_trip(h in 1usize..20, w in 1usize..20, seed in any::<u64>()) {
        let r = common::noise(h, w, seed);
        let bytes = encode_rawb(&r);
        prop_assert_eq!(decode_rawb(&bytes, Path::new("mem")).unwrap(), r);
    }

    #[test]
    fn crop_matches_indexing(r0 in 0usize..10, c0 in 0usize..10, rows in 1usize..10, cols in 1usize..10) {
        let r = common::noise(20, 20, 3);
        let out = crop(&r, Window::new(r0, c0, rows, cols)).unwrap();
        for y in 0..rows {
            for x in 0..cols {
                prop_assert_eq!(out[(y, x)], r[(r0 + y, c0 + x)]);
            }
        }
    }
}

#[test]
fn corrupt_rawb_is_rejected() {
    let bytes = encode_rawb(&common::noise(3, 4, 1));
    assert!(decode_rawb(&bytes[..bytes.len() - 1], Path::new("x")).is_err());
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(decode_rawb(&extra, Path::new("x")).is_err());
    let mut magic = bytes;
    magic[0] = b'X';
    assert!(decode_rawb(&magic, Path::new("x")).is_err());
    assert!(crop(&Raster::filled(4, 4, 0).unwrap(), Window::new(2, 2, 3, 1)).is_err());
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let r = common::noise(5, 7, 2);
    let p = dir.path().join("b.rawb");
    write_rawb(&r, &p).unwrap();
    assert_eq!(read_rawb(&p).unwrap(), r);

    let g = common::scene_granule(4);
    save_granule_bundle(&g, &dir.path().join("g")).unwrap();
    assert_eq!(load_granule_bundle(&dir.path().join("g")).unwrap(), g);
    assert!(load_granule_bundle(&dir.path().join("missing")).is_err());
}
