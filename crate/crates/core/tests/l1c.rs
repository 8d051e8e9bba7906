mod common;

use std::collections::BTreeMap;

use rawband::l1c::{
    crop_to_bounds, load_tile_bundle, mosaic_tiles, resample_to_coarsest, save_tile_bundle, GeoRaster, GeoTransform,
    L1CTile, Resampling, DEFAULT_QUANTIFICATION,
};
use rawband::{BandId, Raster};
use rawband_oracle as oracle;

fn tile(id: &str, west: f64, north: f64, b02: Raster, b11: Raster) -> L1CTile {
    let gt = GeoTransform::north_up(west, north, 0.0005, 0.0005).unwrap();
    L1CTile::new(id, gt, DEFAULT_QUANTIFICATION, BTreeMap::from([(BandId::B02, b02), (BandId::B11, b11)])).unwrap()
}

#[test]
fn mosaic_crop_and_block_mean() {
    // two tiles side by side, 0.02 deg wide each
    let left = tile("T1", 15.0, 38.0, common::noise(40, 40, 1), common::noise(20, 20, 2));
    let right = tile("T2", 15.02, 38.0, common::noise(40, 40, 3), common::noise(20, 20, 4));
    let b02 = mosaic_tiles(&[right.clone(), left.clone()], BandId::B02).unwrap();
    let b11 = mosaic_tiles(&[left, right], BandId::B11).unwrap();
    assert_eq!(b02.raster.dims(), (40, 80));
    assert_eq!(b11.raster.dims(), (20, 40));

    let (lon, lat) = ((15.0105, 15.0294), (37.9902, 37.9979));
    let (c11, w11) = crop_to_bounds(&b11, lon, lat).unwrap();
    assert_eq!((w11.row0, w11.col0, w11.rows, w11.cols), (2, 10, 8, 20));
    let (glon, glat) = c11.geotransform.extent(c11.raster.height(), c11.raster.width());
    let (c02, w02) = crop_to_bounds(&b02, glon, glat).unwrap();
    assert_eq!((w02.row0, w02.col0, w02.rows, w02.cols), (4, 20, 16, 40));

    let res = resample_to_coarsest(&[c02.clone(), c11.clone()], Resampling::BlockMean).unwrap();
    let fine: Vec<Vec<f64>> = (0..c02.raster.height())
        .map(|r| c02.raster.row(r).iter().map(|&v| f64::from(v) / DEFAULT_QUANTIFICATION).collect())
        .collect();
    let expected = oracle::block_mean(&fine, 2).value;
    let got = &res.planes[&BandId::B02];
    for (r, row) in expected.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            assert!((got[(r, c)] - v).abs() < 1e-12);
        }
    }
    assert_eq!(res.planes[&BandId::B11][(3, 4)], f64::from(c11.raster[(3, 4)]) / DEFAULT_QUANTIFICATION);
    assert_eq!(res.geotransform, c11.geotransform);
}

#[test]
fn nearest_takes_the_top_left_sample() {
    let fine = GeoRaster {
        band: BandId::B02,
        raster: Raster::from_fn(4, 4, |r, c| (r * 4 + c) as u16).unwrap(),
        geotransform: GeoTransform::north_up(0.0, 0.0, 1.0, 1.0).unwrap(),
        quantification: 1.0,
    };
    let coarse = GeoRaster {
        band: BandId::B11,
        raster: Raster::filled(2, 2, 1).unwrap(),
        geotransform: GeoTransform::north_up(0.0, 0.0, 2.0, 2.0).unwrap(),
        quantification: 1.0,
    };
    let res = resample_to_coarsest(&[fine, coarse], Resampling::Nearest).unwrap();
    assert_eq!(res.planes[&BandId::B02].as_slice(), &[0.0, 2.0, 8.0, 10.0]);
}

#[test]
fn tile_bundle_survives_disk() {
    let dir = tempfile::tempdir().unwrap();
    let t = common::tile_with(&[common::INSIDE]);
    save_tile_bundle(&t, dir.path()).unwrap();
    assert_eq!(load_tile_bundle(dir.path()).unwrap(), t);
}
