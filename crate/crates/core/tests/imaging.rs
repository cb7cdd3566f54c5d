mod common;

use proptest::prelude::*;
use rgp::imaging::*;

fn rgb_image(max_side: usize) -> impl Strategy<Value = RasterImage> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<u8>(), w * h * 3)
            .prop_map(move |d| RasterImage::rgb(w, h, d).unwrap())
    })
}

fn gray_image(min_side: usize, max_side: usize) -> impl Strategy<Value = RasterImage> {
    (min_side..=max_side, min_side..=max_side).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<u8>(), w * h)
            .prop_map(move |d| RasterImage::gray(w, h, d).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn otsu_matches_exhaustive_scan(bins in prop::collection::vec(0u64..50, 256)) {
        let mut arr = [0u64; 256];
        arr.copy_from_slice(&bins);
        prop_assume!(arr.iter().sum::<u64>() > 0);
        prop_assert_eq!(otsu_threshold(&Histogram256::from_bins(arr)).unwrap(), common::otsu_oracle(&arr));
    }

    #[test]
    fn histogram_sums_to_pixel_count(img in gray_image(1, 20)) {
        prop_assert_eq!(compute_histogram(&img).unwrap().total(), img.pixel_count() as u64);
    }

    #[test]
    fn color_round_trip_within_one(img in rgb_image(12)) {
        let back = ycbcr_to_rgb(&rgb_to_ycbcr(&img).unwrap()).unwrap();
        for (a, b) in img.data().iter().zip(back.data()) {
            prop_assert!((*a as i16 - *b as i16).abs() <= 1);
        }
    }

    #[test]
    fn clahe_output_is_full_size(img in gray_image(8, 40), tx in 1usize..5, ty in 1usize..5, clip in 1.0f64..8.0) {
        let out = adaptive_hist_eq(&img, (tx, ty), clip).unwrap();
        prop_assert_eq!((out.width(), out.height(), out.channels()), (img.width(), img.height(), 1));
    }

    #[test]
    fn single_tile_clahe_is_its_monotone_map(img in gray_image(8, 32), clip in 1.0f64..8.0) {
        let out = adaptive_hist_eq(&img, (1, 1), clip).unwrap();
        let lut = tile_mapping(&compute_histogram(&img).unwrap(), clip);
        for (src, dst) in img.data().iter().zip(out.data()) {
            prop_assert_eq!(lut[*src as usize], *dst);
        }
        prop_assert!(lut.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn tile_maps_are_monotone(samples in prop::collection::vec(any::<u8>(), 1..500), clip in 1.0f64..10.0) {
        let lut = tile_mapping(&Histogram256::from_samples(&samples), clip);
        prop_assert!(lut.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn constant_image_subtracts_to_offset(
        w in 1usize..16, h in 1usize..16, v in any::<u8>(),
        radius in 1.0f64..12.0, gain in 0.0f64..20.0, offset in 0u8..=255,
    ) {
        let img = RasterImage::filled(w, h, ColorSpace::Rgb, v).unwrap();
        let out = subtract_local_average(&img, radius, gain, offset as f64).unwrap();
        prop_assert!(out.data().iter().all(|&p| p == offset));
    }
}

#[test]
fn clahe_in_tile_ordering_with_uniform_tiles() {
    // each 16x16 tile holds all 256 levels, so every map is the identity and
    // order within a tile is preserved exactly
    let img = RasterImage::gray(
        32,
        32,
        (0..32 * 32)
            .map(|i| {
                let (x, y) = (i % 32, i / 32);
                ((y % 16) * 16 + (x % 16)) as u8
            })
            .collect(),
    )
    .unwrap();
    let out = adaptive_hist_eq(&img, (2, 2), 4.0).unwrap();
    assert_eq!(out, img);
}

#[test]
fn single_bright_pixel_matches_dense_convolution() {
    let mut data = vec![20u8; 81 * 3];
    for c in 0..3 {
        data[(4 * 9 + 4) * 3 + c] = 250;
    }
    data[(4 * 9 + 4) * 3 + 1] = 200;
    let img = RasterImage::rgb(9, 9, data).unwrap();
    let out = subtract_local_average(&img, 2.0, 1.0, 128.0).unwrap();

    // sigma = 1, truncated at 3: explicit 7x7 weights, border replicated
    let sigma = 1.0f64;
    let half = 3i64;
    let mut weights = Vec::new();
    for dy in -half..=half {
        for dx in -half..=half {
            weights.push((
                dx,
                dy,
                (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp(),
            ));
        }
    }
    let norm: f64 = weights.iter().map(|w| w.2).sum();
    for y in 0..9i64 {
        for x in 0..9i64 {
            for c in 0..3 {
                let mut blur = 0.0;
                for &(dx, dy, w) in &weights {
                    let sx = (x + dx).clamp(0, 8) as usize;
                    let sy = (y + dy).clamp(0, 8) as usize;
                    blur += w / norm * img.pixel(sx, sy)[c] as f64;
                }
                let v = img.pixel(x as usize, y as usize)[c] as f64;
                let expected = ((v - blur) + 128.0 + 0.5).floor().clamp(0.0, 255.0) as u8;
                assert_eq!(
                    out.pixel(x as usize, y as usize)[c],
                    expected,
                    "({x},{y}) channel {c}"
                );
            }
        }
    }
}

#[test]
fn preprocess_shape_and_stage_order() {
    let img = common::synthetic_fundus(120, 100, true, 1);
    let cfg = PreprocessConfig {
        output_size: 64,
        ..Default::default()
    };
    let once = preprocess_traced(&img, &cfg, true).unwrap();
    assert_eq!((once.image.width(), once.image.height()), (64, 64));
    assert_eq!(once.image.colorspace(), ColorSpace::Rgb);
    assert_eq!(
        once.trace,
        [Stage::Crop, Stage::Equalize, Stage::Subtract, Stage::Resize]
    );
    assert_eq!(once.intermediates.len(), 4);

    let twice = preprocess_traced(&once.image, &cfg, false).unwrap();
    assert_eq!(twice.trace, once.trace);
    assert_ne!(twice.image, once.image);

    let default_size = preprocess(&img, &PreprocessConfig::default()).unwrap();
    assert_eq!((default_size.width(), default_size.height()), (448, 448));
}

#[test]
fn preprocess_is_deterministic_across_threads() {
    let images: Vec<RasterImage> = (0..6)
        .map(|i| common::synthetic_fundus(90, 80, i % 2 == 0, i))
        .collect();
    let cfg = PreprocessConfig {
        output_size: 48,
        ..Default::default()
    };
    let serial: Vec<RasterImage> = images
        .iter()
        .map(|im| preprocess(im, &cfg).unwrap())
        .collect();
    let parallel: Vec<RasterImage> = std::thread::scope(|s| {
        let handles: Vec<_> = images
            .iter()
            .map(|im| s.spawn(|| preprocess(im, &cfg).unwrap()))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert_eq!(serial, parallel);
}

#[test]
fn color_round_trip_random_pixels() {
    let mut rng = rgp::dataset::rng::SplitMix64::new(11);
    let data: Vec<u8> = (0..3 * 4096).map(|_| rng.below(256) as u8).collect();
    let img = RasterImage::rgb(64, 64, data).unwrap();
    let back = ycbcr_to_rgb(&rgb_to_ycbcr(&img).unwrap()).unwrap();
    let max = img
        .data()
        .iter()
        .zip(back.data())
        .map(|(a, b)| a.abs_diff(*b))
        .max()
        .unwrap();
    assert!(max <= 1);
}
