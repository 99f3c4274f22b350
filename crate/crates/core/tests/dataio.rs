use nullspace_core::dataio::{
    dataset_from_idx, decode_image, decode_pgm, denormalize, encode_idx_images, encode_idx_labels, encode_image,
    encode_pgm, load_split, normalize, parse_idx_images, Source, Split,
};
use nullspace_core::linalg::Vector;
use proptest::prelude::*;

#[test]
fn every_byte_level_survives_normalization() {
    let levels: Vec<u8> = (0..=255).collect();
    assert_eq!(denormalize(normalize::<f64>(&levels).as_slice()), levels);
    assert_eq!(denormalize(normalize::<f32>(&levels).as_slice()), levels);
}

#[test]
fn idx_files_on_disk_load_as_a_split() {
    let dir = tempfile::tempdir().unwrap();
    let pixels: Vec<u8> = (0..3 * 4 * 5).map(|i| (i * 7 % 256) as u8).collect();
    std::fs::write(
        dir.path().join("t10k-images-idx3-ubyte"),
        encode_idx_images(4, 5, &pixels),
    )
    .unwrap();
    std::fs::write(dir.path().join("t10k-labels-idx1-ubyte"), encode_idx_labels(&[2, 0, 1])).unwrap();
    let data = load_split::<f64>(dir.path(), Split::Test, Source::Other).unwrap();
    assert_eq!((data.len(), data.shape()), (3, (4, 5)));
    assert_eq!(data.labels(), &[2, 0, 1]);
    assert_eq!(denormalize(data.image(1)), &pixels[20..40]);
    assert!(load_split::<f64>(dir.path(), Split::Train, Source::Other).is_err());
}

#[test]
fn pgm_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.pgm");
    let v = Vector::new((0..12).map(|i| i as f64 / 6.0 - 1.0).collect());
    encode_image(&v, 3, 4, &path).unwrap();
    let (h, w, back) = decode_image::<f64>(&path).unwrap();
    assert_eq!((h, w), (3, 4));
    assert!(back.max_abs_diff(&v).unwrap() <= 1.0 / 255.0);
}

proptest! {
    #[test]
    fn pgm_round_trip_within_one_level(
        (h, w, values) in (1usize..10, 1usize..10).prop_flat_map(|(h, w)| {
            (Just(h), Just(w), proptest::collection::vec(-1.0f64..=1.0, h * w))
        })
    ) {
        let v = Vector::new(values);
        let (h2, w2, back) = decode_pgm::<f64>(&encode_pgm(&v, h, w).unwrap()).unwrap();
        prop_assert_eq!((h2, w2), (h, w));
        prop_assert!(back.max_abs_diff(&v).unwrap() <= 1.0 / 255.0);
    }

    #[test]
    fn idx_round_trip(count in 0usize..5, rows in 1usize..6, cols in 1usize..6, seed in any::<u8>()) {
        let pixels: Vec<u8> = (0..count * rows * cols).map(|i| (i as u8).wrapping_mul(31).wrapping_add(seed)).collect();
        let labels: Vec<u8> = (0..count).map(|i| (i % 10) as u8).collect();
        let parsed = parse_idx_images(&encode_idx_images(rows, cols, &pixels)).unwrap();
        prop_assert_eq!((parsed.count, parsed.rows, parsed.cols), (count, rows, cols));
        prop_assert_eq!(&parsed.pixels, &pixels);
        let data = dataset_from_idx::<f64>(&encode_idx_images(rows, cols, &pixels), &encode_idx_labels(&labels), Source::Other).unwrap();
        prop_assert_eq!(data.len(), count);
    }

    #[test]
    fn truncated_idx_is_rejected(cut in 1usize..20) {
        let bytes = encode_idx_images(2, 2, &[1, 2, 3, 4, 5, 6, 7, 8]);
        let end = bytes.len().saturating_sub(cut);
        prop_assert!(parse_idx_images(&bytes[..end]).is_err());
    }
}
