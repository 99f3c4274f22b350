//! Dataset ingestion (IDX), pixel normalization and PGM image files.
//!
//! Pixels live in `[-1, 1]` everywhere in the crate; `p ↦ p / 127.5 - 1` maps
//! bytes in and its inverse (rounded, clamped) maps values back out.

mod dataset;
mod idx;
mod pgm;

pub use dataset::{LabeledDataset, Source};
pub use idx::{
    dataset_from_idx, encode_idx_images, encode_idx_labels, load_split, parse_idx_images, parse_idx_labels, IdxImages,
    Split, IMAGES_MAGIC, LABELS_MAGIC,
};
pub use pgm::{decode_image, decode_pgm, encode_image, encode_pgm};

use crate::linalg::Vector;
use crate::scalar::Scalar;

pub(crate) fn normalize_into<T: Scalar>(raw: &[u8], out: &mut Vec<T>) {
    let half = T::lit(127.5);
    out.extend(raw.iter().map(|&p| T::lit(f64::from(p)) / half - T::one()));
}

/// `p ↦ p / 127.5 - 1`
pub fn normalize<T: Scalar>(raw: &[u8]) -> Vector<T> {
    let mut out = Vec::with_capacity(raw.len());
    normalize_into(raw, &mut out);
    Vector::new(out)
}

/// Display map `[-1, 1] → [0, 255]`, rounding to nearest and clamping.
pub fn denormalize<T: Scalar>(values: &[T]) -> Vec<u8> {
    values
        .iter()
        .map(|&v| {
            let p = ((v.to_f64_lossy() + 1.0) * 127.5).round();
            p.clamp(0.0, 255.0) as u8
        })
        .collect()
}

/// Scales `v` by `1 / max(1, ‖v‖∞)` so it fits the display range.
pub fn fit_to_display<T: Scalar>(v: &Vector<T>) -> Vector<T> {
    let m = v.norm_inf();
    if m > T::one() {
        v.scale(T::one() / m)
    } else {
        v.clone()
    }
}
