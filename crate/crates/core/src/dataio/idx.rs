//! IDX tensors as distributed with MNIST and Fashion-MNIST (big-endian header).

use std::path::Path;

use crate::dataio::dataset::{LabeledDataset, Source};
use crate::dataio::normalize_into;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn image(&self, i: usize) -> &[u8] {
        let d = self.rows * self.cols;
        &self.pixels[i * d..(i + 1) * d]
    }
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Parse {
            offset,
            message: format!(
                "header truncated: need 4 bytes, have {}",
                bytes.len().saturating_sub(offset)
            ),
        })
}

fn check_magic(bytes: &[u8], want: u32) -> Result<()> {
    let magic = read_u32(bytes, 0)?;
    if magic != want {
        return Err(Error::Parse {
            offset: 0,
            message: format!("bad magic 0x{magic:08x}, expected 0x{want:08x}"),
        });
    }
    Ok(())
}

fn payload(bytes: &[u8], offset: usize, expected: usize) -> Result<&[u8]> {
    let actual = bytes.len() - offset;
    if actual != expected {
        let what = if actual < expected {
            "truncated"
        } else {
            "trailing bytes in"
        };
        return Err(Error::Parse {
            offset: offset + actual.min(expected),
            message: format!("{what} payload: expected {expected} bytes, found {actual}"),
        });
    }
    Ok(&bytes[offset..])
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    check_magic(bytes, IMAGES_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let pixels = payload(bytes, 16, count * rows * cols)?.to_vec();
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABELS_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    Ok(payload(bytes, 8, count)?.to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn prefix(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "t10k",
        }
    }
}

/// Parses an image/label file pair and normalizes pixels to `[-1, 1]`.
pub fn dataset_from_idx<T: Scalar>(images: &[u8], labels: &[u8], source: Source) -> Result<LabeledDataset<T>> {
    let images = parse_idx_images(images)?;
    let labels = parse_idx_labels(labels)?;
    if images.count != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} images but {} labels",
            images.count,
            labels.len()
        )));
    }
    let mut pixels = Vec::with_capacity(images.pixels.len());
    normalize_into(&images.pixels, &mut pixels);
    LabeledDataset::from_flat(
        pixels,
        labels.into_iter().map(usize::from).collect(),
        (images.rows, images.cols),
        source,
    )
}

/// Loads `train-*-ubyte` / `t10k-*-ubyte` from `dir`.
pub fn load_split<T: Scalar>(dir: &Path, split: Split, source: Source) -> Result<LabeledDataset<T>> {
    let prefix = split.prefix();
    let read = |name: String| {
        let path = dir.join(&name);
        std::fs::read(&path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
    };
    let images = read(format!("{prefix}-images-idx3-ubyte"))?;
    let labels = read(format!("{prefix}-labels-idx1-ubyte"))?;
    dataset_from_idx(&images, &labels, source)
}

/// Serializes images in IDX form (used to build fixtures).
pub fn encode_idx_images(rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    let count = pixels.len() / (rows * cols).max(1);
    let mut out = Vec::with_capacity(16 + pixels.len());
    for v in [IMAGES_MAGIC, count as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
