//! Binary model container.
//!
//! ```text
//! "NSPEC"                      5 bytes
//! version                      u32
//! activation                   u8   (0 = relu, 1 = sigmoid)
//! layer count                  u32
//! per layer:
//!   rows, cols                 u32, u32
//!   weights                    rows·cols f64, row-major
//!   biases                     rows f64
//! ```
//!
//! All integers and floats are little-endian.

use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::network::{Activation, Layer, Network};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 5] = b"NSPEC";
pub const FORMAT_VERSION: u32 = 1;

impl<T: Scalar> Network<T> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
        w.write_u8(self.activation().tag())?;
        w.write_u32::<LittleEndian>(self.layers().len() as u32)?;
        for layer in self.layers() {
            w.write_u32::<LittleEndian>(layer.outputs() as u32)?;
            w.write_u32::<LittleEndian>(layer.inputs() as u32)?;
            for &x in layer.weights.as_slice().iter().chain(layer.bias.as_slice()) {
                w.write_f64::<LittleEndian>(x.to_f64_lossy())?;
            }
        }
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor::new(bytes);
        let net = read_network(&mut cur)?;
        let used = cur.position() as usize;
        if used != bytes.len() {
            return Err(Error::Model(format!(
                "{} trailing bytes after the last layer (offset {used})",
                bytes.len() - used
            )));
        }
        Ok(net)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn truncated(cur: &Cursor<&[u8]>, what: &str) -> Error {
    Error::Model(format!(
        "file truncated while reading {what} at offset {}",
        cur.position()
    ))
}

fn read_network<T: Scalar>(cur: &mut Cursor<&[u8]>) -> Result<Network<T>> {
    let mut magic = [0u8; 5];
    cur.read_exact(&mut magic).map_err(|_| truncated(cur, "magic"))?;
    if &magic != MAGIC {
        return Err(Error::Model(format!("bad magic {magic:?}, not a model file")));
    }
    let version = cur.read_u32::<LittleEndian>().map_err(|_| truncated(cur, "version"))?;
    if version != FORMAT_VERSION {
        return Err(Error::Model(format!(
            "unsupported format version {version} (this build reads version {FORMAT_VERSION})"
        )));
    }
    let tag = cur.read_u8().map_err(|_| truncated(cur, "activation"))?;
    let activation = Activation::from_tag(tag).ok_or_else(|| Error::Model(format!("unknown activation tag {tag}")))?;
    let count = cur
        .read_u32::<LittleEndian>()
        .map_err(|_| truncated(cur, "layer count"))? as usize;

    let remaining = |cur: &Cursor<&[u8]>| cur.get_ref().len() - cur.position() as usize;
    let mut layers = Vec::with_capacity(count.min(64));
    let mut prev_rows: Option<usize> = None;
    for idx in 0..count {
        let rows = cur
            .read_u32::<LittleEndian>()
            .map_err(|_| truncated(cur, "layer rows"))? as usize;
        let cols = cur
            .read_u32::<LittleEndian>()
            .map_err(|_| truncated(cur, "layer cols"))? as usize;
        if let Some(p) = prev_rows {
            if p != cols {
                return Err(Error::Model(format!(
                    "layer {idx} declares {cols} inputs but layer {} has {p} outputs",
                    idx - 1
                )));
            }
        }
        let values = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_add(rows))
            .filter(|&n| n.checked_mul(8).is_some_and(|b| b <= remaining(cur)))
            .ok_or_else(|| truncated(cur, &format!("layer {idx} ({rows}x{cols})")))?;
        let mut buf = vec![0f64; values];
        cur.read_f64_into::<LittleEndian>(&mut buf)
            .map_err(|_| truncated(cur, "layer values"))?;
        let bias = buf.split_off(rows * cols);
        let weights = Matrix::from_row_major(rows, cols, buf.into_iter().map(T::lit).collect())
            .map_err(|e| Error::Model(format!("layer {idx}: {e}")))?;
        let layer = Layer::new(weights, Vector::new(bias.into_iter().map(T::lit).collect()))
            .map_err(|e| Error::Model(format!("layer {idx}: {e}")))?;
        layers.push(layer);
        prev_rows = Some(rows);
    }
    Network::new(layers, activation).map_err(|e| Error::Model(e.to_string()))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn sample() -> Network<f64> {
        Network::random(&[5, 4, 3], Activation::Relu, &mut ChaCha8Rng::seed_from_u64(1)).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let net = sample();
        let back = Network::<f64>::from_bytes(&net.to_bytes()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn header_layout() {
        let bytes = sample().to_bytes();
        assert_eq!(&bytes[..5], b"NSPEC");
        assert_eq!(&bytes[5..9], &1u32.to_le_bytes());
        assert_eq!(bytes[9], 0);
        assert_eq!(&bytes[10..14], &2u32.to_le_bytes());
        assert_eq!(&bytes[14..22], &[4, 0, 0, 0, 5, 0, 0, 0]);
        assert_eq!(bytes.len(), 14 + 8 + 8 * (20 + 4) + 8 + 8 * (12 + 3));
    }

    #[test]
    fn truncation_is_reported() {
        let bytes = sample().to_bytes();
        for cut in [0, 3, 7, 12, 20, bytes.len() - 1] {
            let err = Network::<f64>::from_bytes(&bytes[..cut]).unwrap_err();
            assert!(err.to_string().contains("truncated"), "cut {cut}: {err}");
        }
    }

    #[test]
    fn version_and_magic_are_checked() {
        let mut bytes = sample().to_bytes();
        bytes[5] = 9;
        assert!(Network::<f64>::from_bytes(&bytes)
            .unwrap_err()
            .to_string()
            .contains("version 9"));
        bytes[0] = b'X';
        assert!(Network::<f64>::from_bytes(&bytes)
            .unwrap_err()
            .to_string()
            .contains("magic"));
    }

    #[test]
    fn mismatched_layer_shapes_rejected() {
        let mut bytes = sample().to_bytes();
        // second layer header starts after the first layer's 24 values
        let second = 14 + 8 + 8 * 24;
        bytes[second + 4..second + 8].copy_from_slice(&7u32.to_le_bytes());
        let err = Network::<f64>::from_bytes(&bytes).unwrap_err().to_string();
        assert!(err.contains("declares 7 inputs"), "{err}");
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut bytes = sample().to_bytes();
        bytes.push(0);
        assert!(Network::<f64>::from_bytes(&bytes).is_err());
    }
}
