//! Binary PGM (`P5`, maxval 255).

use std::path::Path;

use crate::dataio::{denormalize, normalize};
use crate::error::{check_dim, Error, Result};
use crate::linalg::Vector;
use crate::scalar::Scalar;

pub fn encode_pgm<T: Scalar>(v: &Vector<T>, h: usize, w: usize) -> Result<Vec<u8>> {
    check_dim("image size", h * w, v.dim())?;
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(denormalize(v.as_slice()));
    Ok(out)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse {
                offset: start,
                message: format!("expected {what}"),
            })
    }
}

/// Returns `(h, w, pixels in [-1, 1])`.
pub fn decode_pgm<T: Scalar>(bytes: &[u8]) -> Result<(usize, usize, Vector<T>)> {
    if bytes.get(..2) != Some(b"P5".as_slice()) {
        return Err(Error::Parse {
            offset: 0,
            message: "not a binary PGM (missing P5 magic)".into(),
        });
    }
    let mut hdr = Header { bytes, pos: 2 };
    let w = hdr.number("width")?;
    let h = hdr.number("height")?;
    let maxval = hdr.number("maxval")?;
    if maxval != 255 {
        return Err(Error::Parse {
            offset: hdr.pos,
            message: format!("unsupported maxval {maxval}, only 255 is accepted"),
        });
    }
    if !bytes.get(hdr.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Parse {
            offset: hdr.pos,
            message: "missing whitespace after maxval".into(),
        });
    }
    let start = hdr.pos + 1;
    let data = &bytes[start..];
    if data.len() != h * w {
        return Err(Error::Parse {
            offset: start,
            message: format!("expected {} pixel bytes for {w}x{h}, found {}", h * w, data.len()),
        });
    }
    Ok((h, w, normalize(data)))
}

pub fn encode_image<T: Scalar>(v: &Vector<T>, h: usize, w: usize, path: &Path) -> Result<()> {
    std::fs::write(path, encode_pgm(v, h, w)?)?;
    Ok(())
}

pub fn decode_image<T: Scalar>(path: &Path) -> Result<(usize, usize, Vector<T>)> {
    decode_pgm(&std::fs::read(path)?)
}
