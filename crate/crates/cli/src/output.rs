use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use nullspace_core::dataio::encode_image;
use nullspace_core::linalg::Vector;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::Command;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    #[serde(flatten)]
    command: &'a Command,
    /// Checksums of input files, by flag name.
    inputs: BTreeMap<&'static str, String>,
}

/// Output directory of one run. The manifest goes in before anything else.
pub struct OutDir {
    dir: Option<PathBuf>,
}

impl OutDir {
    pub fn create(dir: Option<&Path>, command: &Command, inputs: Vec<(&'static str, String)>) -> Result<Self> {
        let Some(dir) = dir else {
            return Ok(Self { dir: None });
        };
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            inputs: inputs.into_iter().collect(),
        };
        let out = Self {
            dir: Some(dir.to_path_buf()),
        };
        out.write_json("manifest.json", &manifest)?;
        Ok(out)
    }

    pub fn path(&self, name: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(name))
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<Option<PathBuf>> {
        let Some(path) = self.path(name) else {
            return Ok(None);
        };
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(Some(path))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())?;
        Ok(())
    }

    /// Writes `image` as `name`; returns the file name when an output directory is set.
    pub fn write_pgm(&self, name: &str, image: &Vector<f64>, shape: (usize, usize)) -> Result<Option<String>> {
        let Some(path) = self.path(name) else {
            return Ok(None);
        };
        encode_image(image, shape.0, shape.1, &path).with_context(|| format!("writing {}", path.display()))?;
        Ok(Some(name.to_string()))
    }

    /// Stores the report as `report.json` and prints it to stdout.
    pub fn finish<T: Serialize>(&self, report: &T) -> Result<()> {
        self.write_json("report.json", report)?;
        let mut stdout = io::stdout().lock();
        match writeln!(stdout, "{}", serde_json::to_string_pretty(report)?) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
