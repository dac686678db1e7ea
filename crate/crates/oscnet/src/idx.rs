//! IDX containers as used by MNIST (unsigned-byte payloads only).

use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

pub const LABELS_MAGIC: u32 = 2049;
pub const IMAGES_MAGIC: u32 = 2051;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxFile {
    pub magic: u32,
    pub dims: Vec<u32>,
    pub payload: Vec<u8>,
}

impl IdxFile {
    pub fn labels(labels: Vec<u8>) -> Self {
        IdxFile { magic: LABELS_MAGIC, dims: vec![labels.len() as u32], payload: labels }
    }

    pub fn images(count: u32, rows: u32, cols: u32, pixels: Vec<u8>) -> Result<Self> {
        let f = IdxFile { magic: IMAGES_MAGIC, dims: vec![count, rows, cols], payload: pixels };
        f.check_len()?;
        Ok(f)
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let word = |i: usize| -> Result<u32> {
            bytes
                .get(4 * i..4 * i + 4)
                .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
                .ok_or(Error::LengthMismatch { expected: 4 * (i + 1), found: bytes.len() })
        };
        let magic = word(0)?;
        let ndims = match magic {
            LABELS_MAGIC => 1,
            IMAGES_MAGIC => 3,
            found => return Err(Error::BadMagic { found }),
        };
        let dims = (1..=ndims).map(word).collect::<Result<Vec<_>>>()?;
        let header = 4 * (ndims + 1);
        let f = IdxFile { magic, dims, payload: bytes[header..].to_vec() };
        f.check_len()?;
        Ok(f)
    }

    fn check_len(&self) -> Result<()> {
        let expected = self.dims.iter().map(|&d| d as usize).product::<usize>();
        if expected != self.payload.len() {
            return Err(Error::LengthMismatch { expected, found: self.payload.len() });
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.dims[0] as usize
    }

    /// Bytes per item (pixels per image, 1 for labels).
    pub fn item_len(&self) -> usize {
        self.dims[1..].iter().map(|&d| d as usize).product()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 * (self.dims.len() + 1) + self.payload.len());
        out.extend_from_slice(&self.magic.to_be_bytes());
        for d in &self.dims {
            out.extend_from_slice(&d.to_be_bytes());
        }
        out.extend_from_slice(&self.payload);
        out
    }
}

/// Reads a file, inflating it when it starts with the gzip magic.
pub fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..]).read_to_end(&mut out).map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

pub fn read_idx(path: &Path) -> Result<IdxFile> {
    IdxFile::parse(&read_maybe_gz(path)?)
}
