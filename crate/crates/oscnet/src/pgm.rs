//! Netpbm greymaps (P2 and P5).

use std::path::Path;

use oscnet_core::Matrix;

use crate::error::{Error, Result};

/// Intensities scaled to `[0, 1]` by `maxval`.
#[derive(Debug, Clone, PartialEq)]
pub struct Greymap {
    pub pixels: Matrix,
    pub maxval: u16,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::format("pgm", msg)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
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

    fn number(&mut self) -> Result<u32> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(format!("expected a number at byte {start}")))
    }
}

pub fn parse(bytes: &[u8]) -> Result<Greymap> {
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return Err(bad("missing P2/P5 signature")),
    };
    let mut h = Header { bytes, pos: 2 };
    let width = h.number()? as usize;
    let height = h.number()? as usize;
    let maxval = h.number()?;
    if maxval == 0 || maxval > 65535 {
        return Err(bad(format!("maxval {maxval} out of range")));
    }
    let n = width * height;
    let mut raw = Vec::with_capacity(n);
    if binary {
        if !bytes.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(bad("missing separator before raster"));
        }
        let data = &bytes[h.pos + 1..];
        let wide = maxval > 255;
        let need = n * if wide { 2 } else { 1 };
        if data.len() < need {
            return Err(Error::LengthMismatch { expected: need, found: data.len() });
        }
        if wide {
            raw.extend(data[..need].chunks_exact(2).map(|c| u32::from(u16::from_be_bytes([c[0], c[1]]))));
        } else {
            raw.extend(data[..n].iter().map(|&b| u32::from(b)));
        }
    } else {
        for _ in 0..n {
            raw.push(h.number()?);
        }
    }
    if let Some(v) = raw.iter().find(|&&v| v > maxval) {
        return Err(bad(format!("sample {v} exceeds maxval {maxval}")));
    }
    let m = f64::from(maxval);
    let pixels = Matrix::from_vec(height, width, raw.into_iter().map(|v| f64::from(v) / m).collect())?;
    Ok(Greymap { pixels, maxval: maxval as u16 })
}

pub fn read(path: &Path) -> Result<Greymap> {
    parse(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

/// Samples are `round(clamp(v, 0, 1) · maxval)`.
pub fn encode(img: &Greymap, binary: bool) -> Vec<u8> {
    let (h, w) = (img.pixels.rows(), img.pixels.cols());
    let m = f64::from(img.maxval);
    let q = |v: f64| (v.clamp(0.0, 1.0) * m).round() as u16;
    let mut out = format!("{}\n{w} {h}\n{}\n", if binary { "P5" } else { "P2" }, img.maxval).into_bytes();
    if binary {
        for &v in img.pixels.as_slice() {
            if img.maxval > 255 {
                out.extend_from_slice(&q(v).to_be_bytes());
            } else {
                out.push(q(v) as u8);
            }
        }
    } else {
        for r in img.pixels.row_iter() {
            let line: Vec<String> = r.iter().map(|&v| q(v).to_string()).collect();
            out.extend_from_slice(line.join(" ").as_bytes());
            out.push(b'\n');
        }
    }
    out
}

pub fn write(path: &Path, img: &Greymap, binary: bool) -> Result<()> {
    std::fs::write(path, encode(img, binary)).map_err(|e| Error::io(path, e))
}
