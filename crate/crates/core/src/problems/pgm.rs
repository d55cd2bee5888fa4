//! Portable graymap I/O: 16-bit binary output; ASCII (`P2`) and binary
//! (`P5`) input at 8 or 16 bits.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::io::{Read, Write};

/// Largest accepted pixel count when decoding.
pub const MAX_PIXELS: usize = 1 << 24;

/// Write `img` as a 16-bit `P5` graymap, mapping `[min, max]` linearly onto
/// `[0, 65535]`. Returns the `(min, max)` used.
pub fn write_pgm16<W: Write>(mut out: W, img: &DMatrix<f64>) -> Result<(f64, f64)> {
    let (lo, hi) = img
        .iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let span = hi - lo;
    write!(out, "P5\n{} {}\n65535\n", img.ncols(), img.nrows())?;
    let mut buf = Vec::with_capacity(2 * img.len());
    for i in 0..img.nrows() {
        for j in 0..img.ncols() {
            let v = img[(i, j)];
            let q = if span > 0.0 && v.is_finite() {
                ((v - lo) / span * 65535.0).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            buf.extend_from_slice(&q.to_be_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok((lo, hi))
}

pub fn read_pgm<R: Read>(mut r: R) -> Result<DMatrix<f64>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode_pgm(&bytes)
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(format!("pgm: {}", msg.into()))
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&c) = self.data.get(self.pos) {
            if c == b'#' {
                while self.data.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        let digits = std::str::from_utf8(&self.data[start..self.pos]).expect("ascii digits");
        if digits.is_empty() {
            return Err(parse_err(format!("expected {what}")));
        }
        digits.parse().map_err(|_| parse_err(format!("{what} out of range")))
    }
}

/// Decode a `P2`/`P5` graymap into an image scaled to `[0, 1]`.
pub fn decode_pgm(data: &[u8]) -> Result<DMatrix<f64>> {
    let binary = match data.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return Err(parse_err("missing P2/P5 magic number")),
    };
    let mut cur = Cursor { data, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(parse_err("empty image"));
    }
    let pixels = width
        .checked_mul(height)
        .filter(|&p| p <= MAX_PIXELS)
        .ok_or_else(|| parse_err(format!("{width}x{height} image is too large")))?;
    if maxval == 0 || maxval > 65535 {
        return Err(parse_err(format!("maxval {maxval} outside 1..=65535")));
    }
    let mut samples = Vec::with_capacity(pixels);
    if binary {
        if !data.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(parse_err("missing whitespace before raster"));
        }
        let raster = &data[cur.pos + 1..];
        let bps = if maxval > 255 { 2 } else { 1 };
        if raster.len() < pixels * bps {
            return Err(parse_err(format!("raster has {} bytes, need {}", raster.len(), pixels * bps)));
        }
        for k in 0..pixels {
            let v = if bps == 2 {
                u16::from_be_bytes([raster[2 * k], raster[2 * k + 1]]) as usize
            } else {
                raster[k] as usize
            };
            samples.push(v);
        }
    } else {
        for _ in 0..pixels {
            samples.push(cur.number("sample")?);
        }
    }
    if let Some(bad) = samples.iter().find(|&&v| v > maxval) {
        return Err(parse_err(format!("sample {bad} exceeds maxval {maxval}")));
    }
    let m = maxval as f64;
    Ok(DMatrix::from_fn(height, width, |i, j| samples[i * width + j] as f64 / m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_bit_round_trip() {
        let img = DMatrix::from_row_slice(2, 3, &[0.0, 0.5, 1.0, 0.25, 0.75, 1.0]);
        let mut buf = Vec::new();
        assert_eq!(write_pgm16(&mut buf, &img).unwrap(), (0.0, 1.0));
        assert!(buf.starts_with(b"P5\n3 2\n65535\n"));
        let back = decode_pgm(&buf).unwrap();
        assert!((back - img).amax() <= 1.0 / 65535.0);
    }

    #[test]
    fn ascii_with_comments() {
        let img = decode_pgm(b"P2\n# comment\n2 2\n# another\n4\n0 1\n2 4\n").unwrap();
        assert_eq!(img, DMatrix::from_row_slice(2, 2, &[0.0, 0.25, 0.5, 1.0]));
    }

    #[test]
    fn eight_bit_binary() {
        let mut data = b"P5 2 1 255\n".to_vec();
        data.extend_from_slice(&[0, 255]);
        assert_eq!(decode_pgm(&data).unwrap(), DMatrix::from_row_slice(1, 2, &[0.0, 1.0]));
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            &b"P6 1 1 255\n\x00"[..],
            b"P5 2 2 255\n\x00",
            b"P2 1 1 0\n0",
            b"P2 1 1 3\n7",
            b"P2 0 1 3\n",
            b"P2 99999999 99999999 3\n",
            b"P2 1",
        ] {
            assert!(decode_pgm(bad).is_err(), "{:?}", String::from_utf8_lossy(bad));
        }
    }
}
