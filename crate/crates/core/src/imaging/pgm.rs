//! Minimal PGM (P2 ASCII / P5 binary) codec.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::ImagingError;

/// Decoded grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage, ImagingError> {
    GrayImage::decode(&fs::read(path)?)
}

/// Writes binary PGM (P5); 16-bit samples when `maxval > 255`.
pub fn write_pgm(image: &GrayImage, path: impl AsRef<Path>) -> Result<(), ImagingError> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(&image.encode())?;
    out.flush()?;
    Ok(())
}

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, ImagingError> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImagingError::BadFormat(format!("bad or missing {what}")))
    }
}

impl GrayImage {
    pub fn decode(data: &[u8]) -> Result<Self, ImagingError> {
        let binary = match data.get(..2) {
            Some(b"P5") => true,
            Some(b"P2") => false,
            _ => return Err(ImagingError::BadFormat("not a P2/P5 PGM file".into())),
        };
        let mut h = Header { data, pos: 2 };
        let width = h.number("width")?;
        let height = h.number("height")?;
        let maxval = h.number("maxval")?;
        if maxval == 0 || maxval > u16::MAX as usize {
            return Err(ImagingError::BadFormat(format!(
                "maxval {maxval} out of range"
            )));
        }
        let n = width
            .checked_mul(height)
            .ok_or_else(|| ImagingError::BadFormat("image too large".into()))?;

        let samples: Vec<u16> = if binary {
            // exactly one whitespace byte separates the header from the raster
            let start = h.pos + 1;
            let bytes = if maxval > 255 { 2 } else { 1 };
            let raster = data
                .get(start..start + n * bytes)
                .ok_or_else(|| ImagingError::BadFormat("truncated raster".into()))?;
            if bytes == 1 {
                raster.iter().map(|&b| b as u16).collect()
            } else {
                raster
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]))
                    .collect()
            }
        } else {
            (0..n)
                .map(|_| h.number("sample").map(|v| v as u16))
                .collect::<Result<_, _>>()?
        };
        if samples.iter().any(|&s| s as usize > maxval) {
            return Err(ImagingError::BadFormat("sample exceeds maxval".into()));
        }
        Ok(Self {
            width,
            height,
            maxval: maxval as u16,
            samples,
        })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        if self.maxval > 255 {
            for s in &self.samples {
                out.extend_from_slice(&s.to_be_bytes());
            }
        } else {
            out.extend(self.samples.iter().map(|&s| s as u8));
        }
        out
    }

    pub fn encode_ascii(&self) -> String {
        let mut out = format!("P2\n{} {}\n{}\n", self.width, self.height, self.maxval);
        for row in self.samples.chunks(self.width.max(1)) {
            let line: Vec<String> = row.iter().map(|s| s.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}
