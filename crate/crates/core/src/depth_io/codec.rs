//! 16-bit depth raster codec. Binary portable graymap (`P5`, maxval above
//! 255, big-endian samples) is the native format; 16-bit grayscale PNG is
//! accepted as well.

use std::fs;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};

use super::DepthMap;
use crate::error::{Error, Result};

pub fn load_depth_frame(path: impl AsRef<Path>) -> Result<DepthMap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if is_png(path, &bytes) {
        decode_png(&bytes)
    } else {
        decode_pgm(&bytes)
    }
}

/// Writes PGM unless the path ends in `.png`.
pub fn save_depth_frame(map: &DepthMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = if has_extension(path, "png") {
        let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
            ImageBuffer::from_raw(map.width(), map.height(), map.values().to_vec())
                .expect("depth map length matches its dimensions");
        let mut out = std::io::Cursor::new(Vec::new());
        DynamicImage::ImageLuma16(buf).write_to(&mut out, image::ImageFormat::Png)?;
        out.into_inner()
    } else {
        encode_pgm(map)
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_pgm(map: &DepthMap) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", map.width(), map.height()).into_bytes();
    out.reserve(map.len() * 2);
    for &v in map.values() {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn is_png(path: &Path, bytes: &[u8]) -> bool {
    has_extension(path, "png") || bytes.starts_with(b"\x89PNG")
}

fn decode_png(bytes: &[u8]) -> Result<DepthMap> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?;
    match img {
        DynamicImage::ImageLuma16(buf) => {
            let (w, h) = buf.dimensions();
            DepthMap::new(w, h, buf.into_raw())
        }
        other => Err(Error::UnsupportedBitDepth(u32::from(
            other.color().bits_per_pixel() / u16::from(other.color().channel_count()),
        ))),
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<&str> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format("PGM header", "truncated header"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| Error::format("PGM header", "non-ASCII header"))
    }

    fn number(&mut self, field: &str) -> Result<u32> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| Error::format("PGM header", format!("bad {field}: {tok:?}")))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<DepthMap> {
    let mut cur = HeaderCursor { bytes, pos: 0 };
    let magic = cur.token()?;
    if magic != "P5" {
        return Err(Error::format("PGM header", format!("expected P5 magic, found {magic:?}")));
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format("PGM header", format!("maxval {maxval} out of range")));
    }
    if maxval < 256 {
        return Err(Error::UnsupportedBitDepth(8));
    }
    // exactly one whitespace byte separates the header from the raster
    let data = bytes.get(cur.pos + 1..).unwrap_or(&[]);
    let expected = width as usize * height as usize;
    if data.len() != expected * 2 {
        return Err(Error::DimensionMismatch { expected, found: data.len() / 2 });
    }
    let values = data
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    DepthMap::new(width, height, values)
}
