use std::io::Cursor;
use std::path::Path;

use image::{Rgb, RgbImage};

use super::DepthMap;
use crate::error::Result;
use crate::tracker::RoiTrack;

/// Outline colour of a track; a fixed function of its id.
pub fn track_color(track_id: u32) -> [u8; 3] {
    // golden-ratio hue walk keeps consecutive ids far apart
    let hue = (f64::from(track_id) * 0.618_033_988_749_895).fract() * 6.0;
    let sector = hue.floor() as u32;
    let f = hue - f64::from(sector);
    let up = (255.0 * f).round() as u8;
    let down = 255 - up;
    match sector {
        0 => [255, up, 0],
        1 => [down, 255, 0],
        2 => [0, 255, up],
        3 => [0, down, 255],
        4 => [up, 0, 255],
        _ => [255, 0, down],
    }
}

fn gray(v: u16) -> u8 {
    if v == 0 {
        0
    } else {
        255 - (v / 32).min(250) as u8
    }
}

/// Grayscale depth (near = bright, holes black) with each track's mask
/// outlined in its own colour.
pub fn render_overlay(frame: &DepthMap, tracks: &[RoiTrack]) -> RgbImage {
    let masks: Vec<(u32, &[u32])> = tracks
        .iter()
        .filter_map(|t| t.mask_at(frame.frame_index()).map(|m| (t.id(), m)))
        .collect();
    render_masks(frame, &masks)
}

/// Like [`render_overlay`] for bare `(id, sorted mask)` pairs.
pub fn render_masks(frame: &DepthMap, masks: &[(u32, &[u32])]) -> RgbImage {
    let (w, h) = (frame.width(), frame.height());
    let mut img = RgbImage::from_fn(w, h, |x, y| {
        let g = gray(frame.get(x, y));
        Rgb([g, g, g])
    });
    for &(id, mask) in masks {
        let color = Rgb(track_color(id));
        let inside = |x: i64, y: i64| {
            x >= 0
                && y >= 0
                && x < i64::from(w)
                && y < i64::from(h)
                && mask.binary_search(&((y as u32) * w + x as u32)).is_ok()
        };
        for &p in mask {
            let (x, y) = (i64::from(p % w), i64::from(p / w));
            let edge = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|&(dx, dy)| !inside(x + dx, y + dy));
            if edge {
                img.put_pixel(x as u32, y as u32, color);
            }
        }
    }
    img
}

/// PNG bytes of an overlay image.
pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>> {
    let mut bytes = Cursor::new(Vec::new());
    img.write_to(&mut bytes, image::ImageFormat::Png)?;
    Ok(bytes.into_inner())
}

pub fn write_overlay(frame: &DepthMap, tracks: &[RoiTrack], path: impl AsRef<Path>) -> Result<()> {
    crate::fsutil::write_atomic(path.as_ref(), &encode_png(&render_overlay(frame, tracks))?)
}
