//! Pixel-set and box primitives shared by every stage.
//!
//! Masks are stored as strictly increasing row-major pixel indices, which
//! makes intersections and differences a linear merge.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Axis-aligned, pixel-aligned box. Covers columns `x..x + w` and rows
/// `y..y + h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BBox {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        BBox { x, y, w, h }
    }

    pub fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }

    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn intersection_area(&self, other: &BBox) -> u64 {
        let w = self.right().min(other.right()).saturating_sub(self.x.max(other.x));
        let h = self.bottom().min(other.bottom()).saturating_sub(self.y.max(other.y));
        u64::from(w) * u64::from(h)
    }

    /// Intersection over union in whole pixels.
    pub fn iou(&self, other: &BBox) -> Result<f64> {
        if self.area() == 0 || other.area() == 0 {
            return Err(Error::ZeroAreaBox);
        }
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        Ok(inter as f64 / union as f64)
    }

    /// Largest per-edge offset between two boxes, in pixels.
    pub fn max_edge_error(&self, other: &BBox) -> u32 {
        [
            self.x.abs_diff(other.x),
            self.y.abs_diff(other.y),
            self.right().abs_diff(other.right()),
            self.bottom().abs_diff(other.bottom()),
        ]
        .into_iter()
        .max()
        .unwrap_or(0)
    }

    /// Tight box around a set of row-major pixel indices.
    pub fn from_pixels(pixels: &[u32], width: u32) -> Option<BBox> {
        let mut it = pixels.iter();
        let &first = it.next()?;
        let (mut x0, mut y0) = (first % width, first / width);
        let (mut x1, mut y1) = (x0, y0);
        for &p in it {
            let (x, y) = (p % width, p / width);
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        Some(BBox::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
    }
}

/// `|a ∩ b|` for two sorted index sets.
pub fn intersection_count(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// `b ∖ a` for two sorted index sets.
pub fn difference(b: &[u32], a: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let mut j = 0;
    for &p in b {
        while j < a.len() && a[j] < p {
            j += 1;
        }
        if j >= a.len() || a[j] != p {
            out.push(p);
        }
    }
    out
}

/// Sorted union of two sorted index sets.
pub fn union(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Mean `(column, row)` of a pixel set.
pub fn centroid(pixels: &[u32], width: u32) -> Option<(f64, f64)> {
    if pixels.is_empty() {
        return None;
    }
    let (mut sx, mut sy) = (0u64, 0u64);
    for &p in pixels {
        sx += u64::from(p % width);
        sy += u64::from(p / width);
    }
    let n = pixels.len() as f64;
    Some((sx as f64 / n, sy as f64 / n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_box_iou_is_one_third() {
        let a = BBox::new(0, 0, 10, 10);
        let b = BBox::new(5, 0, 10, 10);
        assert!((a.iou(&b).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_area_box_is_rejected() {
        let a = BBox::new(0, 0, 0, 10);
        assert!(matches!(a.iou(&a), Err(Error::ZeroAreaBox)));
    }

    #[test]
    fn set_ops() {
        let a = [1, 3, 5, 7];
        let b = [3, 4, 5, 8];
        assert_eq!(intersection_count(&a, &b), 2);
        assert_eq!(difference(&b, &a), vec![4, 8]);
        assert_eq!(union(&a, &b), vec![1, 3, 4, 5, 7, 8]);
    }

    #[test]
    fn bbox_of_pixels() {
        // 5-wide grid: (1,1), (3,2)
        let b = BBox::from_pixels(&[6, 13], 5).unwrap();
        assert_eq!(b, BBox::new(1, 1, 3, 2));
        assert_eq!(BBox::from_pixels(&[], 5), None);
    }
}
