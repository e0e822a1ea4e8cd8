use crate::depth_io::DepthMap;
use crate::error::{Error, Result};

/// Unnormalised 1-D Gaussian taps for offsets `-r..=r`, `r = ceil(3σ)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as i64;
    (-r..=r)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect()
}

/// Separable Gaussian blur as a normalised convolution: holes (0) carry no
/// weight and stay holes, and taps falling off the frame are dropped.
pub fn gaussian_smooth(frame: &DepthMap, sigma: f64) -> Result<DepthMap> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as i64;
    let (w, h) = (frame.width() as i64, frame.height() as i64);
    let src = frame.values();

    let n = src.len();
    let mut num = vec![0.0f64; n];
    let mut den = vec![0.0f64; n];
    // rows
    for y in 0..h {
        for x in 0..w {
            let (mut s, mut d) = (0.0, 0.0);
            for (k, &kw) in kernel.iter().enumerate() {
                let xx = x + k as i64 - r;
                if xx < 0 || xx >= w {
                    continue;
                }
                let v = src[(y * w + xx) as usize];
                if v != 0 {
                    s += kw * f64::from(v);
                    d += kw;
                }
            }
            num[(y * w + x) as usize] = s;
            den[(y * w + x) as usize] = d;
        }
    }
    // columns
    let mut out = vec![0u16; n];
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            if src[i] == 0 {
                continue;
            }
            let (mut s, mut d) = (0.0, 0.0);
            for (k, &kw) in kernel.iter().enumerate() {
                let yy = y + k as i64 - r;
                if yy < 0 || yy >= h {
                    continue;
                }
                let j = (yy * w + x) as usize;
                s += kw * num[j];
                d += kw * den[j];
            }
            out[i] = (s / d).round().clamp(1.0, 65535.0) as u16;
        }
    }
    Ok(DepthMap::new(frame.width(), frame.height(), out)?.with_frame_index(frame.frame_index()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct 2-D normalised convolution with an explicitly tabulated kernel.
    fn brute_force(frame: &DepthMap, sigma: f64) -> Vec<f64> {
        let r = (3.0 * sigma).ceil() as i64;
        let (w, h) = (frame.width() as i64, frame.height() as i64);
        let mut table = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                table.push((dx, dy, (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp()));
            }
        }
        let mut out = vec![0.0; (w * h) as usize];
        for y in 0..h {
            for x in 0..w {
                if frame.get(x as u32, y as u32) == 0 {
                    continue;
                }
                let (mut s, mut d) = (0.0, 0.0);
                for &(dx, dy, k) in &table {
                    let (xx, yy) = (x + dx, y + dy);
                    if xx < 0 || yy < 0 || xx >= w || yy >= h {
                        continue;
                    }
                    let v = frame.get(xx as u32, yy as u32);
                    if v != 0 {
                        s += k * f64::from(v);
                        d += k;
                    }
                }
                out[(y * w + x) as usize] = s / d;
            }
        }
        out
    }

    #[test]
    fn constant_is_preserved() {
        let f = DepthMap::filled(9, 7, 1000).unwrap();
        let s = gaussian_smooth(&f, 1.0).unwrap();
        assert!(s.values().iter().all(|&v| v == 1000));
    }

    #[test]
    fn spike_spreads() {
        let mut f = DepthMap::filled(9, 9, 1000).unwrap();
        f.set(4, 4, 2000);
        let s = gaussian_smooth(&f, 1.0).unwrap();
        assert!(s.get(4, 4) < 2000);
        for (x, y) in [(3, 4), (5, 4), (4, 3), (4, 5), (3, 3), (5, 5)] {
            assert!(s.get(x, y) > 1000, "neighbour ({x},{y}) = {}", s.get(x, y));
        }
    }

    #[test]
    fn five_by_five_matches_direct_convolution() {
        let vals: Vec<u16> = vec![
            1000, 1200, 900, 4000, 1000, //
            1100, 0, 950, 1000, 3000, //
            980, 1020, 8000, 990, 1005, //
            1000, 1000, 1000, 0, 1000, //
            500, 600, 700, 800, 900,
        ];
        let f = DepthMap::new(5, 5, vals).unwrap();
        let s = gaussian_smooth(&f, 1.0).unwrap();
        let oracle = brute_force(&f, 1.0);
        for (i, (&got, &want)) in s.values().iter().zip(&oracle).enumerate() {
            assert!((f64::from(got) - want).abs() <= 1.0, "pixel {i}: {got} vs {want}");
        }
        assert_eq!(s.get(1, 1), 0);
        assert_eq!(s.get(3, 3), 0);
    }

    #[test]
    fn frozen_center_value() {
        // 3x3 spike field, σ = 1: every tap is in range, so the centre is
        // 1000 + 1000·e^0 / Σ_{dx,dy∈[-1,1]} e^{-(dx²+dy²)/2}
        // = 1000 + 1000 / (1 + 4e^{-1/2} + 4e^{-1}) = 1000 + 1000/4.89764 = 1204.18
        let mut f = DepthMap::filled(3, 3, 1000).unwrap();
        f.set(1, 1, 2000);
        let s = gaussian_smooth(&f, 1.0).unwrap();
        assert_eq!(s.get(1, 1), 1204);
    }

    #[test]
    fn rejects_bad_sigma() {
        let f = DepthMap::filled(3, 3, 1).unwrap();
        assert!(gaussian_smooth(&f, 0.0).is_err());
        assert!(gaussian_smooth(&f, -1.0).is_err());
        assert!(gaussian_smooth(&f, f64::NAN).is_err());
    }

    #[test]
    fn output_stays_within_input_range() {
        let vals: Vec<u16> = (0..64).map(|i| if i % 7 == 0 { 0 } else { 1000 + (i * 37 % 500) as u16 }).collect();
        let f = DepthMap::new(8, 8, vals.clone()).unwrap();
        let s = gaussian_smooth(&f, 1.5).unwrap();
        let lo = *vals.iter().filter(|&&v| v != 0).min().unwrap();
        let hi = *vals.iter().max().unwrap();
        for (&a, &b) in vals.iter().zip(s.values()) {
            if a == 0 {
                assert_eq!(b, 0);
            } else {
                assert!(lo <= b && b <= hi);
            }
        }
    }
}
