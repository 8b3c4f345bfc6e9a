//! Contrast-limited adaptive histogram equalization for depth images.
//!
//! Each tile builds a 256-bin histogram over its own value range, clips bins
//! at `clip_limit` multiples of the uniform bin height (excess redistributed
//! uniformly), and maps values through the clipped CDF onto the full [0, 1]
//! range. A tile with no value range maps identically, so constant images
//! are exact fixed points. Pixels blend the mappings of the four nearest
//! tiles bilinearly, the classic interpolation scheme.

use super::{Domain, DomainImage};
use crate::error::{Error, Result};

const BINS: usize = 256;

struct TileMap {
    lo: f64,
    hi: f64,
    /// Cumulative fraction per bin; empty for a degenerate (flat) tile.
    cdf: Vec<f64>,
}

impl TileMap {
    fn apply(&self, v: f64) -> f64 {
        if self.cdf.is_empty() {
            return v;
        }
        let scaled = (v - self.lo) / (self.hi - self.lo) * BINS as f64;
        let bin = (scaled.floor() as isize).clamp(0, BINS as isize - 1) as usize;
        self.cdf[bin]
    }
}

fn build_tile_map(values: impl Iterator<Item = f64> + Clone, area: usize, clip_limit: f64) -> TileMap {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.clone() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !(hi > lo) {
        return TileMap {
            lo,
            hi,
            cdf: Vec::new(),
        };
    }

    let mut hist = vec![0.0f64; BINS];
    for v in values {
        let bin = (((v - lo) / (hi - lo) * BINS as f64).floor() as isize)
            .clamp(0, BINS as isize - 1) as usize;
        hist[bin] += 1.0;
    }

    // Clip at clip_limit multiples of the uniform height, floor of one count.
    if clip_limit.is_finite() {
        let cap = (clip_limit * area as f64 / BINS as f64).max(1.0);
        let mut excess = 0.0;
        for h in hist.iter_mut() {
            if *h > cap {
                excess += *h - cap;
                *h = cap;
            }
        }
        let share = excess / BINS as f64;
        for h in hist.iter_mut() {
            *h += share;
        }
    }

    let total: f64 = hist.iter().sum();
    let mut cdf = Vec::with_capacity(BINS);
    let mut acc = 0.0;
    for h in hist {
        acc += h;
        cdf.push(acc / total);
    }
    TileMap { lo, hi, cdf }
}

/// Applies CLAHE to a depth image, producing an enhanced-depth image.
///
/// `tiles` is the grid count per side; `clip_limit` is in multiples of the
/// uniform bin height (infinity disables clipping). Sizes not divisible by
/// the grid are padded by edge replication internally and cropped back.
pub fn clahe_enhance(img: &DomainImage, tiles: usize, clip_limit: f64) -> Result<DomainImage> {
    if img.domain != Domain::Depth {
        return Err(Error::Domain(format!(
            "CLAHE expects a depth image, got {:?}",
            img.domain
        )));
    }
    if tiles == 0 {
        return Err(Error::Config("CLAHE tile count must be >= 1".into()));
    }
    if !(clip_limit > 0.0) {
        return Err(Error::Config(format!(
            "CLAHE clip limit {clip_limit} must be positive"
        )));
    }
    let k = img.size();
    let tiles = tiles.min(k);

    // Pad right/bottom by edge replication so the grid divides evenly.
    let padded = k.div_ceil(tiles) * tiles;
    let ts = padded / tiles;
    let sample = |row: usize, col: usize| img.get(row.min(k - 1), col.min(k - 1));

    let area = ts * ts;
    let mut maps = Vec::with_capacity(tiles * tiles);
    for ty in 0..tiles {
        for tx in 0..tiles {
            let values = TileValues {
                sample: &sample,
                row0: ty * ts,
                col0: tx * ts,
                ts,
                at: 0,
            };
            maps.push(build_tile_map(values, area, clip_limit));
        }
    }

    let mut out = vec![0.0; k * k];
    for row in 0..k {
        let tyf = (row as f64 + 0.5) / ts as f64 - 0.5;
        let ty0 = (tyf.floor() as isize).clamp(0, tiles as isize - 1) as usize;
        let ty1 = (ty0 + 1).min(tiles - 1);
        let fy = (tyf - tyf.floor()).clamp(0.0, 1.0);
        let fy = if tyf < 0.0 { 0.0 } else { fy };
        for col in 0..k {
            let txf = (col as f64 + 0.5) / ts as f64 - 0.5;
            let tx0 = (txf.floor() as isize).clamp(0, tiles as isize - 1) as usize;
            let tx1 = (tx0 + 1).min(tiles - 1);
            let fx = (txf - txf.floor()).clamp(0.0, 1.0);
            let fx = if txf < 0.0 { 0.0 } else { fx };

            let v = img.get(row, col);
            let m00 = maps[ty0 * tiles + tx0].apply(v);
            let m01 = maps[ty0 * tiles + tx1].apply(v);
            let m10 = maps[ty1 * tiles + tx0].apply(v);
            let m11 = maps[ty1 * tiles + tx1].apply(v);
            let top = m00 * (1.0 - fx) + m01 * fx;
            let bottom = m10 * (1.0 - fx) + m11 * fx;
            out[row * k + col] = (top * (1.0 - fy) + bottom * fy).clamp(0.0, 1.0);
        }
    }
    DomainImage::new(out, k, Domain::EnhancedDepth)
}

/// Row-major iterator over one tile's pixel values.
#[derive(Clone)]
struct TileValues<'a, F: Fn(usize, usize) -> f64> {
    sample: &'a F,
    row0: usize,
    col0: usize,
    ts: usize,
    at: usize,
}

impl<F: Fn(usize, usize) -> f64> Iterator for TileValues<'_, F> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.at >= self.ts * self.ts {
            return None;
        }
        let r = self.row0 + self.at / self.ts;
        let c = self.col0 + self.at % self.ts;
        self.at += 1;
        Some((self.sample)(r, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn constant_image_is_fixed_point() {
        for &v in &[0.0, 0.25, 0.5, 1.0] {
            let img = DomainImage::filled(v, 16, Domain::Depth).unwrap();
            let out = clahe_enhance(&img, 4, 2.0).unwrap();
            for &p in out.pixels() {
                assert_relative_eq!(p, v, epsilon = 1e-12);
            }
            assert_eq!(out.domain, Domain::EnhancedDepth);
        }
    }

    #[test]
    fn two_level_single_tile_cdf_mapping() {
        // 8x8, levels 0.25 on 48 pixels and 0.75 on 16 pixels, no clipping:
        // CDF mapping sends them to 48/64 = 0.75 and 64/64 = 1.0.
        let mut pixels = vec![0.25; 64];
        for p in pixels.iter_mut().take(16) {
            *p = 0.75;
        }
        let img = DomainImage::new(pixels, 8, Domain::Depth).unwrap();
        let out = clahe_enhance(&img, 1, f64::INFINITY).unwrap();
        for (i, &p) in out.pixels().iter().enumerate() {
            let expected = if i < 16 { 1.0 } else { 0.75 };
            assert_relative_eq!(p, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn output_in_unit_range_on_random_inputs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for k in [9usize, 16, 31] {
            let pixels: Vec<f64> = (0..k * k).map(|_| rng.gen_range(0.0..=1.0)).collect();
            let img = DomainImage::new(pixels, k, Domain::Depth).unwrap();
            let out = clahe_enhance(&img, 8, 2.0).unwrap();
            assert_eq!(out.size(), k);
            assert!(out.pixels().iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }

    #[test]
    fn non_depth_input_rejected() {
        let img = DomainImage::filled(0.5, 8, Domain::Texture).unwrap();
        assert!(clahe_enhance(&img, 8, 2.0).is_err());
    }
}
