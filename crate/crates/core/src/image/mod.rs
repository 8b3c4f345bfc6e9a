//! Grayscale raster images in named domains, plus the per-image operators
//! applied between rendering and rank pooling: CLAHE enhancement of depth
//! images and cross-domain fusion.

mod clahe;
mod fuse;

pub use clahe::clahe_enhance;
pub use fuse::{cross_domain_fuse, fuse_sequence};

use crate::error::{Error, Result};
use std::path::Path;

/// Default CLAHE tile grid (per side).
pub const DEFAULT_CLAHE_TILES: usize = 8;
/// Default CLAHE clip limit in multiples of the uniform bin height.
pub const DEFAULT_CLAHE_CLIP: f64 = 2.0;

/// The image domain a raster belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Texture,
    Depth,
    EnhancedDepth,
    CrossDomain,
}

impl Domain {
    /// Short tag used in filenames.
    pub fn tag(&self) -> &'static str {
        match self {
            Domain::Texture => "tex",
            Domain::Depth => "dpi",
            Domain::EnhancedDepth => "edpi",
            Domain::CrossDomain => "cd",
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// A square K x K grayscale raster with pixels in [0, 1], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainImage {
    pixels: Vec<f64>,
    size: usize,
    pub domain: Domain,
}

impl DomainImage {
    pub fn new(pixels: Vec<f64>, size: usize, domain: Domain) -> Result<Self> {
        if size == 0 {
            return Err(Error::Shape("image side length is zero".into()));
        }
        if pixels.len() != size * size {
            return Err(Error::Shape(format!(
                "{} pixels for a {size}x{size} image",
                pixels.len()
            )));
        }
        for (i, &p) in pixels.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("pixel {i} = {p} outside [0, 1]")));
            }
        }
        Ok(Self {
            pixels,
            size,
            domain,
        })
    }

    /// A constant image.
    pub fn filled(value: f64, size: usize, domain: Domain) -> Result<Self> {
        Self::new(vec![value; size * size], size, domain)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.size + col]
    }

    /// Rebuilds with the same shape, clamping is the caller's job.
    pub fn with_pixels(&self, pixels: Vec<f64>, domain: Domain) -> Result<Self> {
        Self::new(pixels, self.size, domain)
    }

    /// Writes the image as an 8-bit grayscale PNG, value = round(pixel * 255).
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let bytes: Vec<u8> = self
            .pixels
            .iter()
            .map(|&p| (p * 255.0).round() as u8)
            .collect();
        write_gray_png(&bytes, self.size, path)
    }
}

pub(crate) fn write_gray_png(bytes: &[u8], size: usize, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(crate::error::io_err(path))?;
    let writer = std::io::BufWriter::new(file);
    let encoder = image::codecs::png::PngEncoder::new(writer);
    image::ImageEncoder::write_image(
        encoder,
        bytes,
        size as u32,
        size as u32,
        image::ExtendedColorType::L8,
    )
    .map_err(|e| Error::Domain(format!("png encode failed for {path:?}: {e}")))?;
    Ok(())
}

/// An ordered sequence of same-sized, same-domain images.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSequence {
    frames: Vec<DomainImage>,
}

impl ImageSequence {
    pub fn new(frames: Vec<DomainImage>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::TooShort("image sequence has no frames".into()))?;
        let (k, domain) = (first.size(), first.domain);
        for (t, f) in frames.iter().enumerate() {
            if f.size() != k {
                return Err(Error::Shape(format!(
                    "frame {t} is {}x{} in a {k}x{k} sequence",
                    f.size(),
                    f.size()
                )));
            }
            if f.domain != domain {
                return Err(Error::Shape(format!(
                    "frame {t} domain {:?} differs from {domain:?}",
                    f.domain
                )));
            }
        }
        Ok(Self { frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn size(&self) -> usize {
        self.frames[0].size()
    }

    pub fn domain(&self) -> Domain {
        self.frames[0].domain
    }

    pub fn frames(&self) -> &[DomainImage] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<DomainImage> {
        self.frames
    }
}

/// Area-weighted downsampling to a `target x target` raster. Each output
/// pixel averages the source box it covers, with fractional edge coverage,
/// so constants stay constant.
pub fn area_downsample(pixels: &[f64], size: usize, target: usize) -> Vec<f64> {
    if target == size {
        return pixels.to_vec();
    }
    let scale = size as f64 / target as f64;
    let mut out = vec![0.0; target * target];
    for oy in 0..target {
        let y0 = oy as f64 * scale;
        let y1 = (oy + 1) as f64 * scale;
        for ox in 0..target {
            let x0 = ox as f64 * scale;
            let x1 = (ox + 1) as f64 * scale;
            let mut acc = 0.0;
            let mut area = 0.0;
            let ys = y0.floor() as usize;
            let ye = (y1.ceil() as usize).min(size);
            let xs = x0.floor() as usize;
            let xe = (x1.ceil() as usize).min(size);
            for sy in ys..ye {
                let hy = (y1.min((sy + 1) as f64) - y0.max(sy as f64)).max(0.0);
                for sx in xs..xe {
                    let wx = (x1.min((sx + 1) as f64) - x0.max(sx as f64)).max(0.0);
                    acc += pixels[sy * size + sx] * hy * wx;
                    area += hy * wx;
                }
            }
            out[oy * target + ox] = if area > 0.0 { acc / area } else { 0.0 };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_out_of_range_pixels() {
        assert!(DomainImage::new(vec![1.5], 1, Domain::Depth).is_err());
        assert!(DomainImage::new(vec![f64::NAN], 1, Domain::Depth).is_err());
    }

    #[test]
    fn sequence_enforces_homogeneity() {
        let a = DomainImage::filled(0.5, 2, Domain::Depth).unwrap();
        let b = DomainImage::filled(0.5, 3, Domain::Depth).unwrap();
        let c = DomainImage::filled(0.5, 2, Domain::Texture).unwrap();
        assert!(ImageSequence::new(vec![a.clone(), b]).is_err());
        assert!(ImageSequence::new(vec![a.clone(), c]).is_err());
        assert!(ImageSequence::new(vec![]).is_err());
        assert_eq!(ImageSequence::new(vec![a.clone(), a]).unwrap().len(), 2);
    }

    #[test]
    fn downsample_constant_stays_constant() {
        let src = vec![0.37; 10 * 10];
        for &target in &[1usize, 3, 7, 10] {
            let out = area_downsample(&src, 10, target);
            assert_eq!(out.len(), target * target);
            for v in out {
                assert_relative_eq!(v, 0.37, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn downsample_averages_blocks() {
        // 4x4 -> 2x2 with exact 2x2 block means.
        let src: Vec<f64> = (0..16).map(|i| i as f64 / 15.0).collect();
        let out = area_downsample(&src, 4, 2);
        let expect = |ids: [usize; 4]| ids.iter().map(|&i| src[i]).sum::<f64>() / 4.0;
        assert_relative_eq!(out[0], expect([0, 1, 4, 5]), epsilon = 1e-12);
        assert_relative_eq!(out[3], expect([10, 11, 14, 15]), epsilon = 1e-12);
    }
}
