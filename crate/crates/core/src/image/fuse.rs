//! Cross-domain fusion: pixel-wise weighted mean of same-sized images from
//! different domains. The mean (rather than a raw sum) keeps values in
//! [0, 1] for any convex weighting.

use super::{Domain, DomainImage, ImageSequence};
use crate::error::{Error, Result};

/// Fuses two or more images into a cross-domain image. `weights` defaults to
/// equal; when given it must match the image count, be nonnegative, and have
/// a positive sum (weights are normalized internally).
pub fn cross_domain_fuse(images: &[&DomainImage], weights: Option<&[f64]>) -> Result<DomainImage> {
    if images.len() < 2 {
        return Err(Error::Config(format!(
            "cross-domain fusion needs at least 2 images, got {}",
            images.len()
        )));
    }
    let k = images[0].size();
    for (i, img) in images.iter().enumerate() {
        if img.size() != k {
            return Err(Error::Shape(format!(
                "image {i} is {}x{}, expected {k}x{k}",
                img.size(),
                img.size()
            )));
        }
    }
    let w = match weights {
        Some(w) => {
            if w.len() != images.len() {
                return Err(Error::Shape(format!(
                    "{} weights for {} images",
                    w.len(),
                    images.len()
                )));
            }
            if w.iter().any(|&x| !(x >= 0.0)) {
                return Err(Error::Config("fusion weights must be nonnegative".into()));
            }
            let sum: f64 = w.iter().sum();
            if !(sum > 0.0) {
                return Err(Error::Config("fusion weights sum to zero".into()));
            }
            w.iter().map(|&x| x / sum).collect::<Vec<_>>()
        }
        None => vec![1.0 / images.len() as f64; images.len()],
    };

    let mut out = vec![0.0f64; k * k];
    for (img, &wi) in images.iter().zip(&w) {
        for (o, &p) in out.iter_mut().zip(img.pixels()) {
            *o += wi * p;
        }
    }
    // Convex combination of values in [0, 1]; clamp only sweeps rounding dust.
    for o in out.iter_mut() {
        *o = o.clamp(0.0, 1.0);
    }
    DomainImage::new(out, k, Domain::CrossDomain)
}

/// Frame-wise fusion of the three domain sequences into a cross-domain
/// sequence. `weights` maps to (texture, depth, enhanced-depth) order.
pub fn fuse_sequence(
    texture: &ImageSequence,
    depth: &ImageSequence,
    edepth: &ImageSequence,
    weights: Option<[f64; 3]>,
) -> Result<ImageSequence> {
    let t = texture.len();
    if depth.len() != t || edepth.len() != t {
        return Err(Error::Shape(format!(
            "sequence lengths differ: texture {t}, depth {}, enhanced-depth {}",
            depth.len(),
            edepth.len()
        )));
    }
    let frames = (0..t)
        .map(|i| {
            cross_domain_fuse(
                &[&texture.frames()[i], &depth.frames()[i], &edepth.frames()[i]],
                weights.as_ref().map(|w| w.as_slice()),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    ImageSequence::new(frames)
}
