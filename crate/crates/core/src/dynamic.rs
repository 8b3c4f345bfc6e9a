//! Rank pooling: collapsing an image sequence into a single dynamic image
//! whose pixels are a fixed linear combination of the frames.
//!
//! The closed-form coefficients come from the harmonic-number approximation
//! of the ranking regression on time-averaged frames:
//!
//! ```text
//! alpha_t = 2(T - t + 1) - (T + 1)(H_T - H_{t-1}),   H_0 = 0
//! ```
//!
//! They always sum to zero, so constant sequences pool to an exactly zero
//! image. `rank_pool_exact` solves the underlying centered ridge regression
//! directly and is kept as an independent check on the closed form's
//! ordering behavior.

use crate::error::{Error, Result};
use crate::image::{Domain, DomainImage, ImageSequence};
use std::path::Path;

/// Per-frame rank-pooling weights for a sequence of length T.
#[derive(Debug, Clone, PartialEq)]
pub struct RankPoolCoefficients {
    pub alphas: Vec<f64>,
}

impl RankPoolCoefficients {
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Compensated (Kahan) sum of the coefficients. Plain forward summation
    /// rounds at the scale of the running partial sums (~T^2), which would
    /// drown the zero-sum identity this measures.
    pub fn sum(&self) -> f64 {
        compensated_sum(&self.alphas)
    }
}

fn compensated_sum(values: &[f64]) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for &v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Closed-form rank-pooling coefficients for a length-T sequence.
pub fn rank_pool_coefficients(t_len: usize) -> Result<RankPoolCoefficients> {
    if t_len == 0 {
        return Err(Error::Domain("rank pooling needs at least one frame".into()));
    }
    // Harmonic numbers H_0..H_T.
    let mut harmonics = Vec::with_capacity(t_len + 1);
    harmonics.push(0.0f64);
    for i in 1..=t_len {
        harmonics.push(harmonics[i - 1] + 1.0 / i as f64);
    }
    let h_t = harmonics[t_len];
    let mut alphas: Vec<f64> = (1..=t_len)
        .map(|t| 2.0 * (t_len - t + 1) as f64 - (t_len + 1) as f64 * (h_t - harmonics[t - 1]))
        .collect();
    // The analytic sum is exactly zero; rounding in (T+1)(H_T - H_{t-1})
    // leaves a residual that grows with T. Recenter, then fold what ulp
    // quantization leaves over into the largest coefficient.
    let mean = compensated_sum(&alphas) / t_len as f64;
    for a in alphas.iter_mut() {
        *a -= mean;
    }
    let residual = compensated_sum(&alphas);
    if residual != 0.0 {
        let largest = (0..t_len)
            .max_by(|&i, &j| alphas[i].abs().total_cmp(&alphas[j].abs()))
            .unwrap();
        alphas[largest] -= residual;
    }
    Ok(RankPoolCoefficients { alphas })
}

/// A signed, unnormalized K x K raster encoding a whole sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicImage {
    pub pixels: Vec<f64>,
    pub size: usize,
    pub source_length: usize,
}

impl DynamicImage {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.size + col]
    }
}

/// Pools a sequence with the closed-form coefficients:
/// `pixel = sum_t alpha_t * frame_t`.
///
/// Evaluated in the algebraically equal difference form
/// `sum_t alpha_t * (frame_t - frame_1)` (valid because the alphas sum to
/// zero), which makes constant sequences pool to an exactly zero image.
pub fn compute_dynamic_image(seq: &ImageSequence) -> Result<DynamicImage> {
    let t_len = seq.len();
    let coeffs = rank_pool_coefficients(t_len)?;
    let k = seq.size();
    let first = seq.frames()[0].pixels();
    let mut pixels = vec![0.0f64; k * k];
    for (frame, &alpha) in seq.frames().iter().zip(&coeffs.alphas).skip(1) {
        for ((o, &p), &p0) in pixels.iter_mut().zip(frame.pixels()).zip(first) {
            *o += alpha * (p - p0);
        }
    }
    Ok(DynamicImage {
        pixels,
        size: k,
        source_length: t_len,
    })
}

/// Exact ranking regression: finds the image `u` minimizing
/// `sum_t (<u, s_t> - t)^2 + lambda ||u||^2` over time-averaged, centered
/// frames `s_t`. Solved in the dual via a symmetric eigendecomposition of
/// the T x T Gram matrix, so the cost is independent of K beyond forming
/// the Gram.
///
/// With `regularizer = 0` the fit must be determined by the data; if the
/// centered Gram is rank-deficient in a direction the targets need, this is
/// a rank-deficiency error.
pub fn rank_pool_exact(seq: &ImageSequence, regularizer: f64) -> Result<DynamicImage> {
    let t_len = seq.len();
    if t_len < 2 {
        return Err(Error::TooShort(format!(
            "exact rank pooling needs at least 2 frames, got {t_len}"
        )));
    }
    if !(regularizer >= 0.0) {
        return Err(Error::Domain(format!(
            "regularizer {regularizer} must be nonnegative"
        )));
    }
    let k = seq.size();
    let dim = k * k;

    // Time-averaged frames: s_t = mean(frame_1..frame_t).
    let mut smoothed: Vec<Vec<f64>> = Vec::with_capacity(t_len);
    let mut running = vec![0.0f64; dim];
    for (t, frame) in seq.frames().iter().enumerate() {
        for (r, &p) in running.iter_mut().zip(frame.pixels()) {
            *r += p;
        }
        let inv = 1.0 / (t + 1) as f64;
        smoothed.push(running.iter().map(|&r| r * inv).collect());
    }

    // Center frames and targets.
    let mut mean = vec![0.0f64; dim];
    for s in &smoothed {
        for (m, &v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= t_len as f64;
    }
    for s in smoothed.iter_mut() {
        for (v, &m) in s.iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    let target_mean = (t_len as f64 + 1.0) / 2.0;
    let targets: Vec<f64> = (1..=t_len).map(|t| t as f64 - target_mean).collect();

    // Dual system: (G + lambda I) beta = targets, with G the Gram matrix.
    let gram = nalgebra::DMatrix::from_fn(t_len, t_len, |i, j| {
        smoothed[i]
            .iter()
            .zip(&smoothed[j])
            .map(|(&a, &b)| a * b)
            .sum::<f64>()
    });
    let eigen = nalgebra::linalg::SymmetricEigen::new(gram);
    let max_eig = eigen
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &e| acc.max(e.abs()));
    let tol = (t_len as f64) * f64::EPSILON * max_eig.max(1.0);

    let proj = eigen.eigenvectors.transpose()
        * nalgebra::DVector::from_column_slice(&targets);
    let mut beta = nalgebra::DVector::zeros(t_len);
    for i in 0..t_len {
        let eig = eigen.eigenvalues[i];
        let coef = proj[i];
        if regularizer > 0.0 {
            beta += eigen.eigenvectors.column(i) * (coef / (eig + regularizer));
        } else if eig.abs() > tol {
            beta += eigen.eigenvectors.column(i) * (coef / eig);
        } else if coef.abs() > 1e-9 * (1.0 + max_eig) {
            // The targets demand a direction the data cannot determine.
            return Err(Error::RankDeficient);
        }
    }

    let mut pixels = vec![0.0f64; dim];
    for (s, &b) in smoothed.iter().zip(beta.iter()) {
        for (o, &v) in pixels.iter_mut().zip(s) {
            *o += b * v;
        }
    }
    Ok(DynamicImage {
        pixels,
        size: k,
        source_length: t_len,
    })
}

/// Affine map of [min, max] onto [0, 1] for display; constant inputs
/// (including all-zero) map to a flat 0.5.
pub fn normalize_for_display(di: &DynamicImage) -> Result<DomainImage> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &p in &di.pixels {
        if !p.is_finite() {
            return Err(Error::Domain("dynamic image has non-finite pixels".into()));
        }
        lo = lo.min(p);
        hi = hi.max(p);
    }
    let pixels = if hi > lo {
        di.pixels.iter().map(|&p| (p - lo) / (hi - lo)).collect()
    } else {
        vec![0.5; di.pixels.len()]
    };
    DomainImage::new(pixels, di.size, Domain::CrossDomain)
}

/// Writes the raw signed dynamic image: an 8-byte header (K then T as
/// little-endian u32) followed by row-major little-endian f32 pixels.
pub fn write_dynamic_image(di: &DynamicImage, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 + di.pixels.len() * 4);
    bytes.extend_from_slice(&(di.size as u32).to_le_bytes());
    bytes.extend_from_slice(&(di.source_length as u32).to_le_bytes());
    for &p in &di.pixels {
        bytes.extend_from_slice(&(p as f32).to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(crate::error::io_err(path))
}

/// Reads the binary format written by [`write_dynamic_image`].
pub fn read_dynamic_image(path: &Path) -> Result<DynamicImage> {
    let bytes = std::fs::read(path).map_err(crate::error::io_err(path))?;
    if bytes.len() < 8 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "missing 8-byte header".into(),
        });
    }
    let k = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let t = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let expect = 8 + k * k * 4;
    if bytes.len() != expect {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("expected {expect} bytes for K={k}, found {}", bytes.len()),
        });
    }
    let pixels = bytes[8..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok(DynamicImage {
        pixels,
        size: k,
        source_length: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn seq_from_values(values: &[f64]) -> ImageSequence {
        // Single-pixel frames in the cross domain.
        ImageSequence::new(
            values
                .iter()
                .map(|&v| DomainImage::new(vec![v], 1, Domain::CrossDomain).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn coefficients_match_closed_form() {
        assert_eq!(rank_pool_coefficients(1).unwrap().alphas, vec![0.0]);
        let t2 = rank_pool_coefficients(2).unwrap().alphas;
        assert_relative_eq!(t2[0], -0.5, epsilon = 1e-12);
        assert_relative_eq!(t2[1], 0.5, epsilon = 1e-12);
        let t3 = rank_pool_coefficients(3).unwrap().alphas;
        assert_relative_eq!(t3[0], -4.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(t3[1], 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(t3[2], 2.0 / 3.0, epsilon = 1e-12);
        assert!(rank_pool_coefficients(0).is_err());
    }

    #[test]
    fn coefficients_sum_to_zero_up_to_ten_thousand() {
        for t in [1usize, 2, 3, 10, 100, 1000, 10_000] {
            let sum = rank_pool_coefficients(t).unwrap().sum();
            assert!(sum.abs() < 1e-9, "T={t}: sum={sum}");
        }
    }

    #[test]
    fn constant_sequence_pools_to_exact_zero() {
        let seq = seq_from_values(&[0.7; 5]);
        let di = compute_dynamic_image(&seq).unwrap();
        assert!(di.pixels.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn two_frame_difference_form() {
        // T=2 coefficients are [-1/2, 1/2], so DI = 0.5 (V2 - V1).
        let seq = seq_from_values(&[0.2, 0.8]);
        let di = compute_dynamic_image(&seq).unwrap();
        assert_relative_eq!(di.pixels[0], 0.5 * (0.8 - 0.2), epsilon = 1e-12);
    }

    #[test]
    fn pooling_is_linear() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let t_len = 6;
        let xs: Vec<f64> = (0..t_len).map(|_| rng.gen_range(0.0..1.0)).collect();
        let ys: Vec<f64> = (0..t_len).map(|_| rng.gen_range(0.0..1.0)).collect();
        let (a, b) = (0.35, 0.55);
        let mixed: Vec<f64> = xs.iter().zip(&ys).map(|(&x, &y)| a * x + b * y).collect();
        let di_mixed = compute_dynamic_image(&seq_from_values(&mixed)).unwrap();
        let di_x = compute_dynamic_image(&seq_from_values(&xs)).unwrap();
        let di_y = compute_dynamic_image(&seq_from_values(&ys)).unwrap();
        let expected = a * di_x.pixels[0] + b * di_y.pixels[0];
        assert_relative_eq!(di_mixed.pixels[0], expected, max_relative = 1e-9);
    }

    #[test]
    fn exact_pooling_of_ramp_is_positively_proportional() {
        // V_t = t * A: the fitted image must be a positive multiple of A.
        let k = 2;
        let base = [0.05, 0.1, 0.15, 0.2];
        let frames: Vec<DomainImage> = (1..=4)
            .map(|t| {
                DomainImage::new(
                    base.iter().map(|&a| a * t as f64).collect(),
                    k,
                    Domain::CrossDomain,
                )
                .unwrap()
            })
            .collect();
        let seq = ImageSequence::new(frames).unwrap();
        for &lambda in &[0.0, 1e-6, 1e-2] {
            let di = rank_pool_exact(&seq, lambda).unwrap();
            let scale = di.pixels[0] / base[0];
            assert!(scale > 0.0, "lambda={lambda}");
            for (p, &a) in di.pixels.iter().zip(&base) {
                assert_relative_eq!(p / a, scale, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn exact_pooling_of_constant_is_zero_with_regularizer() {
        let seq = seq_from_values(&[0.4; 6]);
        let di = rank_pool_exact(&seq, 0.5).unwrap();
        assert!(di.pixels.iter().all(|&p| p.abs() < 1e-12));
    }

    #[test]
    fn exact_pooling_of_constant_without_regularizer_is_rank_deficient() {
        let seq = seq_from_values(&[0.4; 6]);
        assert!(matches!(
            rank_pool_exact(&seq, 0.0).unwrap_err(),
            Error::RankDeficient
        ));
    }

    #[test]
    fn sign_agreement_on_binary_length_four_sequences() {
        // All 16 single-pixel 0/1 sequences of length 4: wherever one method
        // sees increase/decrease, so does the other.
        for bits in 0u32..16 {
            let values: Vec<f64> = (0..4).map(|i| ((bits >> i) & 1) as f64).collect();
            let seq = seq_from_values(&values);
            let approx_val = compute_dynamic_image(&seq).unwrap().pixels[0];
            let exact_val = rank_pool_exact(&seq, 1e-6).unwrap().pixels[0];
            let monotone_up = values.windows(2).all(|w| w[1] >= w[0]);
            let monotone_down = values.windows(2).all(|w| w[1] <= w[0]);
            let constant = values.iter().all(|&v| v == values[0]);
            if constant {
                assert!(approx_val.abs() < 1e-12 && exact_val.abs() < 1e-9);
            } else if monotone_up {
                assert!(approx_val > 0.0 && exact_val > 0.0, "{values:?}");
            } else if monotone_down {
                assert!(approx_val < 0.0 && exact_val < 0.0, "{values:?}");
            } else if approx_val.abs() > 1e-9 && exact_val.abs() > 1e-9 {
                assert_eq!(
                    approx_val.signum(),
                    exact_val.signum(),
                    "{values:?}: {approx_val} vs {exact_val}"
                );
            }
        }
    }

    #[test]
    fn display_normalization() {
        let zero = DynamicImage {
            pixels: vec![0.0; 4],
            size: 2,
            source_length: 3,
        };
        let img = normalize_for_display(&zero).unwrap();
        assert!(img.pixels().iter().all(|&p| p == 0.5));

        let tri = DynamicImage {
            pixels: vec![-1.0, 0.0, 1.0, 0.0],
            size: 2,
            source_length: 3,
        };
        let img = normalize_for_display(&tri).unwrap();
        assert_eq!(img.pixels()[0], 0.0);
        assert_eq!(img.pixels()[1], 0.5);
        assert_eq!(img.pixels()[2], 1.0);
    }

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("di.bin");
        let di = DynamicImage {
            pixels: vec![-1.25, 0.5, 3.75, 0.0],
            size: 2,
            source_length: 9,
        };
        write_dynamic_image(&di, &path).unwrap();
        let back = read_dynamic_image(&path).unwrap();
        assert_eq!(back.size, 2);
        assert_eq!(back.source_length, 9);
        assert_eq!(back.pixels, di.pixels); // values chosen exactly f32-representable
    }
}
