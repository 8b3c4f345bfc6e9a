//! The five-step 4D augmentation scheme over rendered image sequences:
//! per-view extraction (upstream), Eulerian motion magnification, temporal
//! reversal, per-frame flip/rotation, and two-pass windowing.
//!
//! Every emitted clip carries a complete provenance tuple; replaying a
//! provenance against the same inputs reproduces the clip bit for bit. The
//! emitted order is the deterministic lattice order
//! view -> {original, magnified} -> {forward, reversed} -> spatial -> window.

use crate::error::{Error, Result};
use crate::image::{DomainImage, ImageSequence};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// One windowing pass.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WindowPass {
    pub window: usize,
    pub stride: usize,
}

/// Which base copies, transforms, and windowing passes to emit.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AugmentationPlan {
    pub include_original: bool,
    pub include_magnified: bool,
    pub magnification_alpha: f64,
    /// Temporal passband in Hz at the assumed frame rate.
    pub passband_hz: (f64, f64),
    pub fps: f64,
    pub include_reversal: bool,
    pub include_flip: bool,
    pub inplane_rotations_deg: Vec<f64>,
    pub pass1: Option<WindowPass>,
    pub pass2: Option<WindowPass>,
}

impl Default for AugmentationPlan {
    fn default() -> Self {
        Self {
            include_original: true,
            include_magnified: true,
            magnification_alpha: 4.0,
            passband_hz: (0.4, 3.0),
            fps: 25.0,
            include_reversal: true,
            include_flip: true,
            inplane_rotations_deg: vec![-10.0, 10.0],
            pass1: Some(WindowPass {
                window: 16,
                stride: 2,
            }),
            pass2: Some(WindowPass {
                window: 8,
                stride: 8,
            }),
        }
    }
}

impl AugmentationPlan {
    /// A plan that passes each view through untouched as a single clip.
    pub fn passthrough(t_len: usize) -> Self {
        Self {
            include_original: true,
            include_magnified: false,
            magnification_alpha: 0.0,
            passband_hz: (0.4, 3.0),
            fps: 25.0,
            include_reversal: false,
            include_flip: false,
            inplane_rotations_deg: Vec::new(),
            pass1: Some(WindowPass {
                window: t_len,
                stride: 1,
            }),
            pass2: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.include_original && !self.include_magnified {
            return Err(Error::Config(
                "plan excludes both original and magnified copies".into(),
            ));
        }
        if !(self.magnification_alpha >= 0.0) {
            return Err(Error::Config(format!(
                "magnification alpha {} must be nonnegative",
                self.magnification_alpha
            )));
        }
        if self.pass1.is_none() && self.pass2.is_none() {
            return Err(Error::Config("plan has no windowing pass".into()));
        }
        for pass in [self.pass1, self.pass2].into_iter().flatten() {
            if pass.window == 0 || pass.stride == 0 {
                return Err(Error::Config(format!(
                    "window {} / stride {} must both be >= 1",
                    pass.window, pass.stride
                )));
            }
        }
        Ok(())
    }

    fn base_copies(&self) -> usize {
        usize::from(self.include_original) + usize::from(self.include_magnified)
    }

    fn time_copies(&self) -> usize {
        1 + usize::from(self.include_reversal)
    }

    fn spatial_copies(&self) -> usize {
        1 + usize::from(self.include_flip) + self.inplane_rotations_deg.len()
    }
}

/// Number of windows a pass yields on a length-T sequence.
pub fn window_count(t_len: usize, pass: &WindowPass) -> Result<usize> {
    if pass.window > t_len {
        return Err(Error::WindowTooLarge {
            window: pass.window,
            len: t_len,
        });
    }
    Ok((t_len - pass.window) / pass.stride + 1)
}

/// Closed-form clip count for a plan over `n_views` views of length `t_len`.
pub fn expected_clip_count(plan: &AugmentationPlan, n_views: usize, t_len: usize) -> Result<usize> {
    plan.validate()?;
    let mut windows = 0;
    for pass in [plan.pass1, plan.pass2].into_iter().flatten() {
        windows += window_count(t_len, &pass)?;
    }
    Ok(n_views * plan.base_copies() * plan.time_copies() * plan.spatial_copies() * windows)
}

/// Amplifies temporally band-passed pixel motion by `alpha`.
///
/// The filter is an ideal FFT-domain brick wall over [low, high] Hz; the DC
/// bin never passes, so static content is untouched. Output frames are
/// clipped back to [0, 1].
pub fn magnify_motion(
    seq: &ImageSequence,
    alpha: f64,
    passband_hz: (f64, f64),
    fps: f64,
) -> Result<ImageSequence> {
    let t_len = seq.len();
    if t_len < 2 {
        return Err(Error::TooShort(
            "motion magnification needs at least 2 frames".into(),
        ));
    }
    let (low, high) = passband_hz;
    if !(fps > 0.0) {
        return Err(Error::Config(format!("fps {fps} must be positive")));
    }
    if !(0.0 <= low && low < high && high < fps / 2.0) {
        return Err(Error::Config(format!(
            "passband [{low}, {high}] Hz invalid for fps {fps} (need 0 <= low < high < fps/2)"
        )));
    }
    if !(alpha >= 0.0) {
        return Err(Error::Config(format!("alpha {alpha} must be nonnegative")));
    }
    if alpha == 0.0 {
        return Ok(seq.clone());
    }

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(t_len);
    let inverse = planner.plan_fft_inverse(t_len);
    let passes: Vec<bool> = (0..t_len)
        .map(|j| {
            if j == 0 {
                return false;
            }
            let cycles = j.min(t_len - j) as f64;
            let freq = cycles * fps / t_len as f64;
            freq >= low && freq <= high
        })
        .collect();

    let k = seq.size();
    let domain = seq.domain();
    let mut out: Vec<Vec<f64>> = seq
        .frames()
        .iter()
        .map(|f| f.pixels().to_vec())
        .collect();

    let mut buf = vec![Complex::new(0.0, 0.0); t_len];
    for p in 0..k * k {
        let first = out[0][p];
        if out.iter().all(|f| f[p] == first) {
            continue; // constant pixel: bandpass is exactly zero
        }
        for (t, frame) in out.iter().enumerate() {
            buf[t] = Complex::new(frame[p], 0.0);
        }
        forward.process(&mut buf);
        for (b, &pass) in buf.iter_mut().zip(&passes) {
            if !pass {
                *b = Complex::new(0.0, 0.0);
            }
        }
        inverse.process(&mut buf);
        let norm = 1.0 / t_len as f64;
        for (t, frame) in out.iter_mut().enumerate() {
            let band = buf[t].re * norm;
            frame[p] = (frame[p] + alpha * band).clamp(0.0, 1.0);
        }
    }

    ImageSequence::new(
        out.into_iter()
            .map(|pixels| DomainImage::new(pixels, k, domain))
            .collect::<Result<_>>()?,
    )
}

/// Reverses frame order.
pub fn reverse_sequence(seq: &ImageSequence) -> ImageSequence {
    let mut frames: Vec<DomainImage> = seq.frames().to_vec();
    frames.reverse();
    ImageSequence::new(frames).expect("reversal preserves sequence invariants")
}

/// Mirrors every frame horizontally.
pub fn flip_frames(seq: &ImageSequence) -> ImageSequence {
    let k = seq.size();
    let frames = seq
        .frames()
        .iter()
        .map(|f| {
            let mut pixels = vec![0.0; k * k];
            for row in 0..k {
                for col in 0..k {
                    pixels[row * k + col] = f.get(row, k - 1 - col);
                }
            }
            DomainImage::new(pixels, k, f.domain).expect("flip preserves range")
        })
        .collect();
    ImageSequence::new(frames).expect("flip preserves sequence invariants")
}

/// Rotates every frame in-plane about the image center with bilinear
/// resampling; samples falling outside the frame read as background 0.
/// A rotation of exactly 0 degrees is the identity.
pub fn rotate_frames(seq: &ImageSequence, deg: f64) -> ImageSequence {
    if deg == 0.0 {
        return seq.clone();
    }
    let k = seq.size();
    let center = (k as f64 - 1.0) / 2.0;
    let (sin, cos) = deg.to_radians().sin_cos();
    let frames = seq
        .frames()
        .iter()
        .map(|f| {
            let mut pixels = vec![0.0; k * k];
            for row in 0..k {
                for col in 0..k {
                    let dx = col as f64 - center;
                    let dy = row as f64 - center;
                    let sx = center + cos * dx + sin * dy;
                    let sy = center - sin * dx + cos * dy;
                    pixels[row * k + col] = bilinear(f, sx, sy).clamp(0.0, 1.0);
                }
            }
            DomainImage::new(pixels, k, f.domain).expect("rotation preserves range")
        })
        .collect();
    ImageSequence::new(frames).expect("rotation preserves sequence invariants")
}

fn bilinear(img: &DomainImage, x: f64, y: f64) -> f64 {
    let k = img.size() as isize;
    let x0 = x.floor() as isize;
    let y0 = y.floor() as isize;
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let sample = |yy: isize, xx: isize| -> f64 {
        if yy < 0 || xx < 0 || yy >= k || xx >= k {
            0.0
        } else {
            img.get(yy as usize, xx as usize)
        }
    };
    let top = sample(y0, x0) * (1.0 - fx) + sample(y0, x0 + 1) * fx;
    let bottom = sample(y0 + 1, x0) * (1.0 - fx) + sample(y0 + 1, x0 + 1) * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Extracts sub-clips starting at frames 1, 1+stride, ... (1-based) while the
/// window fits. Returns (start, clip) pairs.
pub fn window_sequence(
    seq: &ImageSequence,
    window: usize,
    stride: usize,
) -> Result<Vec<(usize, ImageSequence)>> {
    if window == 0 || stride == 0 {
        return Err(Error::Config("window and stride must be >= 1".into()));
    }
    let t_len = seq.len();
    if window > t_len {
        return Err(Error::WindowTooLarge {
            window,
            len: t_len,
        });
    }
    let mut clips = Vec::new();
    let mut start = 0usize; // 0-based internally
    while start + window <= t_len {
        let frames = seq.frames()[start..start + window].to_vec();
        clips.push((start + 1, ImageSequence::new(frames)?));
        start += stride;
    }
    Ok(clips)
}

/// Per-frame spatial transform applied to a clip.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", content = "deg", rename_all = "snake_case")]
pub enum SpatialTransform {
    Identity,
    Flip,
    Rotate(f64),
}

impl SpatialTransform {
    fn apply(&self, seq: &ImageSequence) -> ImageSequence {
        match self {
            SpatialTransform::Identity => seq.clone(),
            SpatialTransform::Flip => flip_frames(seq),
            SpatialTransform::Rotate(deg) => rotate_frames(seq, *deg),
        }
    }
}

/// Identity of the sequence a clip came from.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SequenceOrigin {
    pub subject_id: String,
    pub expression_label: u8,
}

/// Everything needed to regenerate a clip from its source views.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ClipProvenance {
    pub subject_id: String,
    pub expression_label: u8,
    pub view_deg: f64,
    pub magnified: bool,
    pub reversed: bool,
    pub spatial: SpatialTransform,
    pub pass: u8,
    pub window_start: usize,
    pub window_len: usize,
}

/// A materialized clip with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    pub frames: ImageSequence,
    pub provenance: ClipProvenance,
}

/// The augmented clip collection for one sequence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClipSet {
    pub clips: Vec<Clip>,
}

impl ClipSet {
    pub fn len(&self) -> usize {
        self.clips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clips.is_empty()
    }
}

/// Runs the full augmentation lattice over per-view sequences of one source
/// sequence. Clip order is the deterministic provenance order.
pub fn augment_dataset(
    origin: &SequenceOrigin,
    views: &[(f64, ImageSequence)],
    plan: &AugmentationPlan,
) -> Result<ClipSet> {
    plan.validate()?;
    let mut clips = Vec::new();
    for (view_deg, seq) in views {
        let mut bases: Vec<(bool, ImageSequence)> = Vec::new();
        if plan.include_original {
            bases.push((false, seq.clone()));
        }
        if plan.include_magnified {
            bases.push((
                true,
                magnify_motion(seq, plan.magnification_alpha, plan.passband_hz, plan.fps)
                    .map_err(|e| {
                        e.in_stage("augment", format!("theta={view_deg}, magnification"))
                    })?,
            ));
        }
        for (magnified, base) in &bases {
            let mut timelines: Vec<(bool, ImageSequence)> = vec![(false, base.clone())];
            if plan.include_reversal {
                timelines.push((true, reverse_sequence(base)));
            }
            for (reversed, timeline) in &timelines {
                let mut spatials: Vec<SpatialTransform> = vec![SpatialTransform::Identity];
                if plan.include_flip {
                    spatials.push(SpatialTransform::Flip);
                }
                spatials.extend(
                    plan.inplane_rotations_deg
                        .iter()
                        .map(|&d| SpatialTransform::Rotate(d)),
                );
                for spatial in spatials {
                    let transformed = spatial.apply(timeline);
                    for (pass_no, pass) in [(1u8, plan.pass1), (2u8, plan.pass2)] {
                        let Some(pass) = pass else { continue };
                        for (start, frames) in
                            window_sequence(&transformed, pass.window, pass.stride)?
                        {
                            clips.push(Clip {
                                frames,
                                provenance: ClipProvenance {
                                    subject_id: origin.subject_id.clone(),
                                    expression_label: origin.expression_label,
                                    view_deg: *view_deg,
                                    magnified: *magnified,
                                    reversed: *reversed,
                                    spatial,
                                    pass: pass_no,
                                    window_start: start,
                                    window_len: pass.window,
                                },
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(ClipSet { clips })
}

/// Regenerates a single clip from its provenance and the same source views.
pub fn replay_clip(
    views: &[(f64, ImageSequence)],
    plan: &AugmentationPlan,
    provenance: &ClipProvenance,
) -> Result<ImageSequence> {
    let seq = views
        .iter()
        .find(|(deg, _)| *deg == provenance.view_deg)
        .map(|(_, s)| s)
        .ok_or_else(|| {
            Error::Config(format!("no view at {} degrees", provenance.view_deg))
        })?;
    let base = if provenance.magnified {
        magnify_motion(seq, plan.magnification_alpha, plan.passband_hz, plan.fps)?
    } else {
        seq.clone()
    };
    let timeline = if provenance.reversed {
        reverse_sequence(&base)
    } else {
        base
    };
    let transformed = provenance.spatial.apply(&timeline);
    let start = provenance.window_start - 1;
    if start + provenance.window_len > transformed.len() {
        return Err(Error::WindowTooLarge {
            window: provenance.window_len,
            len: transformed.len(),
        });
    }
    ImageSequence::new(transformed.frames()[start..start + provenance.window_len].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Domain;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn seq_of(values: &[f64], k: usize) -> ImageSequence {
        ImageSequence::new(
            values
                .iter()
                .map(|&v| DomainImage::filled(v, k, Domain::CrossDomain).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn static_video_is_unchanged() {
        let seq = seq_of(&[0.6; 8], 4);
        let out = magnify_motion(&seq, 4.0, (0.5, 2.0), 8.0).unwrap();
        assert_eq!(out, seq);
    }

    #[test]
    fn alpha_zero_is_identity() {
        let seq = seq_of(&[0.1, 0.9, 0.3, 0.7], 2);
        let out = magnify_motion(&seq, 0.0, (0.5, 2.0), 8.0).unwrap();
        assert_eq!(out, seq);
    }

    #[test]
    fn pure_tone_gains_one_plus_alpha() {
        // 0.5 + 0.1 sin(2 pi * 1Hz * t) sampled at 8 fps for 32 frames is an
        // exact DFT bin inside [0.5, 2] Hz; with alpha = 4 the amplitude
        // becomes 0.1 * (1 + 4) = 0.5.
        let fps = 8.0;
        let t_len = 32;
        let values: Vec<f64> = (0..t_len)
            .map(|t| 0.5 + 0.1 * (2.0 * std::f64::consts::PI * t as f64 / fps).sin())
            .collect();
        let seq = seq_of(&values, 1);
        let out = magnify_motion(&seq, 4.0, (0.5, 2.0), fps).unwrap();
        for (t, frame) in out.frames().iter().enumerate() {
            let expected = 0.5 + 0.5 * (2.0 * std::f64::consts::PI * t as f64 / fps).sin();
            assert_relative_eq!(frame.pixels()[0], expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn out_of_band_tone_is_suppressed() {
        // A 3 Hz tone with passband [0.5, 2] Hz: the band signal is zero, so
        // the output equals the input.
        let fps = 8.0;
        let values: Vec<f64> = (0..32)
            .map(|t| 0.5 + 0.1 * (2.0 * std::f64::consts::PI * 3.0 * t as f64 / fps).sin())
            .collect();
        let seq = seq_of(&values, 1);
        let out = magnify_motion(&seq, 4.0, (0.5, 2.0), fps).unwrap();
        for (a, b) in out.frames().iter().zip(seq.frames()) {
            assert_relative_eq!(a.pixels()[0], b.pixels()[0], epsilon = 1e-9);
        }
    }

    #[test]
    fn too_short_and_bad_band_rejected() {
        let seq = seq_of(&[0.5], 2);
        assert!(matches!(
            magnify_motion(&seq, 4.0, (0.5, 2.0), 8.0).unwrap_err(),
            Error::TooShort(_)
        ));
        let seq = seq_of(&[0.5, 0.6], 2);
        assert!(magnify_motion(&seq, 4.0, (2.0, 0.5), 8.0).is_err());
        assert!(magnify_motion(&seq, 4.0, (0.5, 5.0), 8.0).is_err());
    }

    #[test]
    fn reversal_involution_and_order() {
        let seq = seq_of(&[0.1, 0.5, 0.9], 2);
        let rev = reverse_sequence(&seq);
        assert_relative_eq!(rev.frames()[0].pixels()[0], 0.9);
        assert_relative_eq!(rev.frames()[2].pixels()[0], 0.1);
        assert_eq!(reverse_sequence(&rev), seq);
    }

    #[test]
    fn flip_involution() {
        let pixels: Vec<f64> = (0..16).map(|i| i as f64 / 15.0).collect();
        let img = DomainImage::new(pixels, 4, Domain::Texture).unwrap();
        let seq = ImageSequence::new(vec![img]).unwrap();
        let flipped = flip_frames(&seq);
        assert_relative_eq!(flipped.frames()[0].get(0, 0), seq.frames()[0].get(0, 3));
        assert_eq!(flip_frames(&flipped), seq);
    }

    #[test]
    fn rotate_zero_is_identity() {
        let seq = seq_of(&[0.3, 0.8], 5);
        assert_eq!(rotate_frames(&seq, 0.0), seq);
    }

    #[test]
    fn rotate_round_trip_error_is_small_in_interior() {
        // Smooth random image: +10 then -10 degrees stays within 0.02 away
        // from the borders.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let k = 32;
        let (a, b, c, d) = (
            rng.gen_range(0.0..2.0),
            rng.gen_range(0.0..2.0),
            rng.gen_range(0.0..std::f64::consts::PI),
            rng.gen_range(0.0..std::f64::consts::PI),
        );
        let pixels: Vec<f64> = (0..k * k)
            .map(|i| {
                let (row, col) = (i / k, i % k);
                0.5 + 0.4
                    * ((a * row as f64 / k as f64 + c).sin()
                        * (b * col as f64 / k as f64 + d).cos())
            })
            .collect();
        let img = DomainImage::new(pixels, k, Domain::Texture).unwrap();
        let seq = ImageSequence::new(vec![img]).unwrap();
        let round = rotate_frames(&rotate_frames(&seq, 10.0), -10.0);
        let margin = k / 4;
        let mut max_err: f64 = 0.0;
        for row in margin..k - margin {
            for col in margin..k - margin {
                let err = (round.frames()[0].get(row, col) - seq.frames()[0].get(row, col)).abs();
                max_err = max_err.max(err);
            }
        }
        assert!(max_err <= 0.02, "interior round-trip error {max_err}");
    }

    #[test]
    fn windowing_enumeration() {
        let seq = seq_of(&[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9], 1);
        let clips = window_sequence(&seq, 4, 2).unwrap();
        assert_eq!(clips.len(), 4);
        assert_eq!(
            clips.iter().map(|(s, _)| *s).collect::<Vec<_>>(),
            vec![1, 3, 5, 7]
        );
        for (_, clip) in &clips {
            assert_eq!(clip.len(), 4);
        }
        // window == T yields exactly the whole sequence.
        let whole = window_sequence(&seq, 10, 3).unwrap();
        assert_eq!(whole.len(), 1);
        assert_eq!(whole[0].1, seq);
        // window > T is an error.
        let short = seq_of(&[0.0; 5], 1);
        assert!(matches!(
            window_sequence(&short, 6, 1).unwrap_err(),
            Error::WindowTooLarge { window: 6, len: 5 }
        ));
    }

    fn origin() -> SequenceOrigin {
        SequenceOrigin {
            subject_id: "s1".into(),
            expression_label: 4,
        }
    }

    #[test]
    fn passthrough_plan_emits_one_clip() {
        let seq = seq_of(&[0.2, 0.4, 0.6], 2);
        let plan = AugmentationPlan::passthrough(3);
        let clips = augment_dataset(&origin(), &[(0.0, seq.clone())], &plan).unwrap();
        assert_eq!(clips.len(), 1);
        assert_eq!(clips.clips[0].frames, seq);
        assert_eq!(clips.clips[0].provenance.expression_label, 4);
    }

    #[test]
    fn worked_count_example() {
        // 1 view, T=10, EVM on, reversal on, flip only, pass1 (8,2) and
        // pass2 (4,8): 1 * 2 * 2 * 2 * (2 + 1) = 24 clips.
        let values: Vec<f64> = (0..10).map(|t| 0.3 + 0.02 * t as f64).collect();
        let seq = seq_of(&values, 2);
        let plan = AugmentationPlan {
            include_original: true,
            include_magnified: true,
            magnification_alpha: 4.0,
            passband_hz: (0.4, 3.0),
            fps: 25.0,
            include_reversal: true,
            include_flip: true,
            inplane_rotations_deg: vec![],
            pass1: Some(WindowPass {
                window: 8,
                stride: 2,
            }),
            pass2: Some(WindowPass {
                window: 4,
                stride: 8,
            }),
        };
        assert_eq!(expected_clip_count(&plan, 1, 10).unwrap(), 24);
        let clips = augment_dataset(&origin(), &[(0.0, seq)], &plan).unwrap();
        assert_eq!(clips.len(), 24);
    }

    #[test]
    fn count_law_on_random_plans() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..25 {
            let t_len = rng.gen_range(4..20);
            let values: Vec<f64> = (0..t_len).map(|_| rng.gen_range(0.0..1.0)).collect();
            let n_views = rng.gen_range(1..4);
            let views: Vec<(f64, ImageSequence)> = (0..n_views)
                .map(|v| (v as f64 * 10.0, seq_of(&values, 2)))
                .collect();
            let plan = AugmentationPlan {
                include_original: rng.gen_bool(0.8),
                include_magnified: rng.gen_bool(0.5),
                magnification_alpha: 2.0,
                passband_hz: (0.4, 3.0),
                fps: 25.0,
                include_reversal: rng.gen_bool(0.5),
                include_flip: rng.gen_bool(0.5),
                inplane_rotations_deg: (0..rng.gen_range(0..3)).map(|i| 5.0 * (i + 1) as f64).collect(),
                pass1: Some(WindowPass {
                    window: rng.gen_range(1..=t_len),
                    stride: rng.gen_range(1..5),
                }),
                pass2: rng
                    .gen_bool(0.7)
                    .then(|| WindowPass {
                        window: rng.gen_range(1..=t_len),
                        stride: rng.gen_range(1..8),
                    }),
            };
            let plan = if plan.base_copies() == 0 {
                AugmentationPlan {
                    include_original: true,
                    ..plan
                }
            } else {
                plan
            };
            let expected = expected_clip_count(&plan, n_views, t_len).unwrap();
            let clips = augment_dataset(&origin(), &views, &plan).unwrap();
            assert_eq!(clips.len(), expected);
        }
    }

    #[test]
    fn provenance_replays_bit_for_bit() {
        let values: Vec<f64> = (0..12).map(|t| 0.2 + 0.05 * t as f64).collect();
        let views = vec![(0.0, seq_of(&values, 4)), (15.0, seq_of(&values, 4))];
        let plan = AugmentationPlan {
            pass1: Some(WindowPass {
                window: 6,
                stride: 3,
            }),
            pass2: Some(WindowPass {
                window: 4,
                stride: 6,
            }),
            ..AugmentationPlan::default()
        };
        let clips = augment_dataset(&origin(), &views, &plan).unwrap();
        assert_eq!(
            clips.len(),
            expected_clip_count(&plan, 2, 12).unwrap()
        );
        for clip in clips.clips.iter().step_by(7) {
            let replayed = replay_clip(&views, &plan, &clip.provenance).unwrap();
            assert_eq!(replayed, clip.frames);
        }
    }
}
