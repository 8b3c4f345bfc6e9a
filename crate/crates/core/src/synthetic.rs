//! Seeded synthetic 4D face data so the full pipeline runs end to end
//! without licensed scan corpora.
//!
//! The base face is a half-ellipsoid shell (front hemisphere, z toward the
//! camera) with six landmark anchors pinned to fixed grid vertices, so they
//! ride the surface through every deformation. Each expression class warps
//! its own facial regions with Gaussian bumps whose amplitude ramps from 0
//! at the first frame to its peak at the last (onset to apex). Subject
//! identity is a seeded smooth shape and albedo perturbation.

use crate::error::{Error, Result};
use crate::features::{cdi_feature, render_domain_sequences, CdParams};
use crate::mesh::{
    preprocess_scan, Dataset, FaceMesh, LandmarkSet, ScanFrame, ScanSequence, Vertex3,
    NUM_CLASSES,
};
use crate::render::CameraSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Face shell semi-axes in millimeters (half-width, half-height, depth).
const AXES: [f64; 3] = [70.0, 90.0, 55.0];
/// Polar-angle range of the sampled shell, avoiding the ellipsoid poles.
const PHI_RANGE: (f64, f64) = (0.15 * std::f64::consts::PI, 0.85 * std::f64::consts::PI);
/// Grid resolution (rows x cols); odd so center row/column vertices exist.
const GRID: usize = 21;

/// One localized deformation: a Gaussian bump displacing vertices near
/// `center` along `dir`, scaled by the temporal ramp.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Bump {
    pub center: [f64; 3],
    pub dir: [f64; 3],
    pub amplitude: f64,
    pub sigma: f64,
}

/// The bump set acted by one expression class.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ClassProfile {
    pub label: u8,
    pub bumps: Vec<Bump>,
}

fn bump(center: [f64; 3], dir: [f64; 3], amplitude: f64, sigma: f64) -> Bump {
    Bump {
        center,
        dir,
        amplitude,
        sigma,
    }
}

/// Deformation profiles for the six prototypic expressions. Region centers
/// sit on the base shell (mouth low, brows high, nose front).
pub fn default_profiles() -> Vec<ClassProfile> {
    vec![
        // anger: brows lower and pull forward, nose wrinkles
        ClassProfile {
            label: 1,
            bumps: vec![
                bump([-25.0, 36.0, 44.0], [0.0, -1.0, 0.5], 12.0, 14.0),
                bump([25.0, 36.0, 44.0], [0.0, -1.0, 0.5], 12.0, 14.0),
                bump([0.0, 15.0, 53.0], [0.0, 0.0, 1.0], 6.0, 10.0),
            ],
        },
        // disgust: upper lip and nose scrunch upward
        ClassProfile {
            label: 2,
            bumps: vec![
                bump([0.0, -25.0, 50.0], [0.0, 1.0, 0.6], 11.0, 13.0),
                bump([0.0, 8.0, 54.0], [0.0, -0.5, 1.0], 7.0, 11.0),
                bump([-18.0, 5.0, 48.0], [0.0, 0.3, 1.0], 5.0, 10.0),
            ],
        },
        // fear: brows raise, mouth stretches sideways
        ClassProfile {
            label: 3,
            bumps: vec![
                bump([-25.0, 36.0, 44.0], [0.0, 1.0, 0.0], 9.0, 14.0),
                bump([25.0, 36.0, 44.0], [0.0, 1.0, 0.0], 9.0, 14.0),
                bump([-22.0, -38.0, 45.0], [-1.0, 0.0, 0.4], 9.0, 12.0),
                bump([22.0, -38.0, 45.0], [1.0, 0.0, 0.4], 9.0, 12.0),
            ],
        },
        // happiness: mouth corners raise, cheeks puff
        ClassProfile {
            label: 4,
            bumps: vec![
                bump([-22.0, -38.0, 45.0], [0.0, 1.0, 0.4], 13.0, 13.0),
                bump([22.0, -38.0, 45.0], [0.0, 1.0, 0.4], 13.0, 13.0),
                bump([-30.0, -10.0, 45.0], [0.0, 0.0, 1.0], 7.0, 15.0),
                bump([30.0, -10.0, 45.0], [0.0, 0.0, 1.0], 7.0, 15.0),
            ],
        },
        // sadness: mouth corners droop, inner brows rise
        ClassProfile {
            label: 5,
            bumps: vec![
                bump([-22.0, -38.0, 45.0], [0.0, -1.0, -0.3], 11.0, 13.0),
                bump([22.0, -38.0, 45.0], [0.0, -1.0, -0.3], 11.0, 13.0),
                bump([-10.0, 34.0, 48.0], [0.0, 1.0, 0.0], 6.0, 10.0),
                bump([10.0, 34.0, 48.0], [0.0, 1.0, 0.0], 6.0, 10.0),
            ],
        },
        // surprise: brows shoot up, jaw drops
        ClassProfile {
            label: 6,
            bumps: vec![
                bump([-25.0, 36.0, 44.0], [0.0, 1.0, 0.2], 12.0, 14.0),
                bump([25.0, 36.0, 44.0], [0.0, 1.0, 0.2], 12.0, 14.0),
                bump([0.0, -70.0, 30.0], [0.0, -1.0, 0.0], 14.0, 16.0),
                bump([0.0, -40.0, 48.0], [0.0, 0.0, -0.8], 8.0, 12.0),
            ],
        },
    ]
}

/// Generation parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SyntheticSpec {
    pub subjects: usize,
    pub frames_per_clip: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Per-subject head tilt: each subject holds a fixed in-plane roll drawn
    /// uniformly from [-roll_jitter_deg, +roll_jitter_deg].
    #[serde(default = "default_roll_jitter")]
    pub roll_jitter_deg: f64,
    #[serde(default = "default_profiles")]
    pub profiles: Vec<ClassProfile>,
}

fn default_roll_jitter() -> f64 {
    6.0
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            subjects: 12,
            frames_per_clip: 32,
            noise_sigma: 0.0,
            seed: 0,
            roll_jitter_deg: default_roll_jitter(),
            profiles: default_profiles(),
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.subjects == 0 {
            return Err(Error::Config("at least one subject required".into()));
        }
        if self.frames_per_clip < 2 {
            return Err(Error::Config("frames_per_clip must be >= 2".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::Config(format!(
                "noise_sigma {} must be nonnegative",
                self.noise_sigma
            )));
        }
        if !(self.roll_jitter_deg >= 0.0) {
            return Err(Error::Config(format!(
                "roll_jitter_deg {} must be nonnegative",
                self.roll_jitter_deg
            )));
        }
        if self.profiles.len() != NUM_CLASSES {
            return Err(Error::Config(format!(
                "{} class profiles, expected {NUM_CLASSES}",
                self.profiles.len()
            )));
        }
        Ok(())
    }
}

/// Landmark anchors as (row, col) grid indices.
struct AnchorIndices {
    left_face_bound: usize,
    right_face_bound: usize,
    chin: usize,
    nose_tip: usize,
    left_eyebrow: usize,
    right_eyebrow: usize,
}

fn anchor_indices() -> AnchorIndices {
    let center = GRID / 2;
    let at = |row: usize, col: usize| row * GRID + col;
    // Eyebrow row: about 40% of half-height above center; columns about 40%
    // off-axis. Row index grows downward in phi, i.e. from top of head.
    let brow_row = (GRID as f64 * 0.30).round() as usize;
    let brow_off = (GRID as f64 * 0.20).round() as usize;
    AnchorIndices {
        left_face_bound: at(center, GRID - 1),
        right_face_bound: at(center, 0),
        chin: at(GRID - 1, center),
        nose_tip: at(center, center),
        left_eyebrow: at(brow_row, center + brow_off),
        right_eyebrow: at(brow_row, center - brow_off),
    }
}

/// Base half-ellipsoid grid positions (row-major) and triangle faces.
fn base_grid() -> (Vec<Vertex3>, Vec<[usize; 3]>) {
    let mut vertices = Vec::with_capacity(GRID * GRID);
    for row in 0..GRID {
        let phi = PHI_RANGE.0 + (PHI_RANGE.1 - PHI_RANGE.0) * row as f64 / (GRID - 1) as f64;
        for col in 0..GRID {
            // psi from pi (x = -a) to 0 (x = +a) keeps columns left-to-right.
            let psi = std::f64::consts::PI * (1.0 - col as f64 / (GRID - 1) as f64);
            vertices.push(Vertex3::new(
                AXES[0] * phi.sin() * psi.cos(),
                AXES[1] * phi.cos(),
                AXES[2] * phi.sin() * psi.sin(),
            ));
        }
    }
    let mut faces = Vec::with_capacity(2 * (GRID - 1) * (GRID - 1));
    for row in 0..GRID - 1 {
        for col in 0..GRID - 1 {
            let a = row * GRID + col;
            let b = a + 1;
            let c = a + GRID;
            let d = c + 1;
            faces.push([a, b, c]);
            faces.push([b, d, c]);
        }
    }
    (vertices, faces)
}

fn base_luminance(v: &Vertex3, phase: (f64, f64)) -> f64 {
    let mut lum = 0.55
        + 0.18 * (0.08 * v.x + phase.0).sin() * (0.06 * v.y + phase.1).cos()
        + 0.10 * (0.05 * (v.x + v.y)).sin();
    // Darker eye sockets and mouth give the texture domain moving structure.
    for center in [[-25.0, 22.0, 48.0], [25.0, 22.0, 48.0], [0.0, -40.0, 48.0]] {
        let d2 = (v.x - center[0]).powi(2)
            + (v.y - center[1]).powi(2)
            + (v.z - center[2]).powi(2);
        lum -= 0.28 * (-d2 / (2.0 * 9.0f64.powi(2))).exp();
    }
    lum.clamp(0.05, 0.95)
}

/// Standard normal via Box-Muller on the given stream.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

struct SubjectShape {
    scale: [f64; 3],
    bumps: Vec<Bump>,
    lum_phase: (f64, f64),
    roll_deg: f64,
}

fn subject_shape(seed: u64, subject: usize, roll_jitter_deg: f64) -> SubjectShape {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + subject as u64);
    let scale = std::array::from_fn(|_| 1.0 + rng.gen_range(-0.04..0.04));
    let bumps = (0..5)
        .map(|_| {
            let phi = rng.gen_range(PHI_RANGE.0..PHI_RANGE.1);
            let psi = rng.gen_range(0.0..std::f64::consts::PI);
            let center = [
                AXES[0] * phi.sin() * psi.cos(),
                AXES[1] * phi.cos(),
                AXES[2] * phi.sin() * psi.sin(),
            ];
            let dir = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            bump(center, dir, rng.gen_range(-2.0..2.0), rng.gen_range(10.0..25.0))
        })
        .collect();
    let lum_phase = (
        rng.gen_range(0.0..std::f64::consts::TAU),
        rng.gen_range(0.0..std::f64::consts::TAU),
    );
    let roll_deg = if roll_jitter_deg > 0.0 {
        rng.gen_range(-roll_jitter_deg..roll_jitter_deg)
    } else {
        0.0
    };
    SubjectShape {
        scale,
        bumps,
        lum_phase,
        roll_deg,
    }
}

/// In-plane (xy) rotation about the face origin.
fn roll_vertices(vertices: &mut [Vertex3], roll_deg: f64) {
    if roll_deg == 0.0 {
        return;
    }
    let (s, c) = roll_deg.to_radians().sin_cos();
    for v in vertices.iter_mut() {
        let (x, y) = (v.x, v.y);
        v.x = c * x - s * y;
        v.y = s * x + c * y;
    }
}

fn apply_bump(v: &mut Vertex3, b: &Bump, scale: f64) {
    let d2 = (v.x - b.center[0]).powi(2)
        + (v.y - b.center[1]).powi(2)
        + (v.z - b.center[2]).powi(2);
    let w = scale * b.amplitude * (-d2 / (2.0 * b.sigma * b.sigma)).exp();
    let norm = (b.dir[0].powi(2) + b.dir[1].powi(2) + b.dir[2].powi(2)).sqrt();
    if norm == 0.0 {
        return;
    }
    v.x += w * b.dir[0] / norm;
    v.y += w * b.dir[1] / norm;
    v.z += w * b.dir[2] / norm;
}

/// Generates the full labeled dataset: `subjects x 6` sequences, frame 1 at
/// the neutral pose (deformation amplitude zero), apex at the final frame.
/// Bit-identical for a fixed spec.
pub fn generate_dataset(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let (base_vertices, faces) = base_grid();
    let anchors = anchor_indices();
    let t_len = spec.frames_per_clip;

    let mut sequences = Vec::with_capacity(spec.subjects * NUM_CLASSES);
    for subject in 0..spec.subjects {
        let shape = subject_shape(spec.seed, subject, spec.roll_jitter_deg);
        let identity: Vec<Vertex3> = base_vertices
            .iter()
            .map(|v| {
                let mut v = Vertex3::new(
                    v.x * shape.scale[0],
                    v.y * shape.scale[1],
                    v.z * shape.scale[2],
                );
                for b in &shape.bumps {
                    apply_bump(&mut v, b, 1.0);
                }
                v
            })
            .collect();
        let colors: Vec<[f64; 3]> = identity
            .iter()
            .map(|v| {
                let l = base_luminance(v, shape.lum_phase);
                [l, l, l]
            })
            .collect();

        for profile in &spec.profiles {
            let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.seed);
            noise_rng.set_stream(1_000_000 + (subject * NUM_CLASSES + profile.label as usize) as u64);

            let mut frames = Vec::with_capacity(t_len);
            for t in 0..t_len {
                let ramp = t as f64 / (t_len - 1) as f64;
                let mut vertices = identity.clone();
                let mut frame_colors = colors.clone();
                for v in vertices.iter_mut() {
                    for b in &profile.bumps {
                        apply_bump(v, b, ramp);
                    }
                }
                if spec.noise_sigma > 0.0 {
                    let pos_sigma = spec.noise_sigma * 50.0;
                    let lum_sigma = spec.noise_sigma * 0.5;
                    for v in vertices.iter_mut() {
                        v.x += pos_sigma * normal(&mut noise_rng);
                        v.y += pos_sigma * normal(&mut noise_rng);
                        v.z += pos_sigma * normal(&mut noise_rng);
                    }
                    for c in frame_colors.iter_mut() {
                        let l = (c[0] + lum_sigma * normal(&mut noise_rng)).clamp(0.0, 1.0);
                        *c = [l, l, l];
                    }
                }
                // Deformation and noise act in the canonical face frame; the
                // subject's head tilt is applied last.
                roll_vertices(&mut vertices, shape.roll_deg);
                let landmarks = LandmarkSet {
                    left_face_bound: vertices[anchors.left_face_bound],
                    right_face_bound: vertices[anchors.right_face_bound],
                    chin: vertices[anchors.chin],
                    nose_tip: vertices[anchors.nose_tip],
                    left_eyebrow: vertices[anchors.left_eyebrow],
                    right_eyebrow: vertices[anchors.right_eyebrow],
                };
                frames.push(ScanFrame {
                    mesh: FaceMesh::new(vertices, faces.clone(), Some(frame_colors))?,
                    landmarks,
                });
            }
            sequences.push(ScanSequence::new(
                frames,
                format!("subj{subject:02}"),
                profile.label,
            )?);
        }
    }
    Ok(Dataset::new(sequences))
}

/// Ratio of mean between-class to mean within-class CDI feature distance at
/// the frontal view (K = 32, default parameters). Higher is more separable;
/// 0 when fewer than two classes are present.
pub fn class_separation(dataset: &Dataset) -> Result<f64> {
    let params = CdParams::default();
    let mut features = Vec::with_capacity(dataset.sequences.len());
    let mut labels = Vec::with_capacity(dataset.sequences.len());
    for seq in &dataset.sequences {
        let view = preprocess_scan(seq, 0.0, crate::mesh::DEFAULT_FOREHEAD_FRACTION)?;
        let cam = CameraSpec::frame_face(
            &view.frames[0].landmarks,
            crate::mesh::DEFAULT_FOREHEAD_FRACTION,
            0.05,
        )?;
        let domains = render_domain_sequences(&view, &cam, 32, &params)?;
        features.push(cdi_feature(&domains.fuse(params.fusion_weights)?)?);
        labels.push(seq.expression_label);
    }

    let mut between = (0.0, 0usize);
    let mut within = (0.0, 0usize);
    for i in 0..features.len() {
        for j in (i + 1)..features.len() {
            let dist: f64 = features[i]
                .0
                .iter()
                .zip(&features[j].0)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if labels[i] == labels[j] {
                within.0 += dist;
                within.1 += 1;
            } else {
                between.0 += dist;
                between.1 += 1;
            }
        }
    }
    if between.1 == 0 {
        return Ok(0.0);
    }
    if within.1 == 0 || within.0 == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((between.0 / between.1 as f64) / (within.0 / within.1 as f64))
}
