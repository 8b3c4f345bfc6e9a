//! Orthographic z-buffered rasterization of face meshes into texture and
//! depth images.
//!
//! The camera looks along -z (scan faces point toward +z), samples pixel
//! centers with a top-left origin, and normalizes covered depth per frame so
//! the nearest point maps to 1 and the farthest to just above 0. A mesh with
//! no faces rasterizes to a pure background image.

use crate::error::{Error, Result};
use crate::image::{Domain, DomainImage, ImageSequence};
use crate::mesh::{FaceMesh, ScanSequence};

/// Depth value assigned to the farthest covered point, keeping it separated
/// from the background after 8-bit export.
pub const DEPTH_FLOOR: f64 = 1.0 / 255.0;

/// Orthographic projection window in mesh units.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CameraSpec {
    pub center_x: f64,
    pub center_y: f64,
    pub width: f64,
    pub height: f64,
    pub background: f64,
}

impl CameraSpec {
    pub fn new(
        center_x: f64,
        center_y: f64,
        width: f64,
        height: f64,
        background: f64,
    ) -> Result<Self> {
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::Config(format!(
                "camera extents must be positive, got {width} x {height}"
            )));
        }
        if !(0.0..=1.0).contains(&background) {
            return Err(Error::Config(format!(
                "background {background} outside [0, 1]"
            )));
        }
        Ok(Self {
            center_x,
            center_y,
            width,
            height,
            background,
        })
    }

    /// Square window framing the union bounding box of all given meshes,
    /// expanded by `margin` on each side (as a fraction of the extent).
    pub fn fit_meshes<'a>(
        meshes: impl IntoIterator<Item = &'a FaceMesh>,
        margin: f64,
    ) -> Result<Self> {
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for mesh in meshes {
            for v in &mesh.vertices {
                x_min = x_min.min(v.x);
                x_max = x_max.max(v.x);
                y_min = y_min.min(v.y);
                y_max = y_max.max(v.y);
            }
        }
        if !x_min.is_finite() {
            return Err(Error::Config("cannot fit a camera to empty meshes".into()));
        }
        let extent = ((x_max - x_min).max(y_max - y_min)).max(1e-9) * (1.0 + 2.0 * margin);
        CameraSpec::new(
            0.5 * (x_min + x_max),
            0.5 * (y_min + y_max),
            extent,
            extent,
            0.0,
        )
    }

    /// Square window framing the landmark-derived crop region, expanded by
    /// `margin` on each side. Anchoring the camera to anatomy rather than
    /// the vertex bounding box keeps faces aligned across subjects and
    /// views, which matters for any downstream pixel-space comparison.
    pub fn frame_face(
        lm: &crate::mesh::LandmarkSet,
        forehead_fraction: f64,
        margin: f64,
    ) -> Result<Self> {
        let x_min = lm.left_face_bound.x.min(lm.right_face_bound.x);
        let x_max = lm.left_face_bound.x.max(lm.right_face_bound.x);
        let mid = lm.eyebrow_mid();
        let y_min = lm.chin.y;
        let y_max = mid.y + forehead_fraction * lm.brow_nose_distance();
        let extent = ((x_max - x_min).max(y_max - y_min)).max(1e-9) * (1.0 + 2.0 * margin);
        CameraSpec::new(
            0.5 * (x_min + x_max),
            0.5 * (y_min + y_max),
            extent,
            extent,
            0.0,
        )
    }

    /// Mesh-space x coordinate of pixel column `col`'s center.
    pub fn pixel_x(&self, col: usize, k: usize) -> f64 {
        self.center_x - 0.5 * self.width + (col as f64 + 0.5) * self.width / k as f64
    }

    /// Mesh-space y coordinate of pixel row `row`'s center (row 0 on top).
    pub fn pixel_y(&self, row: usize, k: usize) -> f64 {
        self.center_y + 0.5 * self.height - (row as f64 + 0.5) * self.height / k as f64
    }
}

#[derive(Clone, Copy)]
enum Shading {
    Depth,
    Luminance,
}

fn rasterize(
    mesh: &FaceMesh,
    cam: &CameraSpec,
    k: usize,
    shading: Shading,
) -> Result<(Vec<f64>, Vec<bool>, Vec<f64>)> {
    if k == 0 {
        return Err(Error::Config("image size K must be >= 1".into()));
    }
    let lum: Option<Vec<f64>> = match shading {
        Shading::Luminance => Some(
            (0..mesh.vertex_count())
                .map(|j| {
                    mesh.luminance(j)
                        .ok_or_else(|| Error::MissingAttribute("per-vertex colors".into()))
                })
                .collect::<Result<_>>()?,
        ),
        Shading::Depth => None,
    };

    let mut zbuf = vec![f64::NEG_INFINITY; k * k];
    let mut covered = vec![false; k * k];
    let mut value = vec![0.0f64; k * k];

    let px_w = cam.width / k as f64;
    let px_h = cam.height / k as f64;

    for face in &mesh.faces {
        let a = mesh.vertices[face[0]];
        let b = mesh.vertices[face[1]];
        let c = mesh.vertices[face[2]];

        let denom = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        if denom == 0.0 {
            continue;
        }

        // Pixel-index bounding box of the projected triangle.
        let x_lo = a.x.min(b.x).min(c.x);
        let x_hi = a.x.max(b.x).max(c.x);
        let y_lo = a.y.min(b.y).min(c.y);
        let y_hi = a.y.max(b.y).max(c.y);
        let col_lo = (((x_lo - cam.center_x + 0.5 * cam.width) / px_w - 0.5).floor() as isize)
            .clamp(0, k as isize - 1) as usize;
        let col_hi = (((x_hi - cam.center_x + 0.5 * cam.width) / px_w - 0.5).ceil() as isize)
            .clamp(0, k as isize - 1) as usize;
        let row_lo = (((cam.center_y + 0.5 * cam.height - y_hi) / px_h - 0.5).floor() as isize)
            .clamp(0, k as isize - 1) as usize;
        let row_hi = (((cam.center_y + 0.5 * cam.height - y_lo) / px_h - 0.5).ceil() as isize)
            .clamp(0, k as isize - 1) as usize;

        for row in row_lo..=row_hi {
            let py = cam.pixel_y(row, k);
            for col in col_lo..=col_hi {
                let px = cam.pixel_x(col, k);
                let w0 = (b.x - px) * (c.y - py) - (b.y - py) * (c.x - px);
                let w1 = (c.x - px) * (a.y - py) - (c.y - py) * (a.x - px);
                let w2 = (a.x - px) * (b.y - py) - (a.y - py) * (b.x - px);
                let inside = (w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0)
                    || (w0 <= 0.0 && w1 <= 0.0 && w2 <= 0.0);
                if !inside {
                    continue;
                }
                let (l0, l1, l2) = (w0 / denom, w1 / denom, w2 / denom);
                let z = l0 * a.z + l1 * b.z + l2 * c.z;
                let idx = row * k + col;
                if z > zbuf[idx] {
                    zbuf[idx] = z;
                    covered[idx] = true;
                    if let Some(ref lum) = lum {
                        value[idx] = (l0 * lum[face[0]]
                            + l1 * lum[face[1]]
                            + l2 * lum[face[2]])
                        .clamp(0.0, 1.0);
                    }
                }
            }
        }
    }
    Ok((value, covered, zbuf))
}

/// Normalizes a z-buffer over its covered pixels: nearest (max z) maps to 1,
/// farthest to `DEPTH_FLOOR`; a flat depth field maps to 1 everywhere.
pub fn normalize_depth(zbuf: &[f64], covered: &[bool], background: f64) -> Vec<f64> {
    let mut z_min = f64::INFINITY;
    let mut z_max = f64::NEG_INFINITY;
    for (&z, &c) in zbuf.iter().zip(covered) {
        if c {
            z_min = z_min.min(z);
            z_max = z_max.max(z);
        }
    }
    zbuf.iter()
        .zip(covered)
        .map(|(&z, &c)| {
            if !c {
                background
            } else if z_max > z_min {
                (DEPTH_FLOOR + (1.0 - DEPTH_FLOOR) * (z - z_min) / (z_max - z_min))
                    .clamp(0.0, 1.0)
            } else {
                1.0
            }
        })
        .collect()
}

/// Renders a depth image: orthographic projection along -z with a z-buffer,
/// covered depth normalized per frame, uncovered pixels at the background
/// value.
pub fn render_depth(mesh: &FaceMesh, cam: &CameraSpec, k: usize) -> Result<DomainImage> {
    let (_, covered, zbuf) = rasterize(mesh, cam, k, Shading::Depth)?;
    DomainImage::new(normalize_depth(&zbuf, &covered, cam.background), k, Domain::Depth)
}

/// Renders a texture image: z-buffered rasterization with barycentric
/// interpolation of per-vertex luminance. Missing colors are an error.
pub fn render_texture(mesh: &FaceMesh, cam: &CameraSpec, k: usize) -> Result<DomainImage> {
    let (value, covered, _) = rasterize(mesh, cam, k, Shading::Luminance)?;
    let pixels = value
        .iter()
        .zip(&covered)
        .map(|(&v, &c)| if c { v } else { cam.background })
        .collect();
    DomainImage::new(pixels, k, Domain::Texture)
}

/// Per-view texture and depth sequences.
pub type RenderedView = (f64, ImageSequence, ImageSequence);

/// Renders every frame of every view; sequence lengths are preserved and
/// errors carry their (theta, t) coordinates.
pub fn render_views(
    views: &[(f64, ScanSequence)],
    cam: &CameraSpec,
    k: usize,
) -> Result<Vec<RenderedView>> {
    views
        .iter()
        .map(|(theta, seq)| {
            let mut textures = Vec::with_capacity(seq.len());
            let mut depths = Vec::with_capacity(seq.len());
            for (t, frame) in seq.frames.iter().enumerate() {
                let coords = format!("theta={theta}, t={}", t + 1);
                textures.push(
                    render_texture(&frame.mesh, cam, k)
                        .map_err(|e| e.in_stage("render", coords.clone()))?,
                );
                depths.push(
                    render_depth(&frame.mesh, cam, k)
                        .map_err(|e| e.in_stage("render", coords))?,
                );
            }
            Ok((
                *theta,
                ImageSequence::new(textures)?,
                ImageSequence::new(depths)?,
            ))
        })
        .collect()
}
