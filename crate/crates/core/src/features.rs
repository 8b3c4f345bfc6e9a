//! Composition helpers from preprocessed scans to cross-domain sequences and
//! CDI features: render texture + depth, CLAHE-enhance depth, fuse, pool.

use crate::classify::{featurize, FeatureVector};
use crate::dynamic::compute_dynamic_image;
use crate::error::Result;
use crate::image::{clahe_enhance, fuse_sequence, ImageSequence};
use crate::mesh::ScanSequence;
use crate::render::{render_depth, render_texture, CameraSpec};

/// Parameters shared by every cross-domain rendering call.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CdParams {
    pub clahe_tiles: usize,
    pub clahe_clip: f64,
    pub fusion_weights: Option<[f64; 3]>,
}

impl Default for CdParams {
    fn default() -> Self {
        Self {
            clahe_tiles: crate::image::DEFAULT_CLAHE_TILES,
            clahe_clip: crate::image::DEFAULT_CLAHE_CLIP,
            fusion_weights: None,
        }
    }
}

/// The three per-frame image domains of one (sequence, view).
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSequences {
    pub texture: ImageSequence,
    pub depth: ImageSequence,
    pub enhanced: ImageSequence,
}

impl DomainSequences {
    pub fn len(&self) -> usize {
        self.texture.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texture.is_empty()
    }

    /// Frame-wise cross-domain fusion.
    pub fn fuse(&self, weights: Option<[f64; 3]>) -> Result<ImageSequence> {
        fuse_sequence(&self.texture, &self.depth, &self.enhanced, weights)
    }
}

/// Renders every frame of a preprocessed view into texture, depth, and
/// enhanced-depth sequences.
pub fn render_domain_sequences(
    view: &ScanSequence,
    cam: &CameraSpec,
    k: usize,
    params: &CdParams,
) -> Result<DomainSequences> {
    let mut textures = Vec::with_capacity(view.len());
    let mut depths = Vec::with_capacity(view.len());
    let mut enhanced = Vec::with_capacity(view.len());
    for frame in &view.frames {
        let depth = render_depth(&frame.mesh, cam, k)?;
        textures.push(render_texture(&frame.mesh, cam, k)?);
        enhanced.push(clahe_enhance(&depth, params.clahe_tiles, params.clahe_clip)?);
        depths.push(depth);
    }
    Ok(DomainSequences {
        texture: ImageSequence::new(textures)?,
        depth: ImageSequence::new(depths)?,
        enhanced: ImageSequence::new(enhanced)?,
    })
}

/// Rank-pools a cross-domain sequence and featurizes the result.
pub fn cdi_feature(cd: &ImageSequence) -> Result<FeatureVector> {
    featurize(&compute_dynamic_image(cd)?)
}
