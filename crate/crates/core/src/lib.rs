//! 4D facial expression recognition over sequences of 3D face scans.
//!
//! The library turns scan sequences into multi-view cross-domain dynamic
//! images and classifies the six prototypic expressions:
//!
//! 1. **Preprocess** ([`mesh`]): landmark-guided cropping and yaw rotation
//!    produce aligned multi-view sequences.
//! 2. **Render** ([`render`]): orthographic z-buffered rasterization yields
//!    texture and depth images; CLAHE ([`image`]) sharpens depth into
//!    enhanced-depth images.
//! 3. **Fuse** ([`image`]): per-frame texture/depth/enhanced-depth means
//!    form cross-domain images.
//! 4. **Pool** ([`dynamic`]): rank pooling collapses each cross-domain
//!    sequence into a single cross-domain dynamic image (CDI).
//! 5. **Augment** ([`augment`]): motion magnification, reversal,
//!    flip/rotation, and two-pass windowing expand the training set.
//! 6. **Classify + collaborate** ([`classify`], [`collab`]): per-view class
//!    probabilities are averaged over views (and domains, when fusion is
//!    disabled) and the argmax is the prediction.
//!
//! [`synthetic`] generates seeded labeled 4D data so everything runs end to
//! end at desk scale, and [`pipeline`] orchestrates config-driven batch runs
//! with caching, manifests, and k-fold subject-independent evaluation.

pub mod augment;
pub mod classify;
pub mod collab;
pub mod dynamic;
pub mod error;
pub mod features;
pub mod image;
pub mod io;
pub mod mesh;
pub mod pipeline;
pub mod render;
pub mod synthetic;

pub use error::{Error, Result};
