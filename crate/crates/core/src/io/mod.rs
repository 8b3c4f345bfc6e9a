//! Readers and writers for the on-disk corpus layout.
//!
//! A dataset root contains one directory per subject, one subdirectory per
//! expression name, with zero-padded per-frame OBJ meshes and a single
//! `landmarks.txt` carrying the six anchors for every frame:
//!
//! ```text
//! root/
//!   subj01/
//!     happiness/
//!       frame_0000.obj
//!       frame_0001.obj
//!       landmarks.txt
//! ```

mod dataset;
mod landmarks;
mod obj;
mod ply;

pub use dataset::{load_dataset, save_dataset};
pub use landmarks::{read_landmarks, write_landmarks};
pub use obj::{load_obj, write_obj};
pub use ply::load_ply;

use crate::error::{Error, Result};
use crate::mesh::FaceMesh;
use std::path::Path;

/// Supported mesh file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    /// Infers the format from a file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("ply") => Ok(MeshFormat::Ply),
            other => Err(Error::UnsupportedFormat(format!(
                "mesh extension {other:?} (expected .obj or .ply)"
            ))),
        }
    }
}

/// Loads a triangle mesh in the declared format.
pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<FaceMesh> {
    match format {
        MeshFormat::Obj => load_obj(path),
        MeshFormat::Ply => load_ply(path),
    }
}
