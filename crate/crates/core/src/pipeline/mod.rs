//! Config-driven batch orchestration: ingest or synthesize, preprocess,
//! render, fuse, pool, augment, train, collaborate, report. Stages cache by
//! content hash and every emitted artifact lands in the run manifest.

mod ablate;
mod config;
mod manifest;
mod run;

pub use ablate::{
    run_ablation, AblationOutcome, AblationRun, AblationToggles, AugmentationLevel,
};
pub use config::{ClassifierHyper, DataSource, PipelineConfig};
pub use manifest::{hash_bytes, hash_file, RunManifest, MANIFEST_FILE};
pub use run::{run_pipeline, run_pipeline_with, Materialize, PipelineOutput, RunOptions, Stage};
