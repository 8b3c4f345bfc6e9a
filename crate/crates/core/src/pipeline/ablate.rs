//! Ablation harness: runs the same data, folds, and classifier seeds under
//! toggled settings (cross-domain fusion on/off, augmentation levels) and
//! reports the accuracy of each setting side by side.

use super::config::PipelineConfig;
use super::run::{run_pipeline, PipelineOutput};
use crate::augment::AugmentationPlan;
use crate::collab::kfold_split;
use crate::error::{Error, Result};
use std::path::Path;

/// The four augmentation presets: which branches of the augmentation
/// lattice feed training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentationLevel {
    /// Unaugmented full clips only.
    Original,
    /// Magnified clips and their variants, originals excluded.
    EvmVariants,
    /// Original clips and their variants, magnification excluded.
    OriginalVariants,
    /// Everything: originals, magnified, and all variants.
    All,
}

impl AugmentationLevel {
    pub const ALL_LEVELS: [AugmentationLevel; 4] = [
        AugmentationLevel::Original,
        AugmentationLevel::EvmVariants,
        AugmentationLevel::OriginalVariants,
        AugmentationLevel::All,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            AugmentationLevel::Original => "original",
            AugmentationLevel::EvmVariants => "evm_variants",
            AugmentationLevel::OriginalVariants => "original_variants",
            AugmentationLevel::All => "all",
        }
    }

    /// Maps the preset onto a plan, starting from `base` for the shared
    /// EVM/flip/rotation/window parameters.
    pub fn plan(&self, base: &AugmentationPlan) -> Option<AugmentationPlan> {
        match self {
            AugmentationLevel::Original => None,
            AugmentationLevel::EvmVariants => Some(AugmentationPlan {
                include_original: false,
                include_magnified: true,
                ..base.clone()
            }),
            AugmentationLevel::OriginalVariants => Some(AugmentationPlan {
                include_original: true,
                include_magnified: false,
                ..base.clone()
            }),
            AugmentationLevel::All => Some(AugmentationPlan {
                include_original: true,
                include_magnified: true,
                ..base.clone()
            }),
        }
    }
}

/// Which settings to sweep; the cartesian product is run.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationToggles {
    pub cross_domain: Vec<bool>,
    pub augmentation_levels: Vec<AugmentationLevel>,
}

impl AblationToggles {
    /// Cross-domain on/off under the config's own augmentation.
    pub fn cd_on_off() -> Self {
        Self {
            cross_domain: vec![true, false],
            augmentation_levels: vec![AugmentationLevel::Original],
        }
    }

    /// The four augmentation presets without cross-domain fusion.
    pub fn augmentation_sweep() -> Self {
        Self {
            cross_domain: vec![false],
            augmentation_levels: AugmentationLevel::ALL_LEVELS.to_vec(),
        }
    }
}

/// One completed setting.
#[derive(Debug, Clone)]
pub struct AblationRun {
    pub cross_domain: bool,
    pub level: AugmentationLevel,
    pub mean_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub output: PipelineOutput,
}

/// The comparative result across all settings.
#[derive(Debug, Clone)]
pub struct AblationOutcome {
    pub runs: Vec<AblationRun>,
}

impl AblationOutcome {
    pub fn mean_accuracy(&self, cross_domain: bool, level: AugmentationLevel) -> Option<f64> {
        self.runs
            .iter()
            .find(|r| r.cross_domain == cross_domain && r.level == level)
            .map(|r| r.mean_accuracy)
    }

    /// Summary CSV: one row per setting plus the accuracy delta against the
    /// first setting.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("cross_domain,augmentation,mean_accuracy,delta_vs_first\n");
        let first = self.runs.first().map(|r| r.mean_accuracy).unwrap_or(0.0);
        for run in &self.runs {
            out.push_str(&format!(
                "{},{},{:.6},{:+.6}\n",
                run.cross_domain,
                run.level.tag(),
                run.mean_accuracy,
                run.mean_accuracy - first
            ));
        }
        out
    }
}

/// Runs every toggle combination with identical folds and classifier seeds.
/// Per-setting artifacts land in `<out_dir>/<setting-tag>/`, the comparison
/// in `<out_dir>/ablation_summary.csv`.
pub fn run_ablation(
    config: &PipelineConfig,
    toggles: &AblationToggles,
    out_dir: &Path,
) -> Result<AblationOutcome> {
    if toggles.cross_domain.is_empty() || toggles.augmentation_levels.is_empty() {
        return Err(Error::Config("empty ablation toggle set".into()));
    }
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(crate::error::io_err(out_dir))?;

    let base_plan = config.augmentation.clone().unwrap_or_default();
    let mut runs = Vec::new();
    let mut fold_reference: Option<Vec<crate::collab::FoldSplit>> = None;

    for &cross_domain in &toggles.cross_domain {
        for &level in &toggles.augmentation_levels {
            let setting = PipelineConfig {
                cross_domain,
                augmentation: level.plan(&base_plan),
                ..config.clone()
            };
            let tag = format!(
                "{}_{}",
                if cross_domain { "cd" } else { "nocd" },
                level.tag()
            );
            let run_dir = out_dir.join(&tag);
            let output = run_pipeline(&setting, &run_dir)
                .map_err(|e| e.in_stage("ablate", tag.clone()))?;

            // Fairness: every setting must see the same subject folds.
            let dataset = match &setting.source {
                super::config::DataSource::Synthetic { spec } => {
                    crate::synthetic::generate_dataset(spec)?
                }
                super::config::DataSource::Disk { root } => crate::io::load_dataset(root)?,
            };
            let folds = kfold_split(&dataset, setting.folds, setting.seed)?;
            match &fold_reference {
                None => fold_reference = Some(folds),
                Some(reference) => {
                    if *reference != folds {
                        return Err(Error::Config(
                            "ablation settings produced different fold splits".into(),
                        ));
                    }
                }
            }

            let fold_accuracies = output.fold_accuracies.clone();
            let mean_accuracy =
                fold_accuracies.iter().sum::<f64>() / fold_accuracies.len().max(1) as f64;
            runs.push(AblationRun {
                cross_domain,
                level,
                mean_accuracy,
                fold_accuracies,
                output,
            });
        }
    }

    let outcome = AblationOutcome { runs };
    let summary_path = out_dir.join("ablation_summary.csv");
    std::fs::write(&summary_path, outcome.summary_csv())
        .map_err(crate::error::io_err(&summary_path))?;
    Ok(outcome)
}
