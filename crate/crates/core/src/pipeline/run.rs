//! The staged pipeline runner.
//!
//! Sequences are processed in parallel per (sequence, view); the feature
//! stage (preprocess → render → fuse → pool → augment → featurize) is cached
//! on disk keyed by a content hash of everything that feeds it, because
//! rasterization dominates runtime. Outputs are collected in deterministic
//! order so identical (config, seed) runs emit identical bytes.

use super::config::{DataSource, PipelineConfig};
use super::manifest::{hash_bytes, RunManifest, RunSummary};
use crate::augment::{augment_dataset, AugmentationPlan, SequenceOrigin};
use crate::classify::{train, ClassifierModel, ExpressionScorer, FeatureVector, TrainConfig};
use crate::collab::{collaborate, evaluate, final_prediction, kfold_split, EvaluationReport, ScoreTensor};
use crate::dynamic::{compute_dynamic_image, normalize_for_display, write_dynamic_image};
use crate::error::{Error, Result};
use crate::features::{cdi_feature, render_domain_sequences, DomainSequences};
use crate::image::{Domain, ImageSequence};
use crate::mesh::{expression_name, generate_views, Dataset, ScanSequence};
use crate::render::CameraSpec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::Path;

/// Pipeline stages in execution order; runs can stop after any of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Synth,
    Preprocess,
    Render,
    Cdi,
    Augment,
    Train,
    Eval,
}

/// Which intermediate artifacts to write to disk.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Materialize {
    pub dataset: bool,
    pub preprocessed: bool,
    pub rendered: bool,
    pub cdi: bool,
    pub clips: bool,
    pub models: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub stop_after: Stage,
    pub materialize: Materialize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            stop_after: Stage::Eval,
            materialize: Materialize {
                cdi: true,
                ..Materialize::default()
            },
        }
    }
}

/// Everything a run produces in memory; files land under the run directory.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: Option<EvaluationReport>,
    pub fold_accuracies: Vec<f64>,
    pub manifest: RunManifest,
}

/// Full run with default options (evaluation plus CDI export).
pub fn run_pipeline(config: &PipelineConfig, out_dir: &Path) -> Result<PipelineOutput> {
    run_pipeline_with(config, out_dir, &RunOptions::default())
}

pub fn run_pipeline_with(
    config: &PipelineConfig,
    out_dir: &Path,
    opts: &RunOptions,
) -> Result<PipelineOutput> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(crate::error::io_err(out_dir))?;
    let mut manifest = RunManifest::new(config.clone());

    // Stage: dataset.
    let mut dataset = load_source(config).map_err(|e| e.in_stage("dataset", "-"))?;
    if opts.materialize.dataset {
        let dir = out_dir.join("dataset");
        crate::io::save_dataset(&dataset, &dir).map_err(|e| e.in_stage("dataset", "-"))?;
        record_tree(&mut manifest, out_dir, &dir)?;
    }
    if config.permute_labels {
        permute_labels(&mut dataset, config.seed);
    }
    if opts.stop_after == Stage::Synth {
        manifest.summary = Some(summary(&dataset, &[], 0, &[], None));
        manifest.write(out_dir)?;
        return Ok(PipelineOutput {
            report: None,
            fold_accuracies: Vec::new(),
            manifest,
        });
    }

    // Stage: features (preprocess -> render -> fuse -> pool -> augment).
    let table = compute_or_load_features(config, &dataset, out_dir, opts, &mut manifest)?;
    if opts.stop_after < Stage::Train {
        manifest.summary = Some(summary(&dataset, &table.sources, table.train.len(), &[], None));
        manifest.write(out_dir)?;
        return Ok(PipelineOutput {
            report: None,
            fold_accuracies: Vec::new(),
            manifest,
        });
    }

    // Stage: train / evaluate.
    let labels: Vec<u8> = dataset
        .sequences
        .iter()
        .map(|s| s.expression_label)
        .collect();
    let folds = kfold_split(&dataset, config.folds, config.seed)
        .map_err(|e| e.in_stage("train", "-"))?;

    // One model per source group: a single group when sources are
    // cross-domain views, one per image domain otherwise (each domain gets
    // its own scorer, as in score-fusion networks over geometrical images).
    let groups = source_groups(&table.sources);
    let n_groups = 1 + groups.iter().copied().max().unwrap_or(0) as usize;

    let mut fold_accuracies = Vec::with_capacity(folds.len());
    let mut predictions: Vec<(usize, u8)> = Vec::with_capacity(dataset.sequences.len());
    for (fold_idx, fold) in folds.iter().enumerate() {
        let mut in_train = vec![false; dataset.sequences.len()];
        for &i in &fold.train {
            in_train[i] = true;
        }
        let mut models: Vec<ClassifierModel> = Vec::with_capacity(n_groups);
        for group in 0..n_groups {
            let mut train_features = Vec::new();
            let mut train_labels = Vec::new();
            for clip in &table.train {
                if in_train[clip.seq as usize] && groups[clip.source as usize] == group as u32 {
                    train_features.push(clip.feature.clone());
                    train_labels.push(labels[clip.seq as usize]);
                }
            }
            let train_config = TrainConfig {
                learning_rate: config.classifier.learning_rate,
                epochs: config.classifier.epochs,
                l2: config.classifier.l2,
                seed: derive_seed(config.seed, (fold_idx * n_groups + group) as u64),
            };
            let model = train(&train_features, &train_labels, &train_config)
                .map_err(|e| e.in_stage("train", format!("fold {fold_idx}, group {group}")))?;
            if opts.materialize.models {
                let dir = out_dir.join("models");
                std::fs::create_dir_all(&dir).map_err(crate::error::io_err(&dir))?;
                let path = dir.join(format!("fold{fold_idx}_g{group}.model"));
                model.save(&path)?;
                manifest.record(out_dir, &path)?;
            }
            models.push(model);
        }
        if opts.stop_after == Stage::Train {
            continue;
        }

        let mut rows = Vec::with_capacity(fold.test.len());
        let mut truth = Vec::with_capacity(fold.test.len());
        for &seq_idx in &fold.test {
            // One full clip per (example, source): test-time augmentation is
            // out of scope, so each cell averages a single clip score.
            let row = table.test[seq_idx]
                .iter()
                .enumerate()
                .map(|(s, f)| Ok(vec![models[groups[s] as usize].predict_proba(f)?]))
                .collect::<Result<Vec<_>>>()
                .map_err(|e: Error| e.in_stage("eval", format!("n={seq_idx}, fold {fold_idx}")))?;
            rows.push(row);
            truth.push(labels[seq_idx]);
        }
        let tensor = ScoreTensor::from_clip_scores(table.sources.clone(), rows)
            .map_err(|e| e.in_stage("eval", format!("fold {fold_idx}")))?;
        let fold_preds = final_prediction(&collaborate(&tensor));
        fold_accuracies.push(evaluate(&fold_preds, &truth)?.accuracy);
        predictions.extend(fold.test.iter().copied().zip(fold_preds));
    }

    if opts.stop_after == Stage::Train {
        manifest.summary = Some(summary(&dataset, &table.sources, table.train.len(), &[], None));
        manifest.write(out_dir)?;
        return Ok(PipelineOutput {
            report: None,
            fold_accuracies: Vec::new(),
            manifest,
        });
    }

    predictions.sort_by_key(|&(i, _)| i);
    let ordered_preds: Vec<u8> = predictions.iter().map(|&(_, p)| p).collect();
    let report = evaluate(&ordered_preds, &labels).map_err(|e| e.in_stage("eval", "-"))?;
    let mean_accuracy =
        fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;

    // Stage: report.
    let confusion_path = out_dir.join("confusion.csv");
    report.write_confusion_csv(&confusion_path)?;
    manifest.record(out_dir, &confusion_path)?;

    let folds_path = out_dir.join("fold_accuracies.csv");
    let mut folds_csv = String::from("fold,test_sequences,accuracy\n");
    for (i, (fold, acc)) in folds.iter().zip(&fold_accuracies).enumerate() {
        folds_csv.push_str(&format!("{i},{},{acc:.6}\n", fold.test.len()));
    }
    std::fs::write(&folds_path, folds_csv).map_err(crate::error::io_err(&folds_path))?;
    manifest.record(out_dir, &folds_path)?;

    let report_path = out_dir.join("report.txt");
    std::fs::write(
        &report_path,
        render_report(config, &dataset, &table, &fold_accuracies, mean_accuracy, &report),
    )
    .map_err(crate::error::io_err(&report_path))?;
    manifest.record(out_dir, &report_path)?;

    manifest.summary = Some(summary(
        &dataset,
        &table.sources,
        table.train.len(),
        &fold_accuracies,
        Some(mean_accuracy),
    ));
    manifest.write(out_dir)?;

    Ok(PipelineOutput {
        report: Some(report),
        fold_accuracies,
        manifest,
    })
}

fn summary(
    dataset: &Dataset,
    sources: &[String],
    train_clips: usize,
    fold_accuracies: &[f64],
    mean_accuracy: Option<f64>,
) -> RunSummary {
    RunSummary {
        sequences: dataset.sequences.len(),
        sources: sources.to_vec(),
        train_clips,
        fold_accuracies: fold_accuracies.to_vec(),
        mean_accuracy,
    }
}

fn render_report(
    config: &PipelineConfig,
    dataset: &Dataset,
    table: &FeatureTable,
    fold_accuracies: &[f64],
    mean_accuracy: f64,
    report: &EvaluationReport,
) -> String {
    let mut out = String::new();
    out.push_str("4D facial expression recognition: run report\n");
    out.push_str(&format!(
        "config sha256: {}\n",
        hash_bytes(serde_json::to_string(config).unwrap_or_default().as_bytes())
    ));
    out.push_str(&format!(
        "sequences: {}  subjects: {}  folds: {}\n",
        dataset.sequences.len(),
        dataset.subject_ids().len(),
        config.folds
    ));
    out.push_str(&format!("sources: {}\n", table.sources.join(", ")));
    out.push_str(&format!("train clips: {}\n", table.train.len()));
    out.push_str("fold accuracies: ");
    out.push_str(
        &fold_accuracies
            .iter()
            .map(|a| format!("{a:.6}"))
            .collect::<Vec<_>>()
            .join(", "),
    );
    out.push('\n');
    out.push_str(&format!("mean accuracy: {mean_accuracy:.6}\n"));
    out.push_str(&format!("pooled accuracy: {:.6}\n", report.accuracy));
    out.push_str("per-class recall: ");
    out.push_str(
        &crate::mesh::EXPRESSION_NAMES
            .iter()
            .zip(&report.per_class_recall)
            .map(|(name, r)| format!("{name} {r:.6}"))
            .collect::<Vec<_>>()
            .join(", "),
    );
    out.push('\n');
    out.push_str("confusion matrix (rows = truth):\n");
    out.push_str(&report.confusion_csv());
    out
}

fn load_source(config: &PipelineConfig) -> Result<Dataset> {
    match &config.source {
        DataSource::Synthetic { spec } => crate::synthetic::generate_dataset(spec),
        DataSource::Disk { root } => crate::io::load_dataset(root),
    }
}

fn permute_labels(dataset: &mut Dataset, seed: u64) {
    let mut labels: Vec<u8> = dataset
        .sequences
        .iter()
        .map(|s| s.expression_label)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0xC0FFEE);
    labels.shuffle(&mut rng);
    for (seq, label) in dataset.sequences.iter_mut().zip(labels) {
        seq.expression_label = label;
    }
}

fn derive_seed(seed: u64, salt: u64) -> u64 {
    seed.wrapping_mul(6364136223846793005)
        .wrapping_add(salt.wrapping_mul(1442695040888963407).wrapping_add(1))
}

fn angle_tag(angle: f64) -> String {
    let sign = if angle < 0.0 { "m" } else { "p" };
    format!("{sign}{}", angle.abs().to_string().replace('.', "_"))
}

/// One training clip's feature, tagged by sequence and source.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct TrainClip {
    pub seq: u32,
    pub source: u32,
    pub feature: FeatureVector,
}

/// The cached output of the feature stage.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct FeatureTable {
    pub sources: Vec<String>,
    /// `test[seq][source]` full-clip CDI feature.
    pub test: Vec<Vec<FeatureVector>>,
    pub train: Vec<TrainClip>,
    /// Relative paths of artifacts written while computing (CDI exports).
    pub artifact_paths: Vec<String>,
}

fn feature_cache_key(config: &PipelineConfig) -> String {
    #[derive(serde::Serialize)]
    struct KeyParts<'a> {
        source: &'a DataSource,
        view_angles: &'a [f64],
        image_size: usize,
        forehead_fraction: f64,
        cd: &'a crate::features::CdParams,
        cross_domain: bool,
        augmentation: &'a Option<AugmentationPlan>,
        export_cdi: bool,
    }
    let parts = KeyParts {
        source: &config.source,
        view_angles: &config.view_angles,
        image_size: config.image_size,
        forehead_fraction: config.forehead_fraction,
        cd: &config.cd,
        cross_domain: config.cross_domain,
        augmentation: &config.augmentation,
        export_cdi: true,
    };
    hash_bytes(serde_json::to_string(&parts).unwrap_or_default().as_bytes())[..16].to_string()
}

fn compute_or_load_features(
    config: &PipelineConfig,
    dataset: &Dataset,
    out_dir: &Path,
    opts: &RunOptions,
    manifest: &mut RunManifest,
) -> Result<FeatureTable> {
    let full_stage = opts.stop_after >= Stage::Train;
    let extra_materialization = opts.materialize.preprocessed
        || opts.materialize.rendered
        || opts.materialize.clips;
    let cache_dir = out_dir.join("cache");
    let cache_path = cache_dir.join(format!("features-{}.bin", feature_cache_key(config)));

    if full_stage && !extra_materialization && cache_path.is_file() {
        if let Ok(table) = read_feature_table(&cache_path) {
            // All artifacts the cached computation produced must still exist.
            if table
                .artifact_paths
                .iter()
                .all(|p| out_dir.join(p).is_file())
            {
                eprintln!("[cache] feature stage reused: {}", cache_path.display());
                for p in &table.artifact_paths {
                    manifest.record(out_dir, &out_dir.join(p))?;
                }
                manifest.record(out_dir, &cache_path)?;
                return Ok(table);
            }
        }
    }

    let outcomes: Vec<SeqOutcome> = dataset
        .sequences
        .par_iter()
        .enumerate()
        .map(|(seq_idx, seq)| {
            process_sequence(seq, seq_idx, config, out_dir, opts).map_err(|e| {
                e.in_stage(
                    "features",
                    format!(
                        "n={seq_idx} ({}/{})",
                        seq.subject_id,
                        expression_name(seq.expression_label).unwrap_or("?")
                    ),
                )
            })
        })
        .collect::<Result<_>>()?;

    let sources = source_labels(config);
    let mut table = FeatureTable {
        sources,
        test: Vec::with_capacity(outcomes.len()),
        train: Vec::new(),
        artifact_paths: Vec::new(),
    };
    let mut provenance = Vec::new();
    for (seq_idx, outcome) in outcomes.into_iter().enumerate() {
        table.test.push(outcome.test);
        for (source, feature) in outcome.train {
            table.train.push(TrainClip {
                seq: seq_idx as u32,
                source,
                feature,
            });
        }
        table.artifact_paths.extend(outcome.artifact_paths);
        provenance.extend(outcome.provenance);
    }

    if opts.materialize.clips && opts.stop_after >= Stage::Augment {
        let dir = out_dir.join("clips");
        std::fs::create_dir_all(&dir).map_err(crate::error::io_err(&dir))?;
        let path = dir.join("clips.json");
        let doc = serde_json::json!({
            "count": provenance.len(),
            "clips": provenance,
        });
        std::fs::write(&path, format!("{:#}\n", doc)).map_err(crate::error::io_err(&path))?;
        table.artifact_paths.push("clips/clips.json".to_string());
    }

    for p in &table.artifact_paths {
        manifest.record(out_dir, &out_dir.join(p))?;
    }

    if full_stage && !extra_materialization {
        std::fs::create_dir_all(&cache_dir).map_err(crate::error::io_err(&cache_dir))?;
        write_feature_table(&table, &cache_path)?;
        manifest.record(out_dir, &cache_path)?;
    }
    Ok(table)
}

fn source_labels(config: &PipelineConfig) -> Vec<String> {
    let mut sources = Vec::new();
    for &angle in &config.view_angles {
        if config.cross_domain {
            sources.push(format!("view{}", angle_tag(angle)));
        } else {
            for domain in [Domain::Texture, Domain::Depth, Domain::EnhancedDepth] {
                sources.push(format!("view{}/{}", angle_tag(angle), domain.tag()));
            }
        }
    }
    sources
}

/// Model-group index per source: the domain suffix when present (one model
/// per image domain), a single group for plain view sources.
fn source_groups(sources: &[String]) -> Vec<u32> {
    let mut names: Vec<&str> = Vec::new();
    sources
        .iter()
        .map(|s| {
            let group = s.split_once('/').map(|(_, d)| d).unwrap_or("");
            match names.iter().position(|&n| n == group) {
                Some(i) => i as u32,
                None => {
                    names.push(group);
                    (names.len() - 1) as u32
                }
            }
        })
        .collect()
}

/// Per-sequence result of the feature stage.
struct SeqOutcome {
    /// Per source, in `source_labels` order.
    test: Vec<FeatureVector>,
    train: Vec<(u32, FeatureVector)>,
    artifact_paths: Vec<String>,
    provenance: Vec<serde_json::Value>,
}

fn process_sequence(
    seq: &ScanSequence,
    _seq_idx: usize,
    config: &PipelineConfig,
    out_dir: &Path,
    opts: &RunOptions,
) -> Result<SeqOutcome> {
    let mut outcome = SeqOutcome {
        test: Vec::new(),
        train: Vec::new(),
        artifact_paths: Vec::new(),
        provenance: Vec::new(),
    };
    let expr = expression_name(seq.expression_label).unwrap_or("unknown");
    let stem = format!("{}_{}", seq.subject_id, expr);

    // Preprocess: rotate-then-crop per view.
    let views = generate_views(seq, &config.view_angles, config.forehead_fraction)?;
    if opts.materialize.preprocessed {
        for (angle, view) in &views {
            let dir = out_dir
                .join("preprocessed")
                .join(format!("{stem}_{}", angle_tag(*angle)));
            std::fs::create_dir_all(&dir).map_err(crate::error::io_err(&dir))?;
            for (t, frame) in view.frames.iter().enumerate() {
                let path = dir.join(format!("frame_{t:04}.obj"));
                crate::io::write_obj(&frame.mesh, &path)?;
                outcome.artifact_paths.push(relative(out_dir, &path));
            }
            let lms: Vec<_> = view.frames.iter().map(|f| f.landmarks).collect();
            let path = dir.join("landmarks.txt");
            crate::io::write_landmarks(&lms, &path)?;
            outcome.artifact_paths.push(relative(out_dir, &path));
        }
    }
    if opts.stop_after == Stage::Preprocess {
        return Ok(outcome);
    }

    let k = config.image_size;

    for (angle, view) in &views {
        let tag = angle_tag(*angle);
        // Camera per view, anchored to the first frame's (rotated) landmark
        // crop region so faces land in the same raster coordinates across
        // subjects and views.
        let cam = CameraSpec::frame_face(
            &view.frames[0].landmarks,
            config.forehead_fraction,
            0.05,
        )?;
        let domains = render_domain_sequences(view, &cam, k, &config.cd)
            .map_err(|e| e.in_stage("render", format!("theta={angle}")))?;
        if opts.materialize.rendered {
            materialize_rendered(&domains, config, out_dir, &stem, &tag, &mut outcome)?;
        }
        if opts.stop_after == Stage::Render {
            continue;
        }

        if config.cross_domain {
            let cd = domains.fuse(config.cd.fusion_weights)?;
            let di = compute_dynamic_image(&cd)?;
            outcome.test.push(crate::classify::featurize(&di)?);
            if opts.materialize.cdi {
                export_cdi(&di, out_dir, &format!("{stem}_{tag}"), &mut outcome)?;
            }
            if opts.stop_after == Stage::Cdi {
                continue;
            }
            let source_idx = outcome.test.len() as u32 - 1;
            let plan = effective_plan(config, view.len());
            let clips = fused_clips(seq, &domains, *angle, &plan, config)?;
            for (prov, cd_clip) in clips {
                outcome
                    .train
                    .push((source_idx, cdi_feature(&cd_clip)?));
                if opts.materialize.clips {
                    outcome.provenance.push(provenance_json(&prov, None));
                }
            }
        } else {
            let plan = effective_plan(config, view.len());
            for (domain, img_seq) in [
                (Domain::Texture, &domains.texture),
                (Domain::Depth, &domains.depth),
                (Domain::EnhancedDepth, &domains.enhanced),
            ] {
                let di = compute_dynamic_image(img_seq)?;
                outcome.test.push(crate::classify::featurize(&di)?);
                if opts.materialize.cdi {
                    export_cdi(
                        &di,
                        out_dir,
                        &format!("{stem}_{tag}_{}", domain.tag()),
                        &mut outcome,
                    )?;
                }
                if opts.stop_after == Stage::Cdi {
                    continue;
                }
                let source_idx = outcome.test.len() as u32 - 1;
                let origin = SequenceOrigin {
                    subject_id: seq.subject_id.clone(),
                    expression_label: seq.expression_label,
                };
                let clip_set =
                    augment_dataset(&origin, &[(*angle, img_seq.clone())], &plan)?;
                for clip in clip_set.clips {
                    outcome
                        .train
                        .push((source_idx, cdi_feature(&clip.frames)?));
                    if opts.materialize.clips {
                        outcome
                            .provenance
                            .push(provenance_json(&clip.provenance, Some(domain)));
                    }
                }
            }
        }
    }
    Ok(outcome)
}

fn effective_plan(config: &PipelineConfig, t_len: usize) -> AugmentationPlan {
    config
        .augmentation
        .clone()
        .unwrap_or_else(|| AugmentationPlan::passthrough(t_len))
}

/// Augments the three domain sequences in lockstep and fuses matching clips
/// into cross-domain clips.
fn fused_clips(
    seq: &ScanSequence,
    domains: &DomainSequences,
    angle: f64,
    plan: &AugmentationPlan,
    config: &PipelineConfig,
) -> Result<Vec<(crate::augment::ClipProvenance, ImageSequence)>> {
    let origin = SequenceOrigin {
        subject_id: seq.subject_id.clone(),
        expression_label: seq.expression_label,
    };
    let tex = augment_dataset(&origin, &[(angle, domains.texture.clone())], plan)?;
    let dep = augment_dataset(&origin, &[(angle, domains.depth.clone())], plan)?;
    let edp = augment_dataset(&origin, &[(angle, domains.enhanced.clone())], plan)?;
    debug_assert_eq!(tex.len(), dep.len());
    debug_assert_eq!(tex.len(), edp.len());

    tex.clips
        .into_iter()
        .zip(dep.clips)
        .zip(edp.clips)
        .map(|((t, d), e)| {
            debug_assert_eq!(t.provenance, d.provenance);
            let cd = crate::image::fuse_sequence(
                &t.frames,
                &d.frames,
                &e.frames,
                config.cd.fusion_weights,
            )?;
            Ok((t.provenance, cd))
        })
        .collect()
}

fn provenance_json(
    prov: &crate::augment::ClipProvenance,
    domain: Option<Domain>,
) -> serde_json::Value {
    let mut value = serde_json::to_value(prov).unwrap_or_default();
    if let (Some(domain), Some(map)) = (domain, value.as_object_mut()) {
        map.insert(
            "domain".to_string(),
            serde_json::Value::String(domain.tag().to_string()),
        );
    }
    value
}

fn export_cdi(
    di: &crate::dynamic::DynamicImage,
    out_dir: &Path,
    stem: &str,
    outcome: &mut SeqOutcome,
) -> Result<()> {
    let dir = out_dir.join("cdi");
    std::fs::create_dir_all(&dir).map_err(crate::error::io_err(&dir))?;
    let png = dir.join(format!("{stem}_cdi.png"));
    normalize_for_display(di)?.save_png(&png)?;
    outcome.artifact_paths.push(relative(out_dir, &png));
    let bin = dir.join(format!("{stem}_cdi.bin"));
    write_dynamic_image(di, &bin)?;
    outcome.artifact_paths.push(relative(out_dir, &bin));
    Ok(())
}

fn materialize_rendered(
    domains: &DomainSequences,
    config: &PipelineConfig,
    out_dir: &Path,
    stem: &str,
    tag: &str,
    outcome: &mut SeqOutcome,
) -> Result<()> {
    let dir = out_dir.join("rendered");
    std::fs::create_dir_all(&dir).map_err(crate::error::io_err(&dir))?;
    let cd = domains.fuse(config.cd.fusion_weights)?;
    for (img_seq, domain) in [
        (&domains.texture, Domain::Texture),
        (&domains.depth, Domain::Depth),
        (&domains.enhanced, Domain::EnhancedDepth),
        (&cd, Domain::CrossDomain),
    ] {
        for (t, frame) in img_seq.frames().iter().enumerate() {
            let path = dir.join(format!("{stem}_{tag}_t{t:03}_{}.png", domain.tag()));
            frame.save_png(&path)?;
            outcome.artifact_paths.push(relative(out_dir, &path));
        }
    }
    Ok(())
}

fn relative(out_dir: &Path, path: &Path) -> String {
    path.strip_prefix(out_dir)
        .unwrap_or(path)
        .to_string_lossy()
        .replace('\\', "/")
}

fn record_tree(manifest: &mut RunManifest, out_dir: &Path, dir: &Path) -> Result<()> {
    let mut stack = vec![dir.to_path_buf()];
    let mut files = Vec::new();
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(crate::error::io_err(&d))? {
            let path = entry.map_err(crate::error::io_err(&d))?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.push(path);
            }
        }
    }
    files.sort();
    for f in files {
        manifest.record(out_dir, &f)?;
    }
    Ok(())
}

// Feature table binary cache format (all little-endian).

const FEATURE_MAGIC: &[u8] = b"FER4DFEAT1\n";

fn write_feature_table(table: &FeatureTable, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    out.extend_from_slice(FEATURE_MAGIC);
    push_u32(&mut out, table.sources.len() as u32);
    for s in &table.sources {
        push_str(&mut out, s);
    }
    let n_seq = table.test.len() as u32;
    let dim = table
        .test
        .first()
        .and_then(|row| row.first())
        .map(|f| f.dim())
        .unwrap_or(0) as u32;
    push_u32(&mut out, n_seq);
    push_u32(&mut out, dim);
    for row in &table.test {
        for feature in row {
            for &v in &feature.0 {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    push_u32(&mut out, table.train.len() as u32);
    for clip in &table.train {
        push_u32(&mut out, clip.seq);
        push_u32(&mut out, clip.source);
        for &v in &clip.feature.0 {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    push_u32(&mut out, table.artifact_paths.len() as u32);
    for p in &table.artifact_paths {
        push_str(&mut out, p);
    }
    std::fs::write(path, out).map_err(crate::error::io_err(path))
}

fn read_feature_table(path: &Path) -> Result<FeatureTable> {
    let bytes = std::fs::read(path).map_err(crate::error::io_err(path))?;
    let corrupt = || Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: "corrupt feature cache".into(),
    };
    if !bytes.starts_with(FEATURE_MAGIC) {
        return Err(corrupt());
    }
    let mut at = FEATURE_MAGIC.len();
    let n_sources = take_u32(&bytes, &mut at).ok_or_else(corrupt)? as usize;
    let mut sources = Vec::with_capacity(n_sources);
    for _ in 0..n_sources {
        sources.push(take_str(&bytes, &mut at).ok_or_else(corrupt)?);
    }
    let n_seq = take_u32(&bytes, &mut at).ok_or_else(corrupt)? as usize;
    let dim = take_u32(&bytes, &mut at).ok_or_else(corrupt)? as usize;
    let mut test = Vec::with_capacity(n_seq);
    for _ in 0..n_seq {
        let mut row = Vec::with_capacity(n_sources);
        for _ in 0..n_sources {
            row.push(FeatureVector(take_f64s(&bytes, &mut at, dim).ok_or_else(corrupt)?));
        }
        test.push(row);
    }
    let n_train = take_u32(&bytes, &mut at).ok_or_else(corrupt)? as usize;
    let mut train = Vec::with_capacity(n_train);
    for _ in 0..n_train {
        let seq = take_u32(&bytes, &mut at).ok_or_else(corrupt)?;
        let source = take_u32(&bytes, &mut at).ok_or_else(corrupt)?;
        let feature = FeatureVector(take_f64s(&bytes, &mut at, dim).ok_or_else(corrupt)?);
        train.push(TrainClip {
            seq,
            source,
            feature,
        });
    }
    let n_paths = take_u32(&bytes, &mut at).ok_or_else(corrupt)? as usize;
    let mut artifact_paths = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        artifact_paths.push(take_str(&bytes, &mut at).ok_or_else(corrupt)?);
    }
    Ok(FeatureTable {
        sources,
        test,
        train,
        artifact_paths,
    })
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_str(out: &mut Vec<u8>, s: &str) {
    push_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

fn take_u32(bytes: &[u8], at: &mut usize) -> Option<u32> {
    let end = *at + 4;
    let v = bytes.get(*at..end)?;
    *at = end;
    Some(u32::from_le_bytes(v.try_into().ok()?))
}

fn take_str(bytes: &[u8], at: &mut usize) -> Option<String> {
    let len = take_u32(bytes, at)? as usize;
    let end = *at + len;
    let s = String::from_utf8(bytes.get(*at..end)?.to_vec()).ok()?;
    *at = end;
    Some(s)
}

fn take_f64s(bytes: &[u8], at: &mut usize, n: usize) -> Option<Vec<f64>> {
    let end = *at + n * 8;
    let slice = bytes.get(*at..end)?;
    *at = end;
    Some(
        slice
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    )
}
