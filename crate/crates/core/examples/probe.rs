// Scratch measurement harness used while pinning acceptance thresholds.

use fer4d_core::pipeline::{run_pipeline, DataSource, PipelineConfig};
use fer4d_core::synthetic::{class_separation, generate_dataset, SyntheticSpec};
use std::time::Instant;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "sep".into());
    match which.as_str() {
        "sep" => {
            for noise in [0.0, 0.05, 0.1] {
                let spec = SyntheticSpec {
                    subjects: 4,
                    frames_per_clip: 16,
                    noise_sigma: noise,
                    seed: 1,
                    ..SyntheticSpec::default()
                };
                let t0 = Instant::now();
                let ds = generate_dataset(&spec).unwrap();
                let sep = class_separation(&ds).unwrap();
                println!(
                    "noise={noise}: separation={sep:.4}  ({:.1}s)",
                    t0.elapsed().as_secs_f64()
                );
            }
        }
        "e2e" => {
            let seed: u64 = std::env::args()
                .nth(2)
                .and_then(|s| s.parse().ok())
                .unwrap_or(1);
            let config = PipelineConfig {
                source: DataSource::Synthetic {
                    spec: SyntheticSpec {
                        subjects: 12,
                        frames_per_clip: 32,
                        noise_sigma: 0.02,
                        seed,
                        ..SyntheticSpec::default()
                    },
                },
                view_angles: vec![-15.0, 0.0, 15.0],
                image_size: 64,
                folds: 4,
                seed,
                ..PipelineConfig::default()
            };
            let dir = tempfile::tempdir().unwrap();
            let t0 = Instant::now();
            let out = run_pipeline(&config, dir.path()).unwrap();
            println!(
                "seed={seed}: folds={:?} mean={:.4} pooled={:.4}  ({:.1}s)",
                out.fold_accuracies,
                out.fold_accuracies.iter().sum::<f64>() / out.fold_accuracies.len() as f64,
                out.report.as_ref().unwrap().accuracy,
                t0.elapsed().as_secs_f64()
            );
        }
        "perm" => {
            let config = PipelineConfig {
                source: DataSource::Synthetic {
                    spec: SyntheticSpec {
                        subjects: 12,
                        frames_per_clip: 32,
                        noise_sigma: 0.02,
                        seed: 1,
                        ..SyntheticSpec::default()
                    },
                },
                view_angles: vec![-15.0, 0.0, 15.0],
                image_size: 64,
                folds: 4,
                seed: 1,
                permute_labels: true,
                ..PipelineConfig::default()
            };
            let dir = tempfile::tempdir().unwrap();
            let t0 = Instant::now();
            let out = run_pipeline(&config, dir.path()).unwrap();
            println!(
                "permuted: mean={:.4}  ({:.1}s)",
                out.fold_accuracies.iter().sum::<f64>() / out.fold_accuracies.len() as f64,
                t0.elapsed().as_secs_f64()
            );
        }
        "diag" => diagnose(),
        "plans" => plan_components(),
        "ablate" => {
            use fer4d_core::pipeline::{run_ablation, AblationToggles, ClassifierHyper};
            let seed: u64 = std::env::args()
                .nth(2)
                .and_then(|s| s.parse().ok())
                .unwrap_or(1);
            let noise: f64 = std::env::args()
                .nth(3)
                .and_then(|s| s.parse().ok())
                .unwrap_or(0.05);
            let config = PipelineConfig {
                source: DataSource::Synthetic {
                    spec: SyntheticSpec {
                        subjects: 6,
                        frames_per_clip: 32,
                        noise_sigma: noise,
                        seed,
                        ..SyntheticSpec::default()
                    },
                },
                view_angles: vec![0.0],
                image_size: 32,
                folds: 3,
                seed,
                classifier: ClassifierHyper {
                    learning_rate: 0.5,
                    epochs: 400,
                    l2: 1e-4,
                },
                augmentation: Some(fer4d_core::augment::AugmentationPlan {
                    include_reversal: false,
                    include_flip: true,
                    inplane_rotations_deg: vec![],
                    pass1: Some(fer4d_core::augment::WindowPass {
                        window: 32,
                        stride: 4,
                    }),
                    pass2: Some(fer4d_core::augment::WindowPass {
                        window: 24,
                        stride: 8,
                    }),
                    ..fer4d_core::augment::AugmentationPlan::default()
                }),
                ..PipelineConfig::default()
            };
            let dir = tempfile::tempdir().unwrap();
            let t0 = Instant::now();
            let outcome =
                run_ablation(&config, &AblationToggles::augmentation_sweep(), dir.path())
                    .unwrap();
            for run in &outcome.runs {
                println!(
                    "seed={seed} noise={noise} cd={} level={}: mean={:.4}",
                    run.cross_domain,
                    run.level.tag(),
                    run.mean_accuracy
                );
            }
            println!("elapsed {:.1}s", t0.elapsed().as_secs_f64());
        }
        other => eprintln!("unknown probe {other}"),
    }
}

fn plan_components() {
    use fer4d_core::augment::{AugmentationPlan, WindowPass};
    use fer4d_core::pipeline::{ClassifierHyper, run_pipeline};

    let base = |name: &str, plan: Option<AugmentationPlan>| (name.to_string(), plan);
    let full = WindowPass {
        window: 16,
        stride: 1,
    };
    let off = AugmentationPlan {
        include_original: true,
        include_magnified: false,
        include_reversal: false,
        include_flip: false,
        inplane_rotations_deg: vec![],
        pass1: Some(full),
        pass2: None,
        ..AugmentationPlan::default()
    };
    let cases = vec![
        base("none", None),
        base(
            "windows",
            Some(AugmentationPlan {
                pass1: Some(WindowPass {
                    window: 16,
                    stride: 2,
                }),
                pass2: Some(WindowPass {
                    window: 8,
                    stride: 8,
                }),
                ..off.clone()
            }),
        ),
        base(
            "flip",
            Some(AugmentationPlan {
                include_flip: true,
                ..off.clone()
            }),
        ),
        base(
            "rot10",
            Some(AugmentationPlan {
                inplane_rotations_deg: vec![-10.0, 10.0],
                ..off.clone()
            }),
        ),
        base(
            "rot6",
            Some(AugmentationPlan {
                inplane_rotations_deg: vec![-6.0, 6.0],
                ..off.clone()
            }),
        ),
        base(
            "evm",
            Some(AugmentationPlan {
                include_magnified: true,
                ..off.clone()
            }),
        ),
        base(
            "flip+rot6",
            Some(AugmentationPlan {
                include_flip: true,
                inplane_rotations_deg: vec![-6.0, 6.0],
                ..off.clone()
            }),
        ),
        base(
            "win+evm",
            Some(AugmentationPlan {
                include_magnified: true,
                pass1: Some(WindowPass {
                    window: 16,
                    stride: 2,
                }),
                pass2: Some(WindowPass {
                    window: 8,
                    stride: 8,
                }),
                ..off.clone()
            }),
        ),
        base(
            "win+flip",
            Some(AugmentationPlan {
                include_flip: true,
                pass1: Some(WindowPass {
                    window: 16,
                    stride: 2,
                }),
                pass2: Some(WindowPass {
                    window: 8,
                    stride: 8,
                }),
                ..off.clone()
            }),
        ),
        base(
            "win+flip+evm",
            Some(AugmentationPlan {
                include_flip: true,
                include_magnified: true,
                pass1: Some(WindowPass {
                    window: 16,
                    stride: 2,
                }),
                pass2: Some(WindowPass {
                    window: 8,
                    stride: 8,
                }),
                ..off.clone()
            }),
        ),
        base(
            "win+rot10",
            Some(AugmentationPlan {
                inplane_rotations_deg: vec![-10.0, 10.0],
                pass1: Some(WindowPass {
                    window: 16,
                    stride: 2,
                }),
                pass2: Some(WindowPass {
                    window: 8,
                    stride: 8,
                }),
                ..off.clone()
            }),
        ),
        base(
            "win+flip+rot10",
            Some(AugmentationPlan {
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
                ..off.clone()
            }),
        ),
        base(
            "win+flip+rot10+evm",
            Some(AugmentationPlan {
                include_flip: true,
                include_magnified: true,
                inplane_rotations_deg: vec![-10.0, 10.0],
                pass1: Some(WindowPass {
                    window: 16,
                    stride: 2,
                }),
                pass2: Some(WindowPass {
                    window: 8,
                    stride: 8,
                }),
                ..off.clone()
            }),
        ),
        base(
            "winL",
            Some(AugmentationPlan {
                pass1: Some(WindowPass {
                    window: 16,
                    stride: 2,
                }),
                pass2: Some(WindowPass {
                    window: 12,
                    stride: 4,
                }),
                ..off.clone()
            }),
        ),
        base(
            "winL+evm_lowband",
            Some(AugmentationPlan {
                include_magnified: true,
                passband_hz: (0.2, 1.5),
                pass1: Some(WindowPass {
                    window: 16,
                    stride: 2,
                }),
                pass2: Some(WindowPass {
                    window: 12,
                    stride: 4,
                }),
                ..off.clone()
            }),
        ),
        base(
            "winL+evm_a2",
            Some(AugmentationPlan {
                include_magnified: true,
                magnification_alpha: 2.0,
                pass1: Some(WindowPass {
                    window: 16,
                    stride: 2,
                }),
                pass2: Some(WindowPass {
                    window: 12,
                    stride: 4,
                }),
                ..off.clone()
            }),
        ),
        base(
            "evm_lowband",
            Some(AugmentationPlan {
                include_magnified: true,
                passband_hz: (0.2, 1.5),
                ..off.clone()
            }),
        ),
        base(
            "winL+flip",
            Some(AugmentationPlan {
                include_flip: true,
                pass1: Some(WindowPass {
                    window: 16,
                    stride: 2,
                }),
                pass2: Some(WindowPass {
                    window: 12,
                    stride: 4,
                }),
                ..off.clone()
            }),
        ),
        base(
            "winL+flip+evm_lowband",
            Some(AugmentationPlan {
                include_flip: true,
                include_magnified: true,
                passband_hz: (0.2, 1.5),
                pass1: Some(WindowPass {
                    window: 16,
                    stride: 2,
                }),
                pass2: Some(WindowPass {
                    window: 12,
                    stride: 4,
                }),
                ..off.clone()
            }),
        ),
        base(
            "winL+flip+rot10",
            Some(AugmentationPlan {
                include_flip: true,
                inplane_rotations_deg: vec![-10.0, 10.0],
                pass1: Some(WindowPass {
                    window: 16,
                    stride: 2,
                }),
                pass2: Some(WindowPass {
                    window: 12,
                    stride: 4,
                }),
                ..off.clone()
            }),
        ),
        base(
            "winL+flip+rot10+evm_lowband",
            Some(AugmentationPlan {
                include_flip: true,
                include_magnified: true,
                passband_hz: (0.2, 1.5),
                inplane_rotations_deg: vec![-10.0, 10.0],
                pass1: Some(WindowPass {
                    window: 16,
                    stride: 2,
                }),
                pass2: Some(WindowPass {
                    window: 12,
                    stride: 4,
                }),
                ..off.clone()
            }),
        ),
    ];
    for (name, plan) in cases {
        let config = PipelineConfig {
            source: DataSource::Synthetic {
                spec: SyntheticSpec {
                    subjects: 6,
                    frames_per_clip: 16,
                    noise_sigma: 0.05,
                    seed: 1,
                    ..SyntheticSpec::default()
                },
            },
            view_angles: vec![0.0],
            image_size: 32,
            folds: 3,
            seed: 1,
            cross_domain: false,
            classifier: ClassifierHyper {
                learning_rate: 0.5,
                epochs: 400,
                l2: 1e-4,
            },
            augmentation: plan,
            ..PipelineConfig::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let out = run_pipeline(&config, dir.path()).unwrap();
        let mean =
            out.fold_accuracies.iter().sum::<f64>() / out.fold_accuracies.len() as f64;
        println!("{name}: mean={mean:.4}");
    }
}

fn diagnose() {
    use fer4d_core::classify::{train, ExpressionScorer, TrainConfig};
    use fer4d_core::collab::{collaborate, evaluate, final_prediction, kfold_split, ScoreTensor};
    use fer4d_core::features::{cdi_feature, render_domain_sequences, CdParams};
    use fer4d_core::mesh::generate_views;
    use fer4d_core::render::CameraSpec;

    let spec = SyntheticSpec {
        subjects: 12,
        frames_per_clip: 32,
        noise_sigma: 0.02,
        seed: 1,
        ..SyntheticSpec::default()
    };
    let ds = generate_dataset(&spec).unwrap();
    let angles = [-15.0, 0.0, 15.0];
    let params = CdParams::default();

    let t0 = Instant::now();
    let mut features = Vec::new(); // [seq][view]
    for seq in &ds.sequences {
        let views = generate_views(seq, &angles, 1.0).unwrap();
        let cam = CameraSpec::fit_meshes(
            views.iter().flat_map(|(_, v)| v.frames.iter().map(|f| &f.mesh)),
            0.05,
        )
        .unwrap();
        let per_view: Vec<_> = views
            .iter()
            .map(|(_, v)| {
                let d = render_domain_sequences(v, &cam, 64, &params).unwrap();
                cdi_feature(&d.fuse(None).unwrap()).unwrap()
            })
            .collect();
        features.push(per_view);
    }
    println!("features in {:.1}s", t0.elapsed().as_secs_f64());
    let labels: Vec<u8> = ds.sequences.iter().map(|s| s.expression_label).collect();

    for (lr, epochs, l2) in [
        (0.5, 300, 1e-4),
        (0.5, 2000, 1e-4),
        (2.0, 2000, 1e-4),
        (5.0, 3000, 0.0),
        (2.0, 5000, 1e-5),
        (10.0, 5000, 0.0),
    ] {
        let folds = kfold_split(&ds, 4, 1).unwrap();
        let mut accs = Vec::new();
        let mut train_accs = Vec::new();
        for (fi, fold) in folds.iter().enumerate() {
            let mut tf = Vec::new();
            let mut tl = Vec::new();
            for &i in &fold.train {
                for f in &features[i] {
                    tf.push(f.clone());
                    tl.push(labels[i]);
                }
            }
            let model = train(
                &tf,
                &tl,
                &TrainConfig {
                    learning_rate: lr,
                    epochs,
                    l2,
                    seed: fi as u64,
                },
            )
            .unwrap();
            train_accs.push(model.accuracy(&tf, &tl).unwrap());
            let mut rows = Vec::new();
            let mut truth = Vec::new();
            for &i in &fold.test {
                rows.push(
                    features[i]
                        .iter()
                        .map(|f| model.predict_proba(f).unwrap())
                        .collect::<Vec<_>>(),
                );
                truth.push(labels[i]);
            }
            let tensor = ScoreTensor::new(
                angles.iter().map(|a| format!("v{a}")).collect(),
                rows,
            )
            .unwrap();
            let preds = final_prediction(&collaborate(&tensor));
            accs.push(evaluate(&preds, &truth).unwrap().accuracy);
        }
        println!(
            "lr={lr} epochs={epochs} l2={l2}: train={:.3} test={:.3} folds={:?}",
            train_accs.iter().sum::<f64>() / train_accs.len() as f64,
            accs.iter().sum::<f64>() / accs.len() as f64,
            accs
        );
    }
}
