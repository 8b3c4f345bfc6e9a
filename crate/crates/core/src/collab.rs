//! Collaborative prediction and evaluation: per-source class probabilities
//! are averaged over all sources (view angles, and image domains in the
//! without-cross-domain mode), the argmax becomes the final label, and
//! accuracy/confusion statistics follow the subject-independent k-fold
//! protocol.

use crate::error::{Error, Result};
use crate::mesh::{Dataset, NUM_CLASSES};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

/// Per-example, per-source class probability scores. Sources are labeled
/// (e.g. `view+15` or `view0/dpi`) so collaboration can span views alone or
/// views crossed with domains.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTensor {
    pub sources: Vec<String>,
    /// `scores[n][s]` = probability row of example n under source s.
    pub scores: Vec<Vec<[f64; NUM_CLASSES]>>,
}

impl ScoreTensor {
    pub fn new(sources: Vec<String>, scores: Vec<Vec<[f64; NUM_CLASSES]>>) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::Domain("score tensor has no sources".into()));
        }
        for (n, row) in scores.iter().enumerate() {
            if row.len() != sources.len() {
                return Err(Error::Shape(format!(
                    "example {n} has {} source rows, expected {}",
                    row.len(),
                    sources.len()
                )));
            }
            for (s, probs) in row.iter().enumerate() {
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > 1e-6 || probs.iter().any(|&p| p < 0.0) {
                    return Err(Error::Domain(format!(
                        "example {n}, source {s}: probabilities sum to {sum}"
                    )));
                }
            }
        }
        Ok(Self { sources, scores })
    }

    pub fn num_examples(&self) -> usize {
        self.scores.len()
    }

    /// Builds the tensor from per-clip scores: when augmentation yields
    /// several clips for one (example, source) cell, their probability rows
    /// are averaged into that cell's score first.
    ///
    /// `clip_scores[n][s]` holds one row per clip; every cell needs at
    /// least one clip.
    pub fn from_clip_scores(
        sources: Vec<String>,
        clip_scores: Vec<Vec<Vec<[f64; NUM_CLASSES]>>>,
    ) -> Result<Self> {
        let scores = clip_scores
            .into_iter()
            .enumerate()
            .map(|(n, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(s, clips)| {
                        if clips.is_empty() {
                            return Err(Error::Shape(format!(
                                "example {n}, source {s}: no clip scores"
                            )));
                        }
                        let inv = 1.0 / clips.len() as f64;
                        let mut mean = [0.0; NUM_CLASSES];
                        for probs in &clips {
                            for (m, &p) in mean.iter_mut().zip(probs) {
                                *m += p * inv;
                            }
                        }
                        Ok(mean)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sources, scores)
    }
}

/// Arithmetic mean of the per-source probability rows: each output row stays
/// on the simplex.
pub fn collaborate(tensor: &ScoreTensor) -> Vec<[f64; NUM_CLASSES]> {
    let inv = 1.0 / tensor.sources.len() as f64;
    tensor
        .scores
        .iter()
        .map(|row| {
            let mut mean = [0.0; NUM_CLASSES];
            for probs in row {
                for (m, &p) in mean.iter_mut().zip(probs) {
                    *m += p * inv;
                }
            }
            mean
        })
        .collect()
}

/// Argmax over classes; ties resolve to the lowest class index. Returns
/// 1-based labels.
pub fn final_prediction(collaborated: &[[f64; NUM_CLASSES]]) -> Vec<u8> {
    collaborated
        .iter()
        .map(|row| {
            let mut best = 0usize;
            for (i, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = i;
                }
            }
            best as u8 + 1
        })
        .collect()
}

/// Accuracy, confusion counts, and per-class recall.
///
/// Confusion rows index the true class, columns the predicted class, so row
/// sums equal per-class example counts.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub accuracy: f64,
    pub confusion: [[usize; NUM_CLASSES]; NUM_CLASSES],
    pub per_class_recall: [f64; NUM_CLASSES],
}

/// Tallies predictions against ground truth.
pub fn evaluate(predictions: &[u8], truth: &[u8]) -> Result<EvaluationReport> {
    if predictions.len() != truth.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Shape("nothing to evaluate".into()));
    }
    let mut confusion = [[0usize; NUM_CLASSES]; NUM_CLASSES];
    for (&pred, &actual) in predictions.iter().zip(truth) {
        for &label in [pred, actual].iter() {
            if !(1..=NUM_CLASSES as u8).contains(&label) {
                return Err(Error::Domain(format!("label {label} not in 1..=6")));
            }
        }
        confusion[(actual - 1) as usize][(pred - 1) as usize] += 1;
    }
    let correct: usize = (0..NUM_CLASSES).map(|i| confusion[i][i]).sum();
    let mut per_class_recall = [0.0; NUM_CLASSES];
    for (i, recall) in per_class_recall.iter_mut().enumerate() {
        let total: usize = confusion[i].iter().sum();
        *recall = if total > 0 {
            confusion[i][i] as f64 / total as f64
        } else {
            0.0
        };
    }
    Ok(EvaluationReport {
        accuracy: correct as f64 / predictions.len() as f64,
        confusion,
        per_class_recall,
    })
}

impl EvaluationReport {
    /// Confusion matrix as CSV with a header row, rows = true class.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("true\\pred");
        for name in crate::mesh::EXPRESSION_NAMES {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, row) in self.confusion.iter().enumerate() {
            out.push_str(crate::mesh::EXPRESSION_NAMES[i]);
            for &count in row {
                out.push_str(&format!(",{count}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_confusion_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.confusion_csv()).map_err(crate::error::io_err(path))
    }
}

/// One train/test split over sequence indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Partitions *subjects* into k folds (seeded shuffle of the sorted subject
/// list, round-robin assignment), so no subject ever spans train and test.
/// Every sequence of a subject travels with it.
pub fn kfold_split(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::Config(format!("fold count {k} must be >= 2")));
    }
    let subjects = dataset.subject_ids();
    if subjects.len() < k {
        return Err(Error::Config(format!(
            "{} subjects cannot fill {k} folds",
            subjects.len()
        )));
    }
    let mut shuffled = subjects;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);

    let fold_of_subject: std::collections::HashMap<&str, usize> = shuffled
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i % k))
        .collect();

    let mut folds = vec![
        FoldSplit {
            train: Vec::new(),
            test: Vec::new(),
        };
        k
    ];
    for (idx, seq) in dataset.sequences.iter().enumerate() {
        let fold = fold_of_subject[seq.subject_id.as_str()];
        for (f, split) in folds.iter_mut().enumerate() {
            if f == fold {
                split.test.push(idx);
            } else {
                split.train.push(idx);
            }
        }
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{FaceMesh, LandmarkSet, ScanFrame, ScanSequence, Vertex3};
    use approx::assert_relative_eq;
    use rand::Rng;

    fn row(values: [f64; NUM_CLASSES]) -> [f64; NUM_CLASSES] {
        values
    }

    #[test]
    fn single_source_collaboration_is_identity() {
        let tensor = ScoreTensor::new(
            vec!["view0".into()],
            vec![vec![row([0.5, 0.1, 0.1, 0.1, 0.1, 0.1])]],
        )
        .unwrap();
        let out = collaborate(&tensor);
        assert_eq!(out[0], [0.5, 0.1, 0.1, 0.1, 0.1, 0.1]);
    }

    #[test]
    fn two_view_mean() {
        let tensor = ScoreTensor::new(
            vec!["view-15".into(), "view+15".into()],
            vec![vec![
                row([0.8, 0.2, 0.0, 0.0, 0.0, 0.0]),
                row([0.6, 0.4, 0.0, 0.0, 0.0, 0.0]),
            ]],
        )
        .unwrap();
        let out = collaborate(&tensor);
        assert_relative_eq!(out[0][0], 0.7, epsilon = 1e-12);
        assert_relative_eq!(out[0][1], 0.3, epsilon = 1e-12);
    }

    #[test]
    fn collaboration_is_view_order_invariant_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut rand_row = || {
            let mut r: [f64; NUM_CLASSES] = std::array::from_fn(|_| rng.gen_range(0.01..1.0));
            let sum: f64 = r.iter().sum();
            r.iter_mut().for_each(|p| *p /= sum);
            r
        };
        let (a, b, c) = (rand_row(), rand_row(), rand_row());
        let t1 = ScoreTensor::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec![vec![a, b, c]],
        )
        .unwrap();
        let t2 = ScoreTensor::new(
            vec!["z".into(), "x".into(), "y".into()],
            vec![vec![c, a, b]],
        )
        .unwrap();
        let o1 = collaborate(&t1);
        let o2 = collaborate(&t2);
        let mut sum = 0.0;
        for l in 0..NUM_CLASSES {
            assert_relative_eq!(o1[0][l], o2[0][l], epsilon = 1e-12);
            let lo = a[l].min(b[l]).min(c[l]);
            let hi = a[l].max(b[l]).max(c[l]);
            assert!(o1[0][l] >= lo - 1e-12 && o1[0][l] <= hi + 1e-12);
            sum += o1[0][l];
        }
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clip_scores_average_within_a_cell() {
        // Two clips for the single source: their rows are averaged before
        // collaboration.
        let tensor = ScoreTensor::from_clip_scores(
            vec!["view0".into()],
            vec![vec![vec![
                row([0.8, 0.2, 0.0, 0.0, 0.0, 0.0]),
                row([0.4, 0.6, 0.0, 0.0, 0.0, 0.0]),
            ]]],
        )
        .unwrap();
        assert_relative_eq!(tensor.scores[0][0][0], 0.6, epsilon = 1e-12);
        assert_relative_eq!(tensor.scores[0][0][1], 0.4, epsilon = 1e-12);
        assert!(ScoreTensor::from_clip_scores(
            vec!["view0".into()],
            vec![vec![vec![]]],
        )
        .is_err());
    }

    #[test]
    fn argmax_and_tie_rule() {
        let preds = final_prediction(&[
            row([0.1, 0.5, 0.1, 0.1, 0.1, 0.1]),
            row([0.3, 0.3, 0.1, 0.1, 0.1, 0.1]),
        ]);
        assert_eq!(preds, vec![2, 1]);
    }

    #[test]
    fn argmax_agrees_with_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let r: [f64; NUM_CLASSES] = std::array::from_fn(|_| rng.gen_range(0.0..1.0));
            let pred = final_prediction(&[r])[0];
            let mut best = 1u8;
            let mut best_val = r[0];
            for (i, &v) in r.iter().enumerate() {
                if v > best_val {
                    best_val = v;
                    best = i as u8 + 1;
                }
            }
            assert_eq!(pred, best);
        }
    }

    #[test]
    fn perfect_predictions_give_diagonal_confusion() {
        let labels: Vec<u8> = (0..12).map(|i| (i % 6) as u8 + 1).collect();
        let report = evaluate(&labels, &labels).unwrap();
        assert_relative_eq!(report.accuracy, 1.0);
        for i in 0..NUM_CLASSES {
            assert_eq!(report.confusion[i][i], 2);
            assert_relative_eq!(report.per_class_recall[i], 1.0);
        }
    }

    #[test]
    fn constant_predictor_on_uniform_truth() {
        let truth: Vec<u8> = (0..12).map(|i| (i % 6) as u8 + 1).collect();
        let preds = vec![1u8; 12];
        let report = evaluate(&preds, &truth).unwrap();
        assert_relative_eq!(report.accuracy, 1.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn hand_tallied_confusion_with_two_errors() {
        // 12 examples, two mistakes: one true-2 predicted 3, one true-5
        // predicted 1. Accuracy 10/12.
        let truth: Vec<u8> = vec![1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6];
        let mut preds = truth.clone();
        preds[2] = 3;
        preds[8] = 1;
        let report = evaluate(&preds, &truth).unwrap();
        assert_relative_eq!(report.accuracy, 10.0 / 12.0, epsilon = 1e-12);
        assert_eq!(report.confusion[1][2], 1);
        assert_eq!(report.confusion[4][0], 1);
        assert_eq!(report.confusion[1][1], 1);
        // Row sums equal per-class counts.
        for row in report.confusion {
            assert_eq!(row.iter().sum::<usize>(), 2);
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(matches!(
            evaluate(&[1, 2], &[1]).unwrap_err(),
            Error::Shape(_)
        ));
    }

    fn dataset_with_subjects(n_subjects: usize, per_subject: usize) -> Dataset {
        let mesh = FaceMesh::new(vec![Vertex3::new(0.0, 0.0, 0.0)], vec![], None).unwrap();
        let lm = LandmarkSet {
            left_face_bound: Vertex3::new(-1.0, 0.0, 0.0),
            right_face_bound: Vertex3::new(1.0, 0.0, 0.0),
            chin: Vertex3::new(0.0, -1.0, 0.0),
            nose_tip: Vertex3::new(0.0, 0.0, 1.0),
            left_eyebrow: Vertex3::new(-0.5, 0.5, 0.5),
            right_eyebrow: Vertex3::new(0.5, 0.5, 0.5),
        };
        let sequences = (0..n_subjects)
            .flat_map(|s| {
                let mesh = mesh.clone();
                (0..per_subject).map(move |e| {
                    ScanSequence::new(
                        vec![ScanFrame {
                            mesh: mesh.clone(),
                            landmarks: lm,
                        }],
                        format!("subj{s:02}"),
                        (e % 6) as u8 + 1,
                    )
                    .unwrap()
                })
            })
            .collect();
        Dataset::new(sequences)
    }

    #[test]
    fn folds_partition_subjects() {
        let ds = dataset_with_subjects(10, 6);
        let folds = kfold_split(&ds, 10, 42).unwrap();
        assert_eq!(folds.len(), 10);
        let mut seen = vec![false; ds.sequences.len()];
        for fold in &folds {
            // Each fold tests exactly one subject here.
            let test_subjects: std::collections::BTreeSet<_> = fold
                .test
                .iter()
                .map(|&i| ds.sequences[i].subject_id.clone())
                .collect();
            assert_eq!(test_subjects.len(), 1);
            let train_subjects: std::collections::BTreeSet<_> = fold
                .train
                .iter()
                .map(|&i| ds.sequences[i].subject_id.clone())
                .collect();
            assert!(test_subjects.is_disjoint(&train_subjects));
            assert_eq!(fold.train.len() + fold.test.len(), ds.sequences.len());
            for &i in &fold.test {
                assert!(!seen[i], "sequence {i} tested twice");
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn folds_deterministic_by_seed() {
        let ds = dataset_with_subjects(7, 3);
        assert_eq!(
            kfold_split(&ds, 3, 5).unwrap(),
            kfold_split(&ds, 3, 5).unwrap()
        );
        assert_ne!(
            kfold_split(&ds, 3, 5).unwrap(),
            kfold_split(&ds, 3, 6).unwrap()
        );
    }

    #[test]
    fn too_few_subjects_rejected() {
        let ds = dataset_with_subjects(3, 2);
        assert!(matches!(
            kfold_split(&ds, 4, 0).unwrap_err(),
            Error::Config(_)
        ));
    }

    #[test]
    fn confusion_csv_shape() {
        let labels: Vec<u8> = (0..6).map(|i| i as u8 + 1).collect();
        let report = evaluate(&labels, &labels).unwrap();
        let csv = report.confusion_csv();
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.starts_with("true\\pred,anger,"));
    }
}
