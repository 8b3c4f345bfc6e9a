//! Pluggable expression scoring over dynamic images.
//!
//! The shipped baseline is a deterministic six-way multinomial logistic
//! model trained by full-batch gradient descent. It stands behind the
//! [`ExpressionScorer`] trait so a stronger backbone can replace it without
//! touching the fusion stages.

use crate::dynamic::{normalize_for_display, DynamicImage};
use crate::error::{Error, Result};
use crate::image::area_downsample;
use crate::mesh::NUM_CLASSES;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{Read, Write};
use std::path::Path;

/// Side length of the downsampled feature raster (d = 28 * 28 = 784).
pub const FEATURE_SIDE: usize = 28;

/// A fixed-dimension real feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Anything that scores a feature vector over the six classes.
pub trait ExpressionScorer {
    fn predict_proba(&self, feature: &FeatureVector) -> Result<[f64; NUM_CLASSES]>;
}

/// Display-normalizes a dynamic image, area-downsamples it to
/// [`FEATURE_SIDE`] squared, and flattens row-major.
pub fn featurize(di: &DynamicImage) -> Result<FeatureVector> {
    let normalized = normalize_for_display(di)?;
    Ok(FeatureVector(area_downsample(
        normalized.pixels(),
        normalized.size(),
        FEATURE_SIDE,
    )))
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            epochs: 300,
            l2: 1e-4,
            seed: 7,
        }
    }
}

/// Trained six-way linear softmax model.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    /// Row-major `NUM_CLASSES x dim` weights.
    weights: Vec<f64>,
    biases: [f64; NUM_CLASSES],
    dim: usize,
    pub config: TrainConfig,
    pub loss_trace: Vec<f64>,
}

fn softmax(logits: &[f64; NUM_CLASSES]) -> [f64; NUM_CLASSES] {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; NUM_CLASSES];
    let mut sum = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
    out
}

/// Softmax cross-entropy plus L2 (on weights only), with its analytic
/// gradient. Exposed so the gradient can be checked against finite
/// differences.
pub fn loss_and_gradient(
    weights: &[f64],
    biases: &[f64; NUM_CLASSES],
    features: &[FeatureVector],
    labels: &[u8],
    l2: f64,
) -> (f64, Vec<f64>, [f64; NUM_CLASSES]) {
    let n = features.len();
    let dim = weights.len() / NUM_CLASSES;
    let inv_n = 1.0 / n as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = [0.0; NUM_CLASSES];

    for (x, &label) in features.iter().zip(labels) {
        let mut logits = [0.0; NUM_CLASSES];
        for (c, logit) in logits.iter_mut().enumerate() {
            let row = &weights[c * dim..(c + 1) * dim];
            *logit = biases[c]
                + row
                    .iter()
                    .zip(&x.0)
                    .map(|(&w, &v)| w * v)
                    .sum::<f64>();
        }
        let probs = softmax(&logits);
        let y = (label - 1) as usize;
        loss -= probs[y].max(f64::MIN_POSITIVE).ln() * inv_n;
        for c in 0..NUM_CLASSES {
            let delta = (probs[c] - if c == y { 1.0 } else { 0.0 }) * inv_n;
            grad_b[c] += delta;
            let row = &mut grad_w[c * dim..(c + 1) * dim];
            for (g, &v) in row.iter_mut().zip(&x.0) {
                *g += delta * v;
            }
        }
    }

    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g += l2 * w;
    }
    loss += 0.5 * l2 * weights.iter().map(|&w| w * w).sum::<f64>();
    (loss, grad_w, grad_b)
}

/// Full-batch gradient descent on softmax cross-entropy with L2.
///
/// All six classes must be present in the labels; training is deterministic
/// for a fixed seed.
pub fn train(
    features: &[FeatureVector],
    labels: &[u8],
    config: &TrainConfig,
) -> Result<ClassifierModel> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} features for {} labels",
            features.len(),
            labels.len()
        )));
    }
    let dim = features[0].dim();
    for (i, f) in features.iter().enumerate() {
        if f.dim() != dim {
            return Err(Error::Shape(format!(
                "feature {i} has dim {}, expected {dim}",
                f.dim()
            )));
        }
    }
    for &label in labels {
        if !(1..=NUM_CLASSES as u8).contains(&label) {
            return Err(Error::Domain(format!("label {label} not in 1..=6")));
        }
    }
    for class in 1..=NUM_CLASSES as u8 {
        if !labels.contains(&class) {
            return Err(Error::MissingClass(class));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut weights: Vec<f64> = (0..NUM_CLASSES * dim)
        .map(|_| rng.gen_range(-0.01..0.01))
        .collect();
    let mut biases = [0.0; NUM_CLASSES];
    let mut loss_trace = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        let (loss, grad_w, grad_b) =
            loss_and_gradient(&weights, &biases, features, labels, config.l2);
        loss_trace.push(loss);
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= config.learning_rate * g;
        }
        for (b, g) in biases.iter_mut().zip(&grad_b) {
            *b -= config.learning_rate * g;
        }
    }

    Ok(ClassifierModel {
        weights,
        biases,
        dim,
        config: *config,
        loss_trace,
    })
}

impl ClassifierModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Fraction of examples whose argmax score matches the label.
    pub fn accuracy(&self, features: &[FeatureVector], labels: &[u8]) -> Result<f64> {
        let mut correct = 0usize;
        for (f, &label) in features.iter().zip(labels) {
            let probs = self.predict_proba(f)?;
            let pred = probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i as u8 + 1)
                .unwrap();
            if pred == label {
                correct += 1;
            }
        }
        Ok(correct as f64 / features.len() as f64)
    }

    /// Writes the checkpoint: a text header (version field first) followed
    /// by little-endian f64 weights then biases.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        out.extend_from_slice(
            format!(
                "fer4d-model v1\nclasses {NUM_CLASSES}\ndim {}\nseed {}\nepochs {}\nlearning_rate {:?}\nl2 {:?}\nfinal_loss {:?}\ndata f64le\n",
                self.dim,
                self.config.seed,
                self.config.epochs,
                self.config.learning_rate,
                self.config.l2,
                self.loss_trace.last().copied().unwrap_or(f64::NAN),
            )
            .as_bytes(),
        );
        for &w in &self.weights {
            out.extend_from_slice(&w.to_le_bytes());
        }
        for &b in &self.biases {
            out.extend_from_slice(&b.to_le_bytes());
        }
        let mut file = std::fs::File::create(path).map_err(crate::error::io_err(path))?;
        file.write_all(&out).map_err(crate::error::io_err(path))?;
        Ok(())
    }

    /// Reads a checkpoint written by [`ClassifierModel::save`].
    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .map_err(crate::error::io_err(path))?
            .read_to_end(&mut bytes)
            .map_err(crate::error::io_err(path))?;
        let header_end = find_header_end(&bytes).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "missing `data f64le` header terminator".into(),
        })?;
        let header = String::from_utf8_lossy(&bytes[..header_end]);
        let mut lines = header.lines();
        let magic = lines.next().unwrap_or_default();
        if magic != "fer4d-model v1" {
            return Err(Error::UnsupportedFormat(format!(
                "model header `{magic}` (expected `fer4d-model v1`)"
            )));
        }
        let mut dim = 0usize;
        let mut config = TrainConfig {
            learning_rate: 0.0,
            epochs: 0,
            l2: 0.0,
            seed: 0,
        };
        for line in lines {
            let mut words = line.split_whitespace();
            match (words.next(), words.next()) {
                (Some("dim"), Some(v)) => dim = v.parse().unwrap_or(0),
                (Some("seed"), Some(v)) => config.seed = v.parse().unwrap_or(0),
                (Some("epochs"), Some(v)) => config.epochs = v.parse().unwrap_or(0),
                (Some("learning_rate"), Some(v)) => {
                    config.learning_rate = v.parse().unwrap_or(0.0)
                }
                (Some("l2"), Some(v)) => config.l2 = v.parse().unwrap_or(0.0),
                _ => {}
            }
        }
        let expected = header_end + (NUM_CLASSES * dim + NUM_CLASSES) * 8;
        if dim == 0 || bytes.len() != expected {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: format!(
                    "expected {expected} bytes for dim {dim}, found {}",
                    bytes.len()
                ),
            });
        }
        let mut values = bytes[header_end..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let weights: Vec<f64> = values.by_ref().take(NUM_CLASSES * dim).collect();
        let mut biases = [0.0; NUM_CLASSES];
        for b in biases.iter_mut() {
            *b = values.next().unwrap();
        }
        Ok(ClassifierModel {
            weights,
            biases,
            dim,
            config,
            loss_trace: Vec::new(),
        })
    }
}

fn find_header_end(bytes: &[u8]) -> Option<usize> {
    let marker = b"data f64le\n";
    bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .map(|p| p + marker.len())
}

impl ExpressionScorer for ClassifierModel {
    fn predict_proba(&self, feature: &FeatureVector) -> Result<[f64; NUM_CLASSES]> {
        if feature.dim() != self.dim {
            return Err(Error::Shape(format!(
                "feature dim {} does not match model dim {}",
                feature.dim(),
                self.dim
            )));
        }
        let mut logits = [0.0; NUM_CLASSES];
        for (c, logit) in logits.iter_mut().enumerate() {
            let row = &self.weights[c * self.dim..(c + 1) * self.dim];
            *logit = self.biases[c]
                + row
                    .iter()
                    .zip(&feature.0)
                    .map(|(&w, &v)| w * v)
                    .sum::<f64>();
        }
        Ok(softmax(&logits))
    }
}
