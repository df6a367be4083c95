//! Datasets, client shards, and the ways of producing them: IDX files on
//! disk, synthetic Gaussian-cluster generation, and Dirichlet label-skew
//! partitioning across clients.

mod idx;
mod partition;
mod synthetic;

pub use idx::load_idx;
pub use partition::partition_dirichlet;
pub use synthetic::generate_synthetic;

use crate::stream::{self, tag};
use rand::seq::SliceRandom;
use thiserror::Error;

/// Errors from loading, generating, validating, or partitioning datasets.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: bad magic number {found} (expected {expected})")]
    BadMagic {
        path: String,
        expected: u32,
        found: u32,
    },
    #[error("{path}: truncated file, needed {needed} bytes but found {found}")]
    Truncated {
        path: String,
        needed: usize,
        found: usize,
    },
    #[error("image/label count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("partition failed: {0}")]
    PartitionFailed(String),
}

/// A labelled dataset held in memory.
///
/// Features are stored flat, `feature_dim` values per sample. Construction
/// validates that features and labels agree in length, that the dataset is
/// non-empty, that every label lies in `0..classes`, and that every class in
/// `0..classes` occurs at least once.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    classes: usize,
    feature_dim: usize,
}

impl Dataset {
    /// Build a dataset from flat feature storage, validating all invariants.
    pub fn new(
        features: Vec<f64>,
        labels: Vec<usize>,
        classes: usize,
        feature_dim: usize,
    ) -> Result<Self, DataError> {
        if classes < 2 {
            return Err(DataError::InvalidDataset(format!(
                "need at least 2 classes, got {classes}"
            )));
        }
        if feature_dim == 0 {
            return Err(DataError::InvalidDataset("feature_dim must be >= 1".into()));
        }
        if labels.is_empty() {
            return Err(DataError::InvalidDataset("dataset is empty".into()));
        }
        if features.len() != labels.len() * feature_dim {
            return Err(DataError::InvalidDataset(format!(
                "feature storage holds {} values, expected {} ({} samples x {} dims)",
                features.len(),
                labels.len() * feature_dim,
                labels.len(),
                feature_dim
            )));
        }
        let mut seen = vec![false; classes];
        for (i, &y) in labels.iter().enumerate() {
            if y >= classes {
                return Err(DataError::InvalidDataset(format!(
                    "sample {i} has label {y}, outside 0..{classes}"
                )));
            }
            seen[y] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(DataError::InvalidDataset(format!(
                "class {missing} has no samples"
            )));
        }
        if let Some(bad) = features.iter().position(|v| !v.is_finite()) {
            return Err(DataError::InvalidDataset(format!(
                "feature value at flat index {bad} is not finite"
            )));
        }
        Ok(Self {
            features,
            labels,
            classes,
            feature_dim,
        })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// True when the dataset holds no samples (never, post-construction).
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of classes `K`.
    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Number of feature dimensions `F`.
    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// Feature vector of sample `i`.
    pub fn feature(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_dim..(i + 1) * self.feature_dim]
    }

    /// Label of sample `i`.
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// All labels, in sample order.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

/// The samples owned by one simulated client: indices into a shared
/// [`Dataset`], always non-empty and sorted ascending.
#[derive(Debug, Clone)]
pub struct ClientShard {
    pub client_id: usize,
    pub sample_indices: Vec<usize>,
}

impl ClientShard {
    /// Number of samples held by this client.
    pub fn len(&self) -> usize {
        self.sample_indices.len()
    }

    /// True when the shard holds no samples (never, post-partition).
    pub fn is_empty(&self) -> bool {
        self.sample_indices.is_empty()
    }
}

/// Split a dataset into disjoint train and test sets, stratified by class so
/// both sides keep every class represented.
///
/// `test_fraction` must lie in (0, 1); each class contributes
/// `max(1, round(test_fraction * class_size))` samples to the test side,
/// capped so at least one sample per class stays on the train side. Shuffling
/// is driven by `derive(seed, [SPLIT, class])`, so the split depends only on
/// `(dataset, test_fraction, seed)`.
pub fn split_train_test(
    data: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), DataError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::InvalidParam(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); data.classes()];
    for i in 0..data.len() {
        by_class[data.label(i)].push(i);
    }
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (k, mut members) in by_class.into_iter().enumerate() {
        if members.len() < 2 {
            return Err(DataError::InvalidParam(format!(
                "class {k} has {} sample(s); need at least 2 to split",
                members.len()
            )));
        }
        let mut rng = stream::derive(seed, &[tag::SPLIT, k as u64]);
        members.shuffle(&mut rng);
        let want = (test_fraction * members.len() as f64).round() as usize;
        let n_test = want.clamp(1, members.len() - 1);
        test_idx.extend_from_slice(&members[..n_test]);
        train_idx.extend_from_slice(&members[n_test..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((subset(data, &train_idx), subset(data, &test_idx)))
}

fn subset(data: &Dataset, indices: &[usize]) -> Dataset {
    let mut features = Vec::with_capacity(indices.len() * data.feature_dim());
    let mut labels = Vec::with_capacity(indices.len());
    for &i in indices {
        features.extend_from_slice(data.feature(i));
        labels.push(data.label(i));
    }
    // Safe to bypass `new`: a stratified subset of a valid dataset keeps
    // every class, and the other invariants are preserved by construction.
    Dataset {
        features,
        labels,
        classes: data.classes(),
        feature_dim: data.feature_dim(),
    }
}
