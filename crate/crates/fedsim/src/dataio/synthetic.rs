//! Synthetic dataset generation: one isotropic Gaussian cluster per class.

use super::{DataError, Dataset};
use crate::stream::{self, tag};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Bounding box for class means, per coordinate.
const MEAN_RANGE: f64 = 2.0;
/// Minimum pairwise distance between class means that rejection sampling
/// aims for; after `MEAN_ATTEMPTS` candidates the best-separated one wins.
const MEAN_SEPARATION: f64 = 1.0;
const MEAN_ATTEMPTS: usize = 200;

/// Generate a synthetic dataset of `classes` Gaussian clusters in
/// `features`-dimensional space, `samples_per_class` points each.
///
/// Class means are drawn uniformly from `[-2, 2]^F` and rejection-sampled to
/// keep them at least one unit apart (falling back to the best-separated
/// candidate when the box gets crowded). Each sample is
/// `mean + spread * z`, `z` standard normal, so `spread = 0` places every
/// sample exactly on its class mean. Means and noise come from separate
/// streams derived from `seed`; equal arguments reproduce the dataset
/// bit-for-bit.
pub fn generate_synthetic(
    classes: usize,
    features: usize,
    samples_per_class: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset, DataError> {
    if classes < 2 {
        return Err(DataError::InvalidParam(format!(
            "need at least 2 classes, got {classes}"
        )));
    }
    if features == 0 {
        return Err(DataError::InvalidParam("features must be >= 1".into()));
    }
    if samples_per_class == 0 {
        return Err(DataError::InvalidParam(
            "samples_per_class must be >= 1".into(),
        ));
    }
    if !(spread.is_finite() && spread >= 0.0) {
        return Err(DataError::InvalidParam(format!(
            "spread must be finite and >= 0, got {spread}"
        )));
    }

    let means = draw_means(classes, features, seed);

    let mut rng = stream::derive(seed, &[tag::SYNTH_SAMPLES]);
    let mut feat = Vec::with_capacity(classes * samples_per_class * features);
    let mut labels = Vec::with_capacity(classes * samples_per_class);
    for (k, mean) in means.iter().enumerate() {
        for _ in 0..samples_per_class {
            for &m in mean {
                let z: f64 = StandardNormal.sample(&mut rng);
                feat.push(m + spread * z);
            }
            labels.push(k);
        }
    }
    Dataset::new(feat, labels, classes, features)
}

/// Draw `classes` well-separated means in `[-MEAN_RANGE, MEAN_RANGE]^features`.
fn draw_means(classes: usize, features: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream::derive(seed, &[tag::SYNTH_MEANS]);
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(classes);
    for _ in 0..classes {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..MEAN_ATTEMPTS {
            let cand: Vec<f64> = (0..features)
                .map(|_| rng.random_range(-MEAN_RANGE..MEAN_RANGE))
                .collect();
            let sep = means
                .iter()
                .map(|m| dist(m, &cand))
                .fold(f64::INFINITY, f64::min);
            if sep >= MEAN_SEPARATION {
                best = Some((sep, cand));
                break;
            }
            if best.as_ref().is_none_or(|(s, _)| sep > *s) {
                best = Some((sep, cand));
            }
        }
        means.push(best.expect("at least one candidate drawn").1);
    }
    means
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
