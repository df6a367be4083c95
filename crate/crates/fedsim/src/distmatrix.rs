//! Per-client label distributions and their 2-D PCA projection.
//!
//! Row `i` of the [`LabelMatrix`] is client `i`'s empirical label
//! distribution: `p[i][k] = n_{i,k} / n_i`, the share of client `i`'s samples
//! carrying label `k`. All similarity metrics and the clustering operate on
//! these rows; the PCA projection exists to visualise them.

use crate::dataio::{ClientShard, Dataset};
use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

/// Row-sum tolerance for the stochasticity invariant.
const ROW_SUM_TOL: f64 = 1e-9;
/// Eigenvalues at or below `RANK_TOL * max(1, largest eigenvalue)` count as
/// zero when deciding whether the covariance has two positive directions.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DistError {
    #[error("client {client} owns no samples")]
    EmptyShard { client: usize },
    #[error("row {row} is not a probability vector (sum {sum})")]
    NotStochastic { row: usize, sum: f64 },
    #[error("need at least {need} clients, got {got}")]
    TooFewClients { need: usize, got: usize },
    #[error("need at least 2 classes, got {got}")]
    TooFewClasses { got: usize },
    #[error("shard references sample {index}, outside dataset of {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

/// N x K row-stochastic matrix of client label distributions.
///
/// Construction validates that every row is a probability vector: entries in
/// `[0, 1]` and rows summing to 1 within `1e-9`.
#[derive(Debug, Clone)]
pub struct LabelMatrix {
    rows: Vec<Vec<f64>>,
    classes: usize,
}

impl LabelMatrix {
    /// Validate and wrap raw rows.
    pub fn new(rows: Vec<Vec<f64>>, classes: usize) -> Result<Self, DistError> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != classes {
                return Err(DistError::NotStochastic {
                    row: i,
                    sum: f64::NAN,
                });
            }
            let sum: f64 = row.iter().sum();
            let entries_ok = row
                .iter()
                .all(|&p| p.is_finite() && (0.0..=1.0).contains(&p));
            if !entries_ok || (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(DistError::NotStochastic { row: i, sum });
            }
        }
        Ok(Self { rows, classes })
    }

    /// Number of clients (rows).
    pub fn clients(&self) -> usize {
        self.rows.len()
    }

    /// Number of classes (columns).
    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Client `i`'s label distribution.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// All rows in client order.
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Count how many of a client's samples carry each label.
pub fn label_histogram(shard: &ClientShard, data: &Dataset) -> Result<Vec<usize>, DistError> {
    if shard.is_empty() {
        return Err(DistError::EmptyShard {
            client: shard.client_id,
        });
    }
    let mut counts = vec![0usize; data.classes()];
    for &i in &shard.sample_indices {
        if i >= data.len() {
            return Err(DistError::IndexOutOfRange {
                index: i,
                len: data.len(),
            });
        }
        counts[data.label(i)] += 1;
    }
    Ok(counts)
}

/// Build the N x K label-distribution matrix for a set of client shards.
///
/// Row `i` is `label_histogram(shards[i]) / |shards[i]|`. An empty shard is
/// reported as an error naming the client.
pub fn build_distribution_matrix(
    shards: &[ClientShard],
    data: &Dataset,
) -> Result<LabelMatrix, DistError> {
    let mut rows = Vec::with_capacity(shards.len());
    for shard in shards {
        let counts = label_histogram(shard, data)?;
        let n = shard.len() as f64;
        rows.push(counts.into_iter().map(|c| c as f64 / n).collect());
    }
    LabelMatrix::new(rows, data.classes())
}

/// A 2-D PCA projection of the label matrix rows.
#[derive(Debug, Clone)]
pub struct PcaProjection {
    /// One `(first component, second component)` pair per client.
    pub points: Vec<[f64; 2]>,
    /// Set when the centred rows span fewer than two directions; the second
    /// coordinate is then exactly zero for every point.
    pub rank_deficient: bool,
}

/// Project the rows of `matrix` onto their top two principal components.
///
/// Components are the leading eigenvectors of the K x K sample covariance of
/// the centred rows (divisor N-1). Each component's sign is fixed so its
/// largest-magnitude loading is positive, making the projection
/// deterministic. Requires at least 3 clients and 2 classes. When fewer than
/// two eigenvalues are positive (degenerate geometry, e.g. all rows on one
/// line), the missing coordinates are zeroed and `rank_deficient` is set.
pub fn pca_project(matrix: &LabelMatrix) -> Result<PcaProjection, DistError> {
    let n = matrix.clients();
    let k = matrix.classes();
    if n < 3 {
        return Err(DistError::TooFewClients { need: 3, got: n });
    }
    if k < 2 {
        return Err(DistError::TooFewClasses { got: k });
    }

    let mut col_mean = vec![0.0f64; k];
    for row in matrix.rows() {
        for (m, &v) in col_mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut col_mean {
        *m /= n as f64;
    }

    let centred = DMatrix::from_fn(n, k, |i, j| matrix.row(i)[j] - col_mean[j]);
    let cov = centred.transpose() * &centred / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    // Order eigenpairs by eigenvalue, largest first; ties keep smaller
    // original index for determinism.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    let lambda_max = eig.eigenvalues[order[0]].max(0.0);
    let tol = RANK_TOL * lambda_max.max(1.0);
    let mut axes: Vec<Option<Vec<f64>>> = Vec::with_capacity(2);
    for &oi in order.iter().take(2) {
        if eig.eigenvalues[oi] > tol {
            let mut v: Vec<f64> = eig.eigenvectors.column(oi).iter().copied().collect();
            orient(&mut v);
            axes.push(Some(v));
        } else {
            axes.push(None);
        }
    }
    let rank_deficient = axes.iter().any(|a| a.is_none());

    let points = (0..n)
        .map(|i| {
            let mut p = [0.0f64; 2];
            for (c, axis) in axes.iter().enumerate() {
                if let Some(v) = axis {
                    p[c] = (0..k).map(|j| centred[(i, j)] * v[j]).sum();
                }
            }
            p
        })
        .collect();

    Ok(PcaProjection {
        points,
        rank_deficient,
    })
}

/// Flip `v` so its largest-magnitude entry (lowest index on ties) is positive.
fn orient(v: &mut [f64]) {
    let mut lead = 0;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > v[lead].abs() {
            lead = i;
        }
    }
    if v[lead] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}
