//! Dissimilarity metrics between client label distributions, and the
//! pairwise matrix the clustering consumes.
//!
//! All metrics operate on probability vectors (entries nonnegative, summing
//! to one) and return a nonnegative dissimilarity: 0 means identical. The
//! `random` identifier is not a metric at all — it names the uniform
//! random-selection baseline and is rejected by [`compute_metric`].

use crate::distmatrix::LabelMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Smoothing constant for the symmetrised KL divergence: distributions are
/// mixed with `eps` mass so zero entries never hit `log(0)`.
pub const KL_EPS: f64 = 1e-12;
/// Tolerance on probability-vector row sums.
const PROB_SUM_TOL: f64 = 1e-9;

/// Identifier for a dissimilarity metric or the random-selection baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricId {
    Cosine,
    Mse,
    Euclidean,
    Manhattan,
    Chebyshev,
    Mmd,
    Kl,
    Jsd,
    Wasserstein1,
    /// Uniform random client selection; not computable as a distance.
    Random,
}

/// Every identifier, including `random`.
pub const ALL_IDS: [MetricId; 10] = [
    MetricId::Cosine,
    MetricId::Mse,
    MetricId::Euclidean,
    MetricId::Manhattan,
    MetricId::Chebyshev,
    MetricId::Mmd,
    MetricId::Kl,
    MetricId::Jsd,
    MetricId::Wasserstein1,
    MetricId::Random,
];

/// The nine computable metrics, in canonical order.
pub const COMPUTABLE: [MetricId; 9] = [
    MetricId::Cosine,
    MetricId::Mse,
    MetricId::Euclidean,
    MetricId::Manhattan,
    MetricId::Chebyshev,
    MetricId::Mmd,
    MetricId::Kl,
    MetricId::Jsd,
    MetricId::Wasserstein1,
];

impl MetricId {
    /// Canonical lowercase name, also used in CLI flags and CSV columns.
    pub fn name(&self) -> &'static str {
        match self {
            MetricId::Cosine => "cosine",
            MetricId::Mse => "mse",
            MetricId::Euclidean => "euclidean",
            MetricId::Manhattan => "manhattan",
            MetricId::Chebyshev => "chebyshev",
            MetricId::Mmd => "mmd",
            MetricId::Kl => "kl",
            MetricId::Jsd => "jsd",
            MetricId::Wasserstein1 => "wasserstein1",
            MetricId::Random => "random",
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricId {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_IDS
            .iter()
            .find(|m| m.name() == s)
            .copied()
            .ok_or_else(|| MetricError::UnknownMetric(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("unknown metric name {0:?}")]
    UnknownMetric(String),
    #[error("'random' is a selection baseline, not a computable metric")]
    NotComputable,
    #[error("vector lengths differ: {p} vs {q}")]
    LengthMismatch { p: usize, q: usize },
    #[error("vectors must have at least 2 entries, got {0}")]
    TooShort(usize),
    #[error("{which} vector is not a probability distribution (sum {sum})")]
    NotProbability { which: &'static str, sum: f64 },
    #[error("need at least {need} clients for a dissimilarity matrix, got {got}")]
    TooFewClients { need: usize, got: usize },
    #[error("invalid matrix entry at ({i}, {j}): {value}")]
    InvalidEntry { i: usize, j: usize, value: f64 },
    #[error("matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("matrix rows are ragged or not square")]
    NotSquare,
    #[error("scale factor must be finite and > 0, got {0}")]
    BadScale(f64),
}

/// Compute `metric` between probability vectors `p` and `q`.
///
/// Definitions (all on vectors of length `K`, `diff = p - q`):
///
/// * `cosine`: `1 - p.q / (|p| |q|)`, clamped into `[0, 1]`
/// * `mse`: `(1/K) * sum(diff^2)`
/// * `euclidean`: `sqrt(sum(diff^2))`
/// * `manhattan`: `sum(|diff|)`
/// * `chebyshev`: `max(|diff|)`
/// * `mmd`: squared maximum mean discrepancy under the linear kernel, which
///   reduces to `sum(diff^2)` — exactly `K *` the `mse` value
/// * `kl`: symmetrised, smoothed Kullback-Leibler divergence
///   `(D(p~ || q~) + D(q~ || p~)) / 2` with `x~ = (x + eps) / (1 + K*eps)`
/// * `jsd`: Jensen-Shannon divergence to the midpoint `u = (p+q)/2`, natural
///   log, with the `0 * log 0 = 0` convention; bounded by `ln 2`
/// * `wasserstein1`: 1-Wasserstein distance on the ordered label line,
///   `sum_k |CDF_p(k) - CDF_q(k)|` over `k = 0..K-2`
///
/// `random` is rejected with [`MetricError::NotComputable`].
pub fn compute_metric(metric: MetricId, p: &[f64], q: &[f64]) -> Result<f64, MetricError> {
    if metric == MetricId::Random {
        return Err(MetricError::NotComputable);
    }
    if p.len() != q.len() {
        return Err(MetricError::LengthMismatch {
            p: p.len(),
            q: q.len(),
        });
    }
    if p.len() < 2 {
        return Err(MetricError::TooShort(p.len()));
    }
    check_probability(p, "first")?;
    check_probability(q, "second")?;

    let k = p.len() as f64;
    let value = match metric {
        MetricId::Cosine => {
            let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
            let np: f64 = p.iter().map(|a| a * a).sum::<f64>().sqrt();
            let nq: f64 = q.iter().map(|b| b * b).sum::<f64>().sqrt();
            (1.0 - (dot / (np * nq)).clamp(-1.0, 1.0)).max(0.0)
        }
        MetricId::Mse => squared_l2(p, q) / k,
        MetricId::Euclidean => squared_l2(p, q).sqrt(),
        MetricId::Manhattan => p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum(),
        MetricId::Chebyshev => p
            .iter()
            .zip(q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
        MetricId::Mmd => squared_l2(p, q),
        MetricId::Kl => {
            let denom = 1.0 + k * KL_EPS;
            let mut forward = 0.0;
            let mut backward = 0.0;
            for (&a, &b) in p.iter().zip(q) {
                let pa = (a + KL_EPS) / denom;
                let qb = (b + KL_EPS) / denom;
                forward += pa * (pa / qb).ln();
                backward += qb * (qb / pa).ln();
            }
            (0.5 * (forward + backward)).max(0.0)
        }
        MetricId::Jsd => {
            let mut total = 0.0;
            for (&a, &b) in p.iter().zip(q) {
                let u = 0.5 * (a + b);
                // Sum the two directional terms before accumulating so the
                // result is bitwise identical when the arguments swap
                // (addition commutes; sequential `+=` does not).
                let left = if a > 0.0 { 0.5 * a * (a / u).ln() } else { 0.0 };
                let right = if b > 0.0 { 0.5 * b * (b / u).ln() } else { 0.0 };
                total += left + right;
            }
            total.max(0.0)
        }
        MetricId::Wasserstein1 => {
            let mut cdf_gap = 0.0;
            let mut total = 0.0;
            for (&a, &b) in p.iter().zip(q).take(p.len() - 1) {
                cdf_gap += a - b;
                total += cdf_gap.abs();
            }
            total
        }
        MetricId::Random => unreachable!("rejected above"),
    };
    Ok(value)
}

fn squared_l2(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn check_probability(v: &[f64], which: &'static str) -> Result<(), MetricError> {
    let sum: f64 = v.iter().sum();
    let ok = v.iter().all(|&x| x.is_finite() && x >= 0.0) && (sum - 1.0).abs() <= PROB_SUM_TOL;
    if ok {
        Ok(())
    } else {
        Err(MetricError::NotProbability { which, sum })
    }
}

/// Symmetric N x N matrix of pairwise dissimilarities with a zero diagonal.
///
/// Stored flat, row-major. Constructed values are validated to be finite and
/// nonnegative; symmetry holds by construction in [`pairwise_dissimilarity`]
/// and is checked in [`DissimilarityMatrix::from_rows`].
#[derive(Debug, Clone)]
pub struct DissimilarityMatrix {
    n: usize,
    metric: MetricId,
    data: Vec<f64>,
}

impl DissimilarityMatrix {
    /// Wrap an explicit square matrix, validating all invariants: square
    /// shape, exact symmetry, zero diagonal, finite nonnegative entries.
    pub fn from_rows(rows: Vec<Vec<f64>>, metric: MetricId) -> Result<Self, MetricError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(MetricError::NotSquare);
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 || (i == j && v != 0.0) {
                    return Err(MetricError::InvalidEntry { i, j, value: v });
                }
                if rows[j][i] != v {
                    return Err(MetricError::NotSymmetric { i, j });
                }
            }
        }
        let data = rows.into_iter().flatten().collect();
        Ok(Self { n, metric, data })
    }

    /// Number of clients.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Which metric produced the matrix.
    pub fn metric(&self) -> MetricId {
        self.metric
    }

    /// Dissimilarity between clients `i` and `j`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// A copy with every entry multiplied by `lambda > 0`. Rankings of sums
    /// of entries are preserved, so clustering results are unchanged.
    pub fn scale(&self, lambda: f64) -> Result<Self, MetricError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(MetricError::BadScale(lambda));
        }
        Ok(Self {
            n: self.n,
            metric: self.metric,
            data: self.data.iter().map(|&v| v * lambda).collect(),
        })
    }
}

/// Compute the pairwise dissimilarity matrix over all client rows of `m`.
///
/// The upper triangle is computed once and mirrored, so symmetry and the
/// zero diagonal hold exactly. Requires at least 3 clients (fewer cannot be
/// clustered into 2..=N-1 groups).
pub fn pairwise_dissimilarity(
    m: &LabelMatrix,
    metric: MetricId,
) -> Result<DissimilarityMatrix, MetricError> {
    let n = m.clients();
    if n < 3 {
        return Err(MetricError::TooFewClients { need: 3, got: n });
    }
    let mut data = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = compute_metric(metric, m.row(i), m.row(j))?;
            if !d.is_finite() || d < 0.0 {
                return Err(MetricError::InvalidEntry { i, j, value: d });
            }
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    Ok(DissimilarityMatrix { n, metric, data })
}

/// Compute the dissimilarity matrix used for *clustering decisions* under
/// `metric`.
///
/// Metrics that are exact positive multiples of one another — `mse` is
/// `mmd / K` entry for entry — rank every candidate clustering identically
/// in exact arithmetic, so they must produce the same medoids, assignments,
/// and cluster count. Dividing each entry by K before summing, however,
/// rounds each entry independently, and a k-medoids or silhouette
/// comparison that is decided by less than an ulp can then break
/// differently for the two matrices. To keep such sibling metrics
/// bit-identical through the whole decision pipeline, they all cluster on
/// one shared representative: the unscaled squared-L2 form. Reported metric
/// *values* (from [`compute_metric`] or [`pairwise_dissimilarity`]) are
/// unaffected.
pub fn clustering_dissimilarity(
    m: &LabelMatrix,
    metric: MetricId,
) -> Result<DissimilarityMatrix, MetricError> {
    let representative = match metric {
        MetricId::Mse => MetricId::Mmd,
        other => other,
    };
    let mut d = pairwise_dissimilarity(m, representative)?;
    d.metric = metric;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LN_2: f64 = std::f64::consts::LN_2;

    fn m(metric: MetricId, p: &[f64], q: &[f64]) -> f64 {
        compute_metric(metric, p, q).unwrap()
    }

    // -- frozen single-pair values ------------------------------------------

    #[test]
    fn euclidean_of_disjoint_two_class_vectors_is_sqrt2() {
        let d = m(MetricId::Euclidean, &[1.0, 0.0], &[0.0, 1.0]);
        assert!((d - 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn manhattan_of_disjoint_two_class_vectors_is_2() {
        assert_eq!(m(MetricId::Manhattan, &[1.0, 0.0], &[0.0, 1.0]), 2.0);
    }

    #[test]
    fn chebyshev_is_the_max_coordinate_gap_not_a_sum() {
        assert_eq!(m(MetricId::Chebyshev, &[1.0, 0.0], &[0.0, 1.0]), 1.0);
        // Two coordinates each differ by 0.3: a sum would report 0.6.
        let d = m(MetricId::Chebyshev, &[0.5, 0.2, 0.3], &[0.2, 0.5, 0.3]);
        assert!((d - 0.3).abs() < 1e-15);
    }

    #[test]
    fn mse_averages_squared_gaps() {
        assert_eq!(m(MetricId::Mse, &[1.0, 0.0], &[0.0, 1.0]), 1.0);
        let d = m(MetricId::Mse, &[0.5, 0.5, 0.0, 0.0], &[0.0, 0.5, 0.5, 0.0]);
        assert!((d - 0.125).abs() < 1e-15);
    }

    #[test]
    fn mmd_linear_kernel_is_squared_euclidean() {
        assert_eq!(m(MetricId::Mmd, &[1.0, 0.0], &[0.0, 1.0]), 2.0);
    }

    #[test]
    fn cosine_spans_zero_to_one_on_probability_vectors() {
        let p = [0.3, 0.7];
        assert_eq!(m(MetricId::Cosine, &p, &p), 0.0);
        assert!((m(MetricId::Cosine, &[1.0, 0.0], &[0.0, 1.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wasserstein1_measures_transport_along_the_label_line() {
        // Mass moved from label 0 to label 2 travels distance 2 ...
        assert_eq!(
            m(MetricId::Wasserstein1, &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]),
            2.0
        );
        // ... while a move to the adjacent label travels distance 1, which
        // coordinate-wise metrics cannot tell apart.
        assert_eq!(
            m(MetricId::Wasserstein1, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]),
            1.0
        );
    }

    #[test]
    fn jsd_of_disjoint_supports_is_ln2() {
        let d = m(MetricId::Jsd, &[1.0, 0.0], &[0.0, 1.0]);
        assert!((d - LN_2).abs() < 1e-15);
    }

    #[test]
    fn symmetrised_kl_matches_hand_computed_value() {
        // For p = [1/2, 1/2], q = [1/4, 3/4]:
        //   D(p||q) = 0.5 ln 2 + 0.5 ln(2/3)      = 0.14384103622589045
        //   D(q||p) = 0.25 ln(1/2) + 0.75 ln(3/2) = 0.13081203594113697
        //   symmetrised mean                      = 0.13732653608351371
        // (the eps-smoothing perturbs this far below the tolerance).
        let d = m(MetricId::Kl, &[0.5, 0.5], &[0.25, 0.75]);
        assert!(
            (d - 0.13732653608351371).abs() < 1e-9,
            "kl value {d} drifted from frozen oracle"
        );
    }

    #[test]
    fn kl_handles_zero_entries_via_smoothing() {
        let d = m(MetricId::Kl, &[1.0, 0.0], &[0.0, 1.0]);
        assert!(d.is_finite() && d > 0.0);
        // Smoothed disjoint supports sit near ln(1/eps) scale.
        assert!(d > 20.0);
    }

    // -- structural relations ------------------------------------------------

    #[test]
    fn mmd_is_exactly_k_times_mse_by_shared_accumulation() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let q = [0.4, 0.3, 0.2, 0.1];
        let mse = m(MetricId::Mse, &p, &q);
        let mmd = m(MetricId::Mmd, &p, &q);
        assert_eq!(mse, mmd / 4.0);
    }

    #[test]
    fn random_is_not_computable() {
        let err = compute_metric(MetricId::Random, &[0.5, 0.5], &[0.5, 0.5]).unwrap_err();
        assert!(matches!(err, MetricError::NotComputable));
    }

    #[test]
    fn rejects_malformed_inputs() {
        let p = [0.5, 0.5];
        assert!(matches!(
            compute_metric(MetricId::Mse, &p, &[0.5, 0.25, 0.25]).unwrap_err(),
            MetricError::LengthMismatch { .. }
        ));
        assert!(matches!(
            compute_metric(MetricId::Mse, &[1.0], &[1.0]).unwrap_err(),
            MetricError::TooShort(1)
        ));
        assert!(matches!(
            compute_metric(MetricId::Mse, &p, &[0.7, 0.7]).unwrap_err(),
            MetricError::NotProbability {
                which: "second",
                ..
            }
        ));
        assert!(matches!(
            compute_metric(MetricId::Mse, &[-0.5, 1.5], &p).unwrap_err(),
            MetricError::NotProbability { which: "first", .. }
        ));
    }

    #[test]
    fn metric_names_round_trip() {
        for id in ALL_IDS {
            assert_eq!(id.name().parse::<MetricId>().unwrap(), id);
        }
        assert!("l2".parse::<MetricId>().is_err());
    }

    // -- matrix construction -------------------------------------------------

    fn example_matrix() -> LabelMatrix {
        LabelMatrix::new(
            vec![
                vec![0.8, 0.1, 0.1],
                vec![0.1, 0.8, 0.1],
                vec![0.1, 0.1, 0.8],
                vec![0.4, 0.3, 0.3],
            ],
            3,
        )
        .unwrap()
    }

    #[test]
    fn pairwise_matrix_is_symmetric_with_zero_diagonal() {
        for metric in COMPUTABLE {
            let d = pairwise_dissimilarity(&example_matrix(), metric).unwrap();
            assert_eq!(d.n(), 4);
            for i in 0..4 {
                assert_eq!(d.get(i, i), 0.0, "{metric} diagonal");
                for j in 0..4 {
                    assert_eq!(d.get(i, j), d.get(j, i), "{metric} symmetry");
                    assert!(d.get(i, j).is_finite() && d.get(i, j) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn clustering_matrix_for_mse_is_bitwise_identical_to_mmd() {
        let m = example_matrix();
        let mse = clustering_dissimilarity(&m, MetricId::Mse).unwrap();
        let mmd = clustering_dissimilarity(&m, MetricId::Mmd).unwrap();
        assert_eq!(mse.metric(), MetricId::Mse);
        assert_eq!(mmd.metric(), MetricId::Mmd);
        for i in 0..m.clients() {
            for j in 0..m.clients() {
                assert_eq!(mse.get(i, j).to_bits(), mmd.get(i, j).to_bits());
            }
        }
        // Metrics without a sibling keep their plain pairwise entries.
        let direct = pairwise_dissimilarity(&m, MetricId::Euclidean).unwrap();
        let routed = clustering_dissimilarity(&m, MetricId::Euclidean).unwrap();
        for i in 0..m.clients() {
            for j in 0..m.clients() {
                assert_eq!(direct.get(i, j).to_bits(), routed.get(i, j).to_bits());
            }
        }
    }

    #[test]
    fn pairwise_requires_three_clients() {
        let m = LabelMatrix::new(vec![vec![0.5, 0.5], vec![0.4, 0.6]], 2).unwrap();
        assert!(matches!(
            pairwise_dissimilarity(&m, MetricId::Mse).unwrap_err(),
            MetricError::TooFewClients { need: 3, got: 2 }
        ));
    }

    #[test]
    fn from_rows_validates_shape_and_symmetry() {
        let ok = DissimilarityMatrix::from_rows(
            vec![
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.0, 3.0],
                vec![2.0, 3.0, 0.0],
            ],
            MetricId::Euclidean,
        )
        .unwrap();
        assert_eq!(ok.get(2, 1), 3.0);

        assert!(DissimilarityMatrix::from_rows(
            vec![vec![0.0, 1.0], vec![2.0, 0.0]],
            MetricId::Euclidean,
        )
        .is_err());
        assert!(DissimilarityMatrix::from_rows(
            vec![vec![0.5, 1.0], vec![1.0, 0.0]],
            MetricId::Euclidean,
        )
        .is_err());
        assert!(DissimilarityMatrix::from_rows(vec![vec![0.0, 1.0]], MetricId::Euclidean).is_err());
    }

    #[test]
    fn scale_rejects_nonpositive_factors() {
        let d = pairwise_dissimilarity(&example_matrix(), MetricId::Mse).unwrap();
        assert!(d.scale(0.0).is_err());
        assert!(d.scale(-2.0).is_err());
        let scaled = d.scale(2.0).unwrap();
        assert_eq!(scaled.get(0, 1), 2.0 * d.get(0, 1));
    }

    // -- metric space properties over random probability vectors -------------

    /// Random probability vector of length `k` (normalised positives).
    fn prob_vec(k: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.001f64..1.0, k).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_nonnegative_and_zero_on_self(p in prob_vec(5)) {
            for metric in COMPUTABLE {
                let self_d = m(metric, &p, &p);
                prop_assert!(self_d.abs() < 1e-12, "{metric}: d(p,p) = {self_d}");
                prop_assert!(self_d >= 0.0);
            }
        }

        #[test]
        fn prop_symmetric_bitwise(p in prob_vec(6), q in prob_vec(6)) {
            for metric in COMPUTABLE {
                prop_assert_eq!(m(metric, &p, &q), m(metric, &q, &p), "{}", metric);
            }
        }

        #[test]
        fn prop_finite_nonnegative(p in prob_vec(4), q in prob_vec(4)) {
            for metric in COMPUTABLE {
                let d = m(metric, &p, &q);
                prop_assert!(d.is_finite() && d >= 0.0, "{}: {}", metric, d);
            }
        }

        #[test]
        fn prop_mmd_equals_squared_euclidean(p in prob_vec(7), q in prob_vec(7)) {
            let e = m(MetricId::Euclidean, &p, &q);
            let mmd = m(MetricId::Mmd, &p, &q);
            prop_assert!((mmd - e * e).abs() <= 1e-12);
        }

        #[test]
        fn prop_true_metrics_satisfy_triangle_inequality(
            p in prob_vec(5),
            q in prob_vec(5),
            r in prob_vec(5),
        ) {
            for metric in [
                MetricId::Euclidean,
                MetricId::Manhattan,
                MetricId::Chebyshev,
                MetricId::Wasserstein1,
            ] {
                let pq = m(metric, &p, &q);
                let qr = m(metric, &q, &r);
                let pr = m(metric, &p, &r);
                prop_assert!(pr <= pq + qr + 1e-12, "{}: {} > {} + {}", metric, pr, pq, qr);
            }
        }

        #[test]
        fn prop_bounded_metrics_stay_in_range(p in prob_vec(5), q in prob_vec(5)) {
            prop_assert!(m(MetricId::Cosine, &p, &q) <= 1.0 + 1e-12);
            prop_assert!(m(MetricId::Jsd, &p, &q) <= LN_2 + 1e-12);
            prop_assert!(m(MetricId::Manhattan, &p, &q) <= 2.0 + 1e-12);
            prop_assert!(m(MetricId::Chebyshev, &p, &q) <= 1.0 + 1e-12);
            prop_assert!(m(MetricId::Wasserstein1, &p, &q) <= 4.0 + 1e-12);
        }
    }
}
