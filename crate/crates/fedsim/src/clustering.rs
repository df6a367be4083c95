//! k-medoids clustering (PAM) with silhouette-based model selection.
//!
//! Medoids are actual clients, so each cluster has a canonical representative
//! and the algorithm needs nothing but the pairwise dissimilarity matrix —
//! no coordinates, no averaging in metric space. BUILD greedily seeds the
//! medoid set; SWAP applies the single best improving exchange per iteration
//! until none exists. Both phases break ties toward the lowest index, making
//! the result a pure function of the input matrix.

use crate::metrics::DissimilarityMatrix;
use thiserror::Error;

/// Hard cap on SWAP iterations (one applied exchange each); PAM converges
/// long before this on any sane input.
pub const MAX_SWAP_ITERATIONS: usize = 300;

/// The exchange-pair escape neighborhood is scanned only while
/// `(c * (N - c))^2` stays at or below this, keeping the extra effort
/// bounded on large instances while small ones get the deeper search.
pub const DOUBLE_KICK_LIMIT: usize = 4096;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("cluster count {c} out of range 2..={max} for {n} clients")]
    CountOutOfRange { c: usize, n: usize, max: usize },
    #[error("cluster {cluster} has no members")]
    EmptyCluster { cluster: usize },
    #[error("silhouette needs at least 2 clusters")]
    SingleCluster,
    #[error("assignment length {got} does not match matrix size {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("invalid cluster model: {0}")]
    Invalid(String),
}

/// A clustering of N clients into `c` groups, each represented by a medoid.
///
/// `medoids[k]` is the client index representing cluster `k`; medoids are
/// sorted ascending, so cluster ids are stable across runs. `assignment[i]`
/// is client `i`'s cluster. Invariants: every medoid belongs to its own
/// cluster, every cluster is non-empty, and every non-medoid client sits in
/// the cluster of its nearest medoid (lowest cluster id on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    medoids: Vec<usize>,
    assignment: Vec<usize>,
    cost: f64,
    silhouette: f64,
}

impl ClusterModel {
    /// Assemble a model from explicit parts, validating structure. Intended
    /// for callers that already know the grouping (tests, degenerate
    /// single-client setups); `cost` and `silhouette` are left at zero —
    /// [`kmedoids`] is the way to get real values.
    pub fn from_parts(medoids: Vec<usize>, assignment: Vec<usize>) -> Result<Self, ClusterError> {
        let model = Self {
            medoids,
            assignment,
            cost: 0.0,
            silhouette: 0.0,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<(), ClusterError> {
        let c = self.medoids.len();
        let n = self.assignment.len();
        if c == 0 {
            return Err(ClusterError::Invalid("no medoids".into()));
        }
        if self.medoids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ClusterError::Invalid(
                "medoids must be sorted and distinct".into(),
            ));
        }
        if let Some(&m) = self.medoids.iter().find(|&&m| m >= n) {
            return Err(ClusterError::Invalid(format!("medoid {m} outside 0..{n}")));
        }
        for (k, &m) in self.medoids.iter().enumerate() {
            if self.assignment[m] != k {
                return Err(ClusterError::Invalid(format!(
                    "medoid {m} not assigned to its own cluster {k}"
                )));
            }
        }
        let mut sizes = vec![0usize; c];
        for (i, &a) in self.assignment.iter().enumerate() {
            if a >= c {
                return Err(ClusterError::Invalid(format!(
                    "client {i} assigned to nonexistent cluster {a}"
                )));
            }
            sizes[a] += 1;
        }
        if let Some(k) = sizes.iter().position(|&s| s == 0) {
            return Err(ClusterError::EmptyCluster { cluster: k });
        }
        Ok(())
    }

    /// Number of clusters.
    pub fn cluster_count(&self) -> usize {
        self.medoids.len()
    }

    /// The representative client of each cluster, sorted ascending.
    pub fn medoids(&self) -> &[usize] {
        &self.medoids
    }

    /// Cluster id of each client.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Total dissimilarity of every client to its cluster's medoid.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Mean silhouette of the clustering.
    pub fn silhouette(&self) -> f64 {
        self.silhouette
    }

    /// Clients belonging to cluster `k`, ascending.
    pub fn cluster_members(&self, k: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a == k)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Cluster the N clients of `d` into exactly `c` groups with PAM.
///
/// BUILD seeds medoids greedily (each step adds the client that lowers total
/// cost most); SWAP then repeatedly applies the single best cost-reducing
/// medoid/non-medoid exchange until none remains. Plain descent can park in
/// a swap-stable set that is still far from the best one (two exchanges away
/// even at N=7), so a deterministic escape stage follows: force each
/// exchange in index order, re-descend, and adopt the first strict
/// improvement, repeating until nothing improves. The result is therefore
/// still swap-stable — no single exchange reduces its cost. All ties break
/// toward lower client index, so equal inputs give equal outputs. Requires
/// `2 <= c <= N-1`.
pub fn kmedoids(d: &DissimilarityMatrix, c: usize) -> Result<ClusterModel, ClusterError> {
    let n = d.n();
    if n < 3 || c < 2 || c > n - 1 {
        return Err(ClusterError::CountOutOfRange {
            c,
            n,
            max: n.saturating_sub(1),
        });
    }

    let mut medoids = build_seed(d, c);
    let mut cost = descend(d, &mut medoids);

    // Escape stage: kick the search out of swap-stable non-optima. Each
    // round forces one exchange, re-descends, and adopts the first strict
    // improvement; when no single kick helps and the pair neighborhood is
    // small enough to afford, coordinated exchange pairs are tried too.
    // Strict improvement on every adoption guarantees termination; the cap
    // is a backstop only.
    let try_pairs = (c * (n - c)).pow(2) <= DOUBLE_KICK_LIMIT;
    'escape: for _ in 0..MAX_SWAP_ITERATIONS {
        let tol = 1e-12 * (1.0 + cost.abs());
        for mp in 0..c {
            for cand in 0..n {
                if medoids.contains(&cand) {
                    continue;
                }
                let mut trial = medoids.clone();
                trial[mp] = cand;
                let trial_cost = descend(d, &mut trial);
                if trial_cost < cost - tol {
                    medoids = trial;
                    cost = trial_cost;
                    continue 'escape;
                }
            }
        }
        if try_pairs {
            for mp1 in 0..c {
                for cand1 in 0..n {
                    if medoids.contains(&cand1) {
                        continue;
                    }
                    let mut kicked = medoids.clone();
                    kicked[mp1] = cand1;
                    for mp2 in 0..c {
                        if mp2 == mp1 {
                            continue;
                        }
                        for cand2 in 0..n {
                            if kicked.contains(&cand2) {
                                continue;
                            }
                            let mut trial = kicked.clone();
                            trial[mp2] = cand2;
                            let trial_cost = descend(d, &mut trial);
                            if trial_cost < cost - tol {
                                medoids = trial;
                                cost = trial_cost;
                                continue 'escape;
                            }
                        }
                    }
                }
            }
        }
        break;
    }

    medoids.sort_unstable();
    let assignment = assign(d, &medoids);
    let cost = (0..n).map(|i| d.get(i, medoids[assignment[i]])).sum();
    let silhouette = silhouette_mean(d, &assignment)?;
    let model = ClusterModel {
        medoids,
        assignment,
        cost,
        silhouette,
    };
    model.validate()?;
    Ok(model)
}

/// Steepest-descent SWAP: repeatedly apply the single most cost-reducing
/// medoid/non-medoid exchange until none remains (bounded by
/// [`MAX_SWAP_ITERATIONS`]). Nearest/second-nearest medoid distances per
/// client let each candidate exchange be costed in O(N). Returns the final
/// cost; `medoids` is updated in place (order of positions preserved).
fn descend(d: &DissimilarityMatrix, medoids: &mut [usize]) -> f64 {
    let n = d.n();
    let c = medoids.len();
    for _ in 0..MAX_SWAP_ITERATIONS {
        let (near_pos, near_d, second_d) = nearest_medoids(d, medoids);
        let cost: f64 = near_d.iter().sum();
        let tol = 1e-12 * (1.0 + cost.abs());

        let mut best: Option<(f64, usize, usize)> = None; // (delta, candidate, medoid pos)
        for cand in 0..n {
            if medoids.contains(&cand) {
                continue;
            }
            for mp in 0..c {
                let mut delta = 0.0;
                for o in 0..n {
                    let d_oc = d.get(o, cand);
                    delta += if near_pos[o] == mp {
                        d_oc.min(second_d[o]) - near_d[o]
                    } else {
                        d_oc.min(near_d[o]) - near_d[o]
                    };
                }
                if delta < -tol && best.is_none_or(|(bd, ..)| delta < bd) {
                    best = Some((delta, cand, mp));
                }
            }
        }
        match best {
            Some((_, cand, mp)) => medoids[mp] = cand,
            None => break,
        }
    }
    let (_, near_d, _) = nearest_medoids(d, medoids);
    near_d.iter().sum()
}

/// Greedy BUILD phase: start from the client with the smallest total
/// dissimilarity, then repeatedly add the client that minimises the
/// resulting cost. Ties go to the lowest index.
fn build_seed(d: &DissimilarityMatrix, c: usize) -> Vec<usize> {
    let n = d.n();
    let first = (0..n)
        .min_by(|&a, &b| {
            let ta: f64 = (0..n).map(|j| d.get(a, j)).sum();
            let tb: f64 = (0..n).map(|j| d.get(b, j)).sum();
            ta.partial_cmp(&tb).unwrap().then(a.cmp(&b))
        })
        .expect("n >= 3");

    let mut medoids = vec![first];
    let mut near: Vec<f64> = (0..n).map(|j| d.get(first, j)).collect();
    while medoids.len() < c {
        let next = (0..n)
            .filter(|i| !medoids.contains(i))
            .min_by(|&a, &b| {
                let ca: f64 = (0..n).map(|j| near[j].min(d.get(a, j))).sum();
                let cb: f64 = (0..n).map(|j| near[j].min(d.get(b, j))).sum();
                ca.partial_cmp(&cb).unwrap().then(a.cmp(&b))
            })
            .expect("candidates remain while medoids < c <= n-1");
        for (j, nj) in near.iter_mut().enumerate() {
            *nj = nj.min(d.get(next, j));
        }
        medoids.push(next);
    }
    medoids
}

/// For each client: position of its nearest medoid, that distance, and the
/// distance to its second-nearest medoid. Nearest ties go to the lower
/// medoid position (hence, with sorted medoids, the lower client index).
fn nearest_medoids(d: &DissimilarityMatrix, medoids: &[usize]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = d.n();
    let mut pos = vec![0usize; n];
    let mut near = vec![f64::INFINITY; n];
    let mut second = vec![f64::INFINITY; n];
    for o in 0..n {
        for (mp, &m) in medoids.iter().enumerate() {
            let dist = d.get(o, m);
            if dist < near[o] {
                second[o] = near[o];
                near[o] = dist;
                pos[o] = mp;
            } else if dist < second[o] {
                second[o] = dist;
            }
        }
    }
    (pos, near, second)
}

/// Assign every client to its nearest medoid's cluster (lowest cluster id on
/// ties); medoids always land in their own cluster.
fn assign(d: &DissimilarityMatrix, medoids: &[usize]) -> Vec<usize> {
    let n = d.n();
    (0..n)
        .map(|i| {
            if let Some(k) = medoids.iter().position(|&m| m == i) {
                return k;
            }
            let mut best = 0;
            for (k, &m) in medoids.iter().enumerate() {
                if d.get(i, m) < d.get(i, medoids[best]) {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Mean silhouette coefficient of an assignment over the matrix `d`.
///
/// For client `i` with cluster size > 1, `a(i)` is the mean dissimilarity to
/// its own cluster's other members and `b(i)` the smallest mean
/// dissimilarity to any other cluster; `s(i) = (b - a) / max(a, b)`, taken
/// as 0 when `max(a, b) = 0`. Clients in singleton clusters score 0. Every
/// cluster id in `0..=max` must be non-empty and there must be at least two
/// clusters.
pub fn silhouette_mean(d: &DissimilarityMatrix, assignment: &[usize]) -> Result<f64, ClusterError> {
    let n = d.n();
    if assignment.len() != n {
        return Err(ClusterError::LengthMismatch {
            got: assignment.len(),
            want: n,
        });
    }
    let c = assignment.iter().max().map_or(0, |&m| m + 1);
    if c < 2 {
        return Err(ClusterError::SingleCluster);
    }
    let mut sizes = vec![0usize; c];
    for &a in assignment {
        sizes[a] += 1;
    }
    if let Some(k) = sizes.iter().position(|&s| s == 0) {
        return Err(ClusterError::EmptyCluster { cluster: k });
    }

    let mut total = 0.0;
    for i in 0..n {
        let own = assignment[i];
        if sizes[own] == 1 {
            continue; // singleton scores 0
        }
        let mut sums = vec![0.0f64; c];
        for j in 0..n {
            if j != i {
                sums[assignment[j]] += d.get(i, j);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..c)
            .filter(|&k| k != own)
            .map(|k| sums[k] / sizes[k] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

/// Sweep `c` from 2 to `c_max`, cluster with [`kmedoids`], and return the
/// model with the highest mean silhouette; ties keep the smallest `c`.
/// Requires at least 4 clients and `2 <= c_max <= N-1`.
pub fn select_cluster_count(
    d: &DissimilarityMatrix,
    c_max: usize,
) -> Result<ClusterModel, ClusterError> {
    let n = d.n();
    if n < 4 || c_max < 2 || c_max > n - 1 {
        return Err(ClusterError::CountOutOfRange {
            c: c_max,
            n,
            max: n.saturating_sub(1),
        });
    }
    let mut best: Option<ClusterModel> = None;
    for c in 2..=c_max {
        let model = kmedoids(d, c)?;
        if best
            .as_ref()
            .is_none_or(|b| model.silhouette > b.silhouette)
        {
            best = Some(model);
        }
    }
    Ok(best.expect("c_max >= 2 guarantees at least one model"))
}
