//! Per-round client selection: one client per cluster, or a uniform random
//! subset as the baseline.

use crate::clustering::ClusterModel;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("selection fraction must be in (0, 1], got {0}")]
    BadFraction(f64),
    #[error("cannot select 0 clients per round")]
    ZeroCount,
    #[error("cannot select {want} clients out of {have}")]
    TooMany { want: usize, have: usize },
    #[error("cluster model covers {got} clients, expected {want}")]
    WrongClientCount { got: usize, want: usize },
}

/// How many clients the random baseline picks each round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SelectionSize {
    /// Exactly `n` clients.
    Count { n: usize },
    /// `max(floor(epsilon * N), 1)` clients, `epsilon` in (0, 1].
    Fraction { epsilon: f64 },
}

impl SelectionSize {
    /// Resolve to a concrete per-round count for `n_clients` participants.
    pub fn resolve(&self, n_clients: usize) -> Result<usize, SelectionError> {
        let n = match *self {
            SelectionSize::Count { n } => {
                if n == 0 {
                    return Err(SelectionError::ZeroCount);
                }
                n
            }
            SelectionSize::Fraction { epsilon } => {
                if !(epsilon > 0.0 && epsilon <= 1.0) {
                    return Err(SelectionError::BadFraction(epsilon));
                }
                ((epsilon * n_clients as f64).floor() as usize).max(1)
            }
        };
        if n > n_clients {
            return Err(SelectionError::TooMany {
                want: n,
                have: n_clients,
            });
        }
        Ok(n)
    }
}

/// A selection strategy bound to a fixed client population.
#[derive(Debug, Clone)]
pub enum SelectionPlan {
    /// One uniformly drawn member per cluster, every round.
    Clustered(ClusterModel),
    /// A uniform random subset of fixed size, without replacement.
    Random(SelectionSize),
}

impl SelectionPlan {
    /// How many clients this plan activates per round.
    pub fn per_round(&self, n_clients: usize) -> Result<usize, SelectionError> {
        match self {
            SelectionPlan::Clustered(model) => Ok(model.cluster_count()),
            SelectionPlan::Random(size) => size.resolve(n_clients),
        }
    }

    /// Draw one round's participant set, sorted ascending.
    ///
    /// Clustered mode draws one uniform member per cluster, in cluster-id
    /// order, so the result is deterministic in `rng`; singleton clusters
    /// contribute their only member with no draw variance. Random mode
    /// samples without replacement. The plan must match the population: a
    /// clustered plan over a different client count is an error.
    pub fn select(
        &self,
        n_clients: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<usize>, SelectionError> {
        match self {
            SelectionPlan::Clustered(model) => {
                if model.assignment().len() != n_clients {
                    return Err(SelectionError::WrongClientCount {
                        got: model.assignment().len(),
                        want: n_clients,
                    });
                }
                let mut picked = Vec::with_capacity(model.cluster_count());
                for k in 0..model.cluster_count() {
                    let members = model.cluster_members(k);
                    picked.push(members[rng.random_range(0..members.len())]);
                }
                picked.sort_unstable();
                Ok(picked)
            }
            SelectionPlan::Random(size) => {
                let n = size.resolve(n_clients)?;
                let mut picked: Vec<usize> = rand::seq::index::sample(rng, n_clients, n).into_vec();
                picked.sort_unstable();
                Ok(picked)
            }
        }
    }
}
