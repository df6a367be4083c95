//! Dirichlet label-skew partitioning of a dataset across simulated clients.
//!
//! For every class `k`, client proportions are drawn from a symmetric
//! Dirichlet with concentration `beta` and the class's samples are allocated
//! by largest-remainder rounding, so each class's sample count is conserved
//! exactly. Small `beta` concentrates each class on few clients (strong
//! label skew); large `beta` approaches a uniform spread.

use super::{ClientShard, DataError, Dataset};
use crate::stream::{self, tag};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Gamma};

/// How many incremented sub-seeds to try before falling back to topping up
/// empty clients by moving samples from the largest shard.
const MAX_ATTEMPTS: u64 = 16;

/// Partition `data` across `n_clients` shards with Dirichlet label skew.
///
/// Shards are disjoint, exhaustive, non-empty, and sorted; the result depends
/// only on `(data, n_clients, beta, seed)`. If a draw leaves some client
/// empty (common for small `beta`), the draw is retried with an incremented
/// sub-seed up to [`MAX_ATTEMPTS`] times; if every retry leaves empty clients
/// the final allocation is repaired by moving single samples from the largest
/// shard to each empty one.
pub fn partition_dirichlet(
    data: &Dataset,
    n_clients: usize,
    beta: f64,
    seed: u64,
) -> Result<Vec<ClientShard>, DataError> {
    if n_clients < 2 {
        return Err(DataError::InvalidParam(format!(
            "need at least 2 clients, got {n_clients}"
        )));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(DataError::InvalidParam(format!(
            "beta must be finite and > 0, got {beta}"
        )));
    }
    if data.len() < n_clients {
        return Err(DataError::InvalidParam(format!(
            "{} samples cannot cover {n_clients} clients",
            data.len()
        )));
    }

    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); data.classes()];
    for i in 0..data.len() {
        pools[data.label(i)].push(i);
    }

    let mut last_full: Option<Vec<Vec<usize>>> = None;
    for sub in 0..MAX_ATTEMPTS {
        match draw_allocation(&pools, n_clients, beta, seed, sub) {
            Some(shards) => {
                if shards.iter().all(|s| !s.is_empty()) {
                    return Ok(finish(shards));
                }
                last_full = Some(shards);
            }
            None => continue, // degenerate proportion draw; retry
        }
    }

    let shards = last_full.ok_or_else(|| {
        DataError::PartitionFailed(format!(
            "no valid Dirichlet draw in {MAX_ATTEMPTS} attempts (beta = {beta})"
        ))
    })?;
    top_up(shards).map(finish)
}

/// One complete allocation attempt. Returns `None` when a proportion draw is
/// numerically degenerate (all-zero or non-finite Gamma sample sums).
fn draw_allocation(
    pools: &[Vec<usize>],
    n_clients: usize,
    beta: f64,
    seed: u64,
    sub: u64,
) -> Option<Vec<Vec<usize>>> {
    let mut rng = stream::derive(seed, &[tag::PARTITION, sub]);
    let gamma = Gamma::new(beta, 1.0).expect("beta validated > 0");
    let mut shards: Vec<Vec<usize>> = vec![Vec::new(); n_clients];
    for pool in pools {
        // Symmetric Dirichlet(beta) over clients, built from Gamma(beta, 1)
        // draws normalised by their sum.
        let draws: Vec<f64> = (0..n_clients).map(|_| gamma.sample(&mut rng)).collect();
        let total: f64 = draws.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return None;
        }
        let weights: Vec<f64> = draws.iter().map(|g| g / total).collect();
        let counts = largest_remainder(&weights, pool.len());

        let mut order = pool.clone();
        order.shuffle(&mut rng);
        let mut cursor = 0;
        for (client, &take) in counts.iter().enumerate() {
            shards[client].extend_from_slice(&order[cursor..cursor + take]);
            cursor += take;
        }
    }
    Some(shards)
}

/// Move one sample from the largest shard to each empty shard. Fails only
/// when the largest shard would itself be drained to zero.
fn top_up(mut shards: Vec<Vec<usize>>) -> Result<Vec<Vec<usize>>, DataError> {
    for s in &mut shards {
        s.sort_unstable();
    }
    while let Some(empty) = shards.iter().position(|s| s.is_empty()) {
        let donor = (0..shards.len())
            .max_by(|&a, &b| shards[a].len().cmp(&shards[b].len()).then(b.cmp(&a)))
            .expect("at least two shards");
        if shards[donor].len() < 2 {
            return Err(DataError::PartitionFailed(
                "cannot top up empty clients: largest shard has a single sample".into(),
            ));
        }
        let moved = shards[donor].pop().expect("donor non-empty");
        shards[empty].push(moved);
    }
    Ok(shards)
}

fn finish(mut shards: Vec<Vec<usize>>) -> Vec<ClientShard> {
    for s in &mut shards {
        s.sort_unstable();
    }
    shards
        .into_iter()
        .enumerate()
        .map(|(client_id, sample_indices)| ClientShard {
            client_id,
            sample_indices,
        })
        .collect()
}

/// Apportion `total` units over `weights` (nonnegative, summing to ~1) by
/// largest-remainder rounding: floor every quota, then hand the leftover
/// units to the largest fractional parts, lowest index first on ties.
fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let quotas: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    debug_assert!(assigned <= total, "floored quotas exceed total");
    let deficit = total - assigned;

    let mut by_frac: Vec<usize> = (0..weights.len()).collect();
    by_frac.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in by_frac.iter().take(deficit) {
        counts[i] += 1;
    }
    counts
}
