//! Named, independent RNG streams derived from a single experiment seed.
//!
//! Every source of randomness in the simulator draws from its own stream,
//! identified by a tag path such as `(seed, TRAIN, round, client)`. Streams
//! are derived by folding the tags into the seed with a splitmix64-style
//! mixer, so any stream can be reconstructed independently of the order in
//! which other streams were consumed. This is what makes results independent
//! of execution schedule: client 7's round-3 shuffle is the same whether the
//! clients before it trained or not.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Tags naming each consumer of randomness. One tag per purpose; a stream is
/// `derive(seed, &[TAG, ...qualifiers])`.
pub mod tag {
    /// Synthetic class means.
    pub const SYNTH_MEANS: u64 = 0x01;
    /// Synthetic per-sample noise.
    pub const SYNTH_SAMPLES: u64 = 0x02;
    /// Dirichlet partition draws; qualified by the retry sub-seed.
    pub const PARTITION: u64 = 0x03;
    /// Train/test split shuffles; qualified by class label.
    pub const SPLIT: u64 = 0x04;
    /// Initial model parameters.
    pub const INIT: u64 = 0x05;
    /// Per-round client selection; qualified by round.
    pub const SELECT: u64 = 0x06;
    /// Per-round, per-client batch shuffling; qualified by round and client.
    pub const TRAIN: u64 = 0x07;
}

/// splitmix64 finalizer: a cheap, well-distributed 64-bit mixer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the RNG stream named by `tags` from the experiment `seed`.
///
/// Equal `(seed, tags)` always yield the same generator; differing in any
/// element of the path yields an unrelated one.
pub fn derive(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    // Offset the seed before mixing so that seed=0 with no tags does not map
    // to mix(0), which splitmix64 sends to a fixed, well-known value.
    let mut state = mix(seed ^ 0xa076_1d64_78bd_642f);
    for &t in tags {
        state = mix(state ^ t);
    }
    ChaCha8Rng::seed_from_u64(state)
}
