//! Deterministic federated-learning simulator.
//!
//! The pipeline: partition a labelled dataset across simulated clients with a
//! Dirichlet label-skew sampler, summarise each client by its label
//! distribution, cluster clients by a chosen dissimilarity metric
//! (k-medoids + silhouette model selection), then run FedAvg training rounds
//! where either one client per cluster or a uniform random subset is selected
//! each round. Round counts and per-client energy are recorded so selection
//! strategies can be compared on equal footing.
//!
//! Everything downstream of a `(config, seed)` pair is reproducible: all
//! randomness flows through named [`stream`]s, and with an injected timing
//! model the emitted CSV/JSON artifacts are byte-identical across runs.

pub mod clustering;
pub mod dataio;
pub mod distmatrix;
pub mod energy;
pub mod fedcore;
pub mod harness;
pub mod metrics;
pub mod selection;
pub mod stream;
