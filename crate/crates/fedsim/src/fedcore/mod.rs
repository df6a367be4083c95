//! The federated training loop: local SGD on selected clients, sample-count
//! weighted aggregation, centralized evaluation, and convergence detection.

pub mod model;

pub use model::{forward, init_params, loss_and_grad, predict, ModelArch, ModelParams, ModelShape};

use crate::dataio::{ClientShard, Dataset};
use crate::energy::{EnergyError, EnergyLedger, PowerModel, TimingModel};
use crate::selection::{SelectionError, SelectionPlan};
use crate::stream::{self, tag};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("bad model shape: {0}")]
    BadShape(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("bad hyperparameter: {0}")]
    BadHyper(String),
    #[error("client {client} owns no samples")]
    EmptyShard { client: usize },
    #[error("shard references sample {index}, outside dataset of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("loss became non-finite at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("cannot aggregate zero updates")]
    EmptyAggregate,
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error("round {round}, client {client}: {source}")]
    AtClient {
        round: usize,
        client: usize,
        source: Box<TrainError>,
    },
}

/// Training hyperparameters shared by every client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperParams {
    /// Local passes over the client's shard per round.
    pub local_epochs: usize,
    /// Mini-batch size (the final batch of an epoch may be smaller).
    pub batch_size: usize,
    /// SGD step size. Zero is allowed and yields null updates.
    pub learning_rate: f64,
    /// Classifier architecture.
    pub arch: ModelArch,
    /// Test accuracy that counts as "converged" when sustained.
    pub accuracy_threshold: f64,
    /// Consecutive rounds at or above the threshold required to converge.
    pub patience: usize,
    /// Training-round cap; 0 means evaluate the initial model and stop.
    pub max_rounds: usize,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            local_epochs: 1,
            batch_size: 32,
            learning_rate: 0.05,
            arch: ModelArch::Mlp { hidden: 32 },
            accuracy_threshold: 0.97,
            patience: 3,
            max_rounds: 300,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.local_epochs == 0 {
            return Err(TrainError::BadHyper("local_epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(TrainError::BadHyper("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(TrainError::BadHyper(format!(
                "learning_rate must be finite and >= 0, got {}",
                self.learning_rate
            )));
        }
        if !(self.accuracy_threshold > 0.0 && self.accuracy_threshold < 1.0) {
            return Err(TrainError::BadHyper(format!(
                "accuracy_threshold must be in (0, 1), got {}",
                self.accuracy_threshold
            )));
        }
        if self.patience == 0 {
            return Err(TrainError::BadHyper("patience must be >= 1".into()));
        }
        Ok(())
    }
}

/// One client's contribution to a round.
#[derive(Debug, Clone)]
pub struct LocalUpdate {
    pub params: ModelParams,
    /// Charged training duration (wall or injected, per the timing model).
    pub seconds: f64,
    /// Shard size, used as the aggregation weight.
    pub samples: usize,
}

/// Run mini-batch SGD on one client's shard, starting from `start`.
///
/// Each epoch shuffles the shard's indices with `rng` and walks them in
/// `batch_size` chunks, taking one gradient step per chunk. The caller owns
/// `rng`: passing `derive(seed, [TRAIN, round, client])` makes every
/// client/round pair independent of execution order. A zero learning rate
/// returns `start` bit-for-bit. Non-finite loss aborts with an error rather
/// than silently propagating NaN into aggregation.
pub fn local_train(
    start: &ModelParams,
    data: &Dataset,
    shard: &ClientShard,
    hyper: &HyperParams,
    timing: &TimingModel,
    rng: &mut ChaCha8Rng,
) -> Result<LocalUpdate, TrainError> {
    hyper.validate()?;
    timing.validate()?;
    check_shard(shard, data)?;
    check_data_shape(start.shape(), data)?;

    let began = Instant::now();
    let mut params = start.clone();
    let mut order = shard.sample_indices.clone();
    for epoch in 0..hyper.local_epochs {
        order.shuffle(rng);
        for (batch_no, batch) in order.chunks(hyper.batch_size).enumerate() {
            let (loss, grad) = loss_and_grad(&params, data, batch);
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss {
                    epoch,
                    batch: batch_no,
                });
            }
            for (w, g) in params.values_mut().iter_mut().zip(&grad) {
                *w -= hyper.learning_rate * g;
            }
        }
    }
    let seconds = timing.train_seconds(
        began.elapsed().as_secs_f64(),
        shard.len(),
        hyper.local_epochs,
    );
    Ok(LocalUpdate {
        params,
        seconds,
        samples: shard.len(),
    })
}

/// Sample-count weighted federated averaging.
///
/// With weights `u_i = n_i / sum(n)`, computes
/// `w = w_0 + sum_i u_i * (w_i - w_0)`, algebraically equal to
/// `sum_i u_i w_i` but exact in two corner cases that matter: aggregating
/// identical parameter vectors returns them unchanged, and a single update
/// passes through bit-for-bit.
pub fn aggregate(updates: &[(&ModelParams, usize)]) -> Result<ModelParams, TrainError> {
    let (first, _) = updates.first().ok_or(TrainError::EmptyAggregate)?;
    for (p, _) in updates {
        if p.shape() != first.shape() {
            return Err(TrainError::ShapeMismatch(
                "aggregated updates disagree on model shape".into(),
            ));
        }
    }
    let total: usize = updates.iter().map(|&(_, n)| n).sum();
    if total == 0 {
        return Err(TrainError::ShapeMismatch(
            "aggregation weights sum to zero samples".into(),
        ));
    }
    let mut out = (*first).clone();
    for &(p, n) in &updates[1..] {
        let u = n as f64 / total as f64;
        for (o, (&v, &base)) in out
            .values_mut()
            .iter_mut()
            .zip(p.values().iter().zip(first.values()))
        {
            *o += u * (v - base);
        }
    }
    Ok(out)
}

/// Fraction of `data` the model classifies correctly.
pub fn evaluate(params: &ModelParams, data: &Dataset) -> Result<f64, TrainError> {
    check_data_shape(params.shape(), data)?;
    let correct = (0..data.len())
        .filter(|&i| predict(params, data.feature(i)) == data.label(i))
        .count();
    Ok(correct as f64 / data.len() as f64)
}

/// Convergence verdict over an accuracy history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub converged: bool,
    /// Rounds until the first window of `patience` consecutive accuracies at
    /// or above the threshold completed; `None` if that never happened.
    pub rounds: Option<usize>,
    /// Population standard deviation of the accuracies in that window.
    pub accuracy_std: Option<f64>,
}

/// Scan `history` (entry `t` = test accuracy after round `t+1`) for the
/// first run of `patience` consecutive values `>= threshold`.
pub fn check_convergence(
    history: &[f64],
    threshold: f64,
    patience: usize,
) -> Result<Convergence, TrainError> {
    if patience == 0 {
        return Err(TrainError::BadHyper("patience must be >= 1".into()));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(TrainError::BadHyper(format!(
            "threshold must be in (0, 1), got {threshold}"
        )));
    }
    let mut streak = 0usize;
    for (t, &acc) in history.iter().enumerate() {
        streak = if acc >= threshold { streak + 1 } else { 0 };
        if streak == patience {
            let window = &history[t + 1 - patience..=t];
            return Ok(Convergence {
                converged: true,
                rounds: Some(t + 1),
                accuracy_std: Some(population_std(window)),
            });
        }
    }
    Ok(Convergence {
        converged: false,
        rounds: None,
        accuracy_std: None,
    })
}

fn population_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt()
}

/// Everything needed to run one federated training session.
#[derive(Debug, Clone, Copy)]
pub struct FedRunConfig<'a> {
    pub train: &'a Dataset,
    pub test: &'a Dataset,
    pub shards: &'a [ClientShard],
    pub plan: &'a SelectionPlan,
    pub hyper: &'a HyperParams,
    pub power: &'a PowerModel,
    pub timing: &'a TimingModel,
    pub seed: u64,
}

/// One row of a run's round log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundEntry {
    /// 0 is the pre-training evaluation; training rounds start at 1.
    pub round: usize,
    /// Participating clients, ascending; empty for round 0.
    pub selected: Vec<usize>,
    /// Shard size of each selected client, aligned with `selected`.
    pub samples: Vec<usize>,
    /// Charged training seconds per selected client, aligned with `selected`.
    pub seconds: Vec<f64>,
    /// Test accuracy of the aggregated model after this round.
    pub accuracy: f64,
}

/// Complete log of one federated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub rounds: Vec<RoundEntry>,
    pub converged: bool,
    pub rounds_to_converge: Option<usize>,
    pub accuracy_std: Option<f64>,
    pub total_energy_wh: f64,
}

/// A run's record plus the artifacts tests and exports need.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub ledger: EnergyLedger,
    pub params: ModelParams,
}

/// Run federated training to convergence or the round cap.
///
/// Per round `t >= 1`: select clients with `derive(seed, [SELECT, t])`, run
/// [`local_train`] on each with `derive(seed, [TRAIN, t, client])`, charge
/// energy for exactly the selected clients, aggregate, evaluate. Round 0
/// records the initial model's accuracy without training anyone. The whole
/// run is a pure function of the config when timing is injected.
pub fn run_federated(cfg: &FedRunConfig) -> Result<RunOutput, TrainError> {
    cfg.hyper.validate()?;
    cfg.power.validate()?;
    cfg.timing.validate()?;
    check_data_compat(cfg.train, cfg.test)?;
    if cfg.shards.is_empty() {
        return Err(TrainError::EmptyShard { client: 0 });
    }
    for shard in cfg.shards {
        check_shard(shard, cfg.train)?;
    }

    let shape = ModelShape::new(cfg.hyper.arch, cfg.train.feature_dim(), cfg.train.classes())?;
    let mut params = init_params(shape, &mut stream::derive(cfg.seed, &[tag::INIT]));
    let mut ledger = EnergyLedger::new();
    let mut rounds = vec![RoundEntry {
        round: 0,
        selected: Vec::new(),
        samples: Vec::new(),
        seconds: Vec::new(),
        accuracy: evaluate(&params, cfg.test)?,
    }];

    let mut history = Vec::new();
    let mut verdict = Convergence {
        converged: false,
        rounds: None,
        accuracy_std: None,
    };
    for round in 1..=cfg.hyper.max_rounds {
        let mut sel_rng = stream::derive(cfg.seed, &[tag::SELECT, round as u64]);
        let selected = cfg.plan.select(cfg.shards.len(), &mut sel_rng)?;

        let mut updates = Vec::with_capacity(selected.len());
        let mut seconds = Vec::with_capacity(selected.len());
        for &client in &selected {
            let mut train_rng =
                stream::derive(cfg.seed, &[tag::TRAIN, round as u64, client as u64]);
            let update = local_train(
                &params,
                cfg.train,
                &cfg.shards[client],
                cfg.hyper,
                cfg.timing,
                &mut train_rng,
            )
            .map_err(|e| TrainError::AtClient {
                round,
                client,
                source: Box::new(e),
            })?;
            ledger.record(round, client, cfg.power.watts(client)?, update.seconds)?;
            seconds.push(update.seconds);
            updates.push(update);
        }
        let pairs: Vec<(&ModelParams, usize)> =
            updates.iter().map(|u| (&u.params, u.samples)).collect();
        params = aggregate(&pairs)?;

        let accuracy = evaluate(&params, cfg.test)?;
        history.push(accuracy);
        rounds.push(RoundEntry {
            round,
            samples: selected.iter().map(|&c| cfg.shards[c].len()).collect(),
            selected,
            seconds,
            accuracy,
        });

        verdict = check_convergence(&history, cfg.hyper.accuracy_threshold, cfg.hyper.patience)?;
        if verdict.converged {
            break;
        }
    }

    Ok(RunOutput {
        record: RunRecord {
            rounds,
            converged: verdict.converged,
            rounds_to_converge: verdict.rounds,
            accuracy_std: verdict.accuracy_std,
            total_energy_wh: ledger.total_wh(),
        },
        ledger,
        params,
    })
}

fn check_shard(shard: &ClientShard, data: &Dataset) -> Result<(), TrainError> {
    if shard.is_empty() {
        return Err(TrainError::EmptyShard {
            client: shard.client_id,
        });
    }
    if let Some(&bad) = shard.sample_indices.iter().find(|&&i| i >= data.len()) {
        return Err(TrainError::IndexOutOfRange {
            index: bad,
            len: data.len(),
        });
    }
    Ok(())
}

fn check_data_shape(shape: &ModelShape, data: &Dataset) -> Result<(), TrainError> {
    if shape.input_dim() != data.feature_dim() || shape.classes() != data.classes() {
        return Err(TrainError::ShapeMismatch(format!(
            "model expects {} features / {} classes, dataset has {} / {}",
            shape.input_dim(),
            shape.classes(),
            data.feature_dim(),
            data.classes()
        )));
    }
    Ok(())
}

fn check_data_compat(train: &Dataset, test: &Dataset) -> Result<(), TrainError> {
    if train.feature_dim() != test.feature_dim() || train.classes() != test.classes() {
        return Err(TrainError::ShapeMismatch(format!(
            "train set is {} features / {} classes but test set is {} / {}",
            train.feature_dim(),
            train.classes(),
            test.feature_dim(),
            test.classes()
        )));
    }
    Ok(())
}
