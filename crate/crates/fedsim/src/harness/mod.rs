//! Experiment orchestration: configs, the strategy-by-seed grid, aggregate
//! tables, and the clustered-versus-random savings comparison.

pub mod csvio;

use crate::clustering::{select_cluster_count, ClusterError};
use crate::dataio::{
    generate_synthetic, load_idx, partition_dirichlet, split_train_test, DataError, Dataset,
};
use crate::distmatrix::{build_distribution_matrix, pca_project, DistError};
use crate::energy::{PowerModel, TimingModel};
use crate::fedcore::{run_federated, FedRunConfig, HyperParams, TrainError};
use crate::metrics::{clustering_dissimilarity, MetricError, MetricId, COMPUTABLE};
use crate::selection::{SelectionPlan, SelectionSize};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error on {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Where the experiment's dataset comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSpec {
    /// Gaussian-cluster data generated on the fly and split train/test.
    Synthetic {
        classes: usize,
        features: usize,
        samples_per_class: usize,
        spread: f64,
        seed: u64,
        test_fraction: f64,
    },
    /// IDX image/label file pairs on disk.
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
    },
}

impl DatasetSpec {
    /// Materialise the `(train, test)` pair.
    pub fn load(&self) -> Result<(Dataset, Dataset), HarnessError> {
        match self {
            DatasetSpec::Synthetic {
                classes,
                features,
                samples_per_class,
                spread,
                seed,
                test_fraction,
            } => {
                let full =
                    generate_synthetic(*classes, *features, *samples_per_class, *spread, *seed)?;
                Ok(split_train_test(&full, *test_fraction, *seed)?)
            }
            DatasetSpec::Idx {
                train_images,
                train_labels,
                test_images,
                test_labels,
            } => {
                let train = load_idx(train_images, train_labels)?;
                let test = load_idx(test_images, test_labels)?;
                if train.classes() != test.classes() || train.feature_dim() != test.feature_dim() {
                    return Err(HarnessError::BadConfig(format!(
                        "train set ({} classes, {} features) and test set ({}, {}) disagree",
                        train.classes(),
                        train.feature_dim(),
                        test.classes(),
                        test.feature_dim()
                    )));
                }
                Ok((train, test))
            }
        }
    }
}

fn default_metrics() -> Vec<MetricId> {
    COMPUTABLE.to_vec()
}

fn default_power() -> PowerModel {
    PowerModel::Uniform(50.0)
}

fn default_timing() -> TimingModel {
    TimingModel::Injected {
        base_seconds: 0.5,
        per_sample_seconds: 0.01,
    }
}

/// Full description of one experiment: dataset, partition, the strategies to
/// compare, training hyperparameters, and the seeds to repeat over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    /// Number of simulated clients (at least 4).
    pub clients: usize,
    /// Dirichlet concentration for the label-skew partition.
    pub beta: f64,
    /// Clustered strategies to run, one per metric.
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricId>,
    /// Random baselines to run, one per selection size.
    #[serde(default)]
    pub random_baselines: Vec<SelectionSize>,
    #[serde(default)]
    pub hyper: HyperParams,
    #[serde(default = "default_power")]
    pub power: PowerModel,
    #[serde(default = "default_timing")]
    pub timing: TimingModel,
    /// Largest cluster count the silhouette sweep may pick; defaults to
    /// `clients - 1`.
    #[serde(default)]
    pub c_max: Option<usize>,
    /// Experiment seeds; every strategy runs once per seed.
    pub seeds: Vec<u64>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.clients < 4 {
            return Err(HarnessError::BadConfig(format!(
                "need at least 4 clients, got {}",
                self.clients
            )));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::BadConfig("seeds must not be empty".into()));
        }
        let mut seen_seeds = self.seeds.clone();
        seen_seeds.sort_unstable();
        if seen_seeds.windows(2).any(|w| w[0] == w[1]) {
            return Err(HarnessError::BadConfig("seeds must be unique".into()));
        }
        if self.metrics.is_empty() && self.random_baselines.is_empty() {
            return Err(HarnessError::BadConfig(
                "no strategies: metrics and random_baselines are both empty".into(),
            ));
        }
        for m in &self.metrics {
            if *m == MetricId::Random {
                return Err(HarnessError::BadConfig(
                    "'random' is not a clustering metric; configure it under random_baselines"
                        .into(),
                ));
            }
        }
        let mut names: Vec<&str> = self.metrics.iter().map(|m| m.name()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(HarnessError::BadConfig("metrics must be unique".into()));
        }
        if let Some(c_max) = self.c_max {
            if c_max < 2 || c_max > self.clients - 1 {
                return Err(HarnessError::BadConfig(format!(
                    "c_max {} out of range 2..={}",
                    c_max,
                    self.clients - 1
                )));
            }
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(HarnessError::BadConfig(format!(
                "beta must be finite and > 0, got {}",
                self.beta
            )));
        }
        self.hyper.validate()?;
        self.power.validate().map_err(TrainError::Energy)?;
        self.timing.validate().map_err(TrainError::Energy)?;
        for size in &self.random_baselines {
            size.resolve(self.clients).map_err(TrainError::Selection)?;
        }
        Ok(())
    }

    /// The strategy grid, clustered strategies first, in config order.
    pub fn strategies(&self) -> Vec<Strategy> {
        self.metrics
            .iter()
            .map(|&m| Strategy::Clustered(m))
            .chain(self.random_baselines.iter().map(|&s| Strategy::Random(s)))
            .collect()
    }
}

/// One column of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Clustered(MetricId),
    Random(SelectionSize),
}

impl Strategy {
    /// Stable label used in file names and table rows.
    pub fn label(&self) -> String {
        match self {
            Strategy::Clustered(m) => m.name().to_string(),
            Strategy::Random(SelectionSize::Count { n }) => format!("random_n{n}"),
            Strategy::Random(SelectionSize::Fraction { epsilon }) => {
                format!("random_eps{epsilon}")
            }
        }
    }
}

/// Outcome of one `(strategy, seed)` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub strategy: String,
    pub seed: u64,
    pub clients_per_round: usize,
    /// Chosen cluster count (clustered strategies only).
    pub cluster_count: Option<usize>,
    /// Mean silhouette of the chosen clustering.
    pub silhouette: Option<f64>,
    pub converged: bool,
    /// Rounds to converge, or the round cap when the run never converged.
    pub rounds: usize,
    pub final_accuracy: f64,
    pub accuracy_std: Option<f64>,
    pub energy_wh: f64,
}

/// A `(strategy, seed)` cell that errored; the rest of the grid still runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub strategy: String,
    pub seed: u64,
    pub error: String,
}

/// Per-strategy aggregate over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub strategy: String,
    pub clustered: bool,
    pub mean_clients_per_round: f64,
    /// Mean rounds over seeds; non-converged runs count as the round cap.
    pub mean_rounds: f64,
    pub mean_energy_wh: f64,
    /// Mean convergence-window accuracy deviation over converged seeds.
    pub mean_accuracy_std: Option<f64>,
    pub converged_seeds: usize,
    pub total_seeds: usize,
}

/// A clustered strategy matched against the random baseline closest in mean
/// clients per round (within one client); reductions are relative to the
/// baseline and may be negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavingsRow {
    pub metric: String,
    pub clustered_rounds: f64,
    pub clustered_energy_wh: f64,
    pub baseline: Option<String>,
    pub baseline_rounds: Option<f64>,
    pub baseline_energy_wh: Option<f64>,
    pub rounds_reduction_pct: Option<f64>,
    pub energy_reduction_pct: Option<f64>,
}

/// Everything an experiment produced, as written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub cells: Vec<CellResult>,
    pub failures: Vec<CellFailure>,
    pub warnings: Vec<String>,
    pub table: Vec<TableRow>,
    pub savings: Vec<SavingsRow>,
}

/// Run the full strategy-by-seed grid and write all artifacts into
/// `out_dir`: per-cell `rounds_<strategy>_<seed>.csv` and
/// `energy_<strategy>_<seed>.csv`, per-metric `pca_<metric>.csv` (first
/// seed's geometry), plus `table.csv` and `summary.json`.
///
/// A failing cell is recorded in `failures` and skipped; everything else
/// still runs. With injected timing the entire output directory is a pure
/// function of the config, byte for byte.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<ExperimentReport, HarnessError> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|source| HarnessError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let (train, test) = config.dataset.load()?;
    let strategies = config.strategies();
    let c_max = config.c_max.unwrap_or(config.clients - 1);

    let mut cells = Vec::new();
    let mut failures = Vec::new();
    let mut warnings = Vec::new();

    for (seed_no, &seed) in config.seeds.iter().enumerate() {
        let prepared = prepare_seed(config, &train, seed);
        let (shards, matrix) = match prepared {
            Ok(pair) => pair,
            Err(e) => {
                for s in &strategies {
                    failures.push(CellFailure {
                        strategy: s.label(),
                        seed,
                        error: e.to_string(),
                    });
                }
                continue;
            }
        };

        for strategy in &strategies {
            let label = strategy.label();
            let outcome = run_cell(
                config,
                &train,
                &test,
                &shards,
                &matrix,
                *strategy,
                seed,
                seed_no == 0,
                c_max,
                out_dir,
                &mut warnings,
            );
            match outcome {
                Ok(cell) => cells.push(cell),
                Err(e) => failures.push(CellFailure {
                    strategy: label,
                    seed,
                    error: e.to_string(),
                }),
            }
        }
    }

    let table = aggregate_table(&strategies, &config.seeds, &cells, config.hyper.max_rounds);
    let savings = compare_summary(&table);

    csvio::write_table(&out_dir.join("table.csv"), &table)?;
    let report = ExperimentReport {
        config: config.clone(),
        cells,
        failures,
        warnings,
        table,
        savings,
    };
    let json_path = out_dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(&json_path, text).map_err(|source| HarnessError::Io {
        path: json_path.display().to_string(),
        source,
    })?;
    Ok(report)
}

type SeedArtifacts = (
    Vec<crate::dataio::ClientShard>,
    crate::distmatrix::LabelMatrix,
);

fn prepare_seed(
    config: &ExperimentConfig,
    train: &Dataset,
    seed: u64,
) -> Result<SeedArtifacts, HarnessError> {
    let shards = partition_dirichlet(train, config.clients, config.beta, seed)?;
    let matrix = build_distribution_matrix(&shards, train)?;
    Ok((shards, matrix))
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    config: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
    shards: &[crate::dataio::ClientShard],
    matrix: &crate::distmatrix::LabelMatrix,
    strategy: Strategy,
    seed: u64,
    first_seed: bool,
    c_max: usize,
    out_dir: &Path,
    warnings: &mut Vec<String>,
) -> Result<CellResult, HarnessError> {
    let label = strategy.label();
    let (plan, cluster_count, silhouette) = match strategy {
        Strategy::Clustered(metric) => {
            let d = clustering_dissimilarity(matrix, metric)?;
            let model = select_cluster_count(&d, c_max)?;
            if first_seed {
                let projection = pca_project(matrix)?;
                if projection.rank_deficient {
                    warnings.push(format!(
                        "pca for metric {metric} (seed {seed}): label matrix spans fewer than \
                         two directions; second coordinate zeroed"
                    ));
                }
                csvio::write_pca(
                    &out_dir.join(format!("pca_{metric}.csv")),
                    &projection,
                    &model,
                )?;
            }
            let count = model.cluster_count();
            let sil = model.silhouette();
            (SelectionPlan::Clustered(model), Some(count), Some(sil))
        }
        Strategy::Random(size) => (SelectionPlan::Random(size), None, None),
    };

    let clients_per_round = plan.per_round(config.clients).map_err(TrainError::from)?;
    let out = run_federated(&FedRunConfig {
        train,
        test,
        shards,
        plan: &plan,
        hyper: &config.hyper,
        power: &config.power,
        timing: &config.timing,
        seed,
    })?;

    csvio::write_rounds(
        &out_dir.join(format!("rounds_{label}_{seed}.csv")),
        &out.record.rounds,
    )?;
    csvio::write_energy(
        &out_dir.join(format!("energy_{label}_{seed}.csv")),
        out.ledger.entries(),
    )?;

    Ok(CellResult {
        strategy: label,
        seed,
        clients_per_round,
        cluster_count,
        silhouette,
        converged: out.record.converged,
        rounds: out
            .record
            .rounds_to_converge
            .unwrap_or(config.hyper.max_rounds),
        final_accuracy: out.record.rounds.last().expect("round 0 exists").accuracy,
        accuracy_std: out.record.accuracy_std,
        energy_wh: out.record.total_energy_wh,
    })
}

/// Collapse per-cell results into one row per strategy, preserving strategy
/// order. Cells that failed are simply absent from their strategy's means.
pub fn aggregate_table(
    strategies: &[Strategy],
    seeds: &[u64],
    cells: &[CellResult],
    max_rounds: usize,
) -> Vec<TableRow> {
    let _ = max_rounds; // rounds already censored at the cap in CellResult
    strategies
        .iter()
        .map(|strategy| {
            let label = strategy.label();
            let mine: Vec<&CellResult> = cells.iter().filter(|c| c.strategy == label).collect();
            let n = mine.len().max(1) as f64;
            let converged: Vec<&&CellResult> = mine.iter().filter(|c| c.converged).collect();
            let mean_accuracy_std = if converged.is_empty() {
                None
            } else {
                Some(
                    converged.iter().filter_map(|c| c.accuracy_std).sum::<f64>()
                        / converged.len() as f64,
                )
            };
            TableRow {
                strategy: label,
                clustered: matches!(strategy, Strategy::Clustered(_)),
                mean_clients_per_round: mine
                    .iter()
                    .map(|c| c.clients_per_round as f64)
                    .sum::<f64>()
                    / n,
                mean_rounds: mine.iter().map(|c| c.rounds as f64).sum::<f64>() / n,
                mean_energy_wh: mine.iter().map(|c| c.energy_wh).sum::<f64>() / n,
                mean_accuracy_std,
                converged_seeds: converged.len(),
                total_seeds: seeds.len(),
            }
        })
        .collect()
}

/// Match every clustered row against the random baseline nearest in mean
/// clients per round (within +/- 1 client) and compute percentage
/// reductions. Unmatched metrics keep `None` in the baseline columns;
/// reductions are not clamped, so a clustered strategy that lost shows up
/// negative.
pub fn compare_summary(table: &[TableRow]) -> Vec<SavingsRow> {
    let baselines: Vec<&TableRow> = table.iter().filter(|r| !r.clustered).collect();
    table
        .iter()
        .filter(|r| r.clustered)
        .map(|row| {
            let matched = baselines
                .iter()
                .filter(|b| {
                    (b.mean_clients_per_round - row.mean_clients_per_round).abs() <= 1.0 + 1e-9
                })
                .min_by(|a, b| {
                    let da = (a.mean_clients_per_round - row.mean_clients_per_round).abs();
                    let db = (b.mean_clients_per_round - row.mean_clients_per_round).abs();
                    da.partial_cmp(&db)
                        .unwrap()
                        .then(a.strategy.cmp(&b.strategy))
                });
            match matched {
                Some(b) => SavingsRow {
                    metric: row.strategy.clone(),
                    clustered_rounds: row.mean_rounds,
                    clustered_energy_wh: row.mean_energy_wh,
                    baseline: Some(b.strategy.clone()),
                    baseline_rounds: Some(b.mean_rounds),
                    baseline_energy_wh: Some(b.mean_energy_wh),
                    rounds_reduction_pct: Some(
                        100.0 * (b.mean_rounds - row.mean_rounds) / b.mean_rounds,
                    ),
                    energy_reduction_pct: Some(
                        100.0 * (b.mean_energy_wh - row.mean_energy_wh) / b.mean_energy_wh,
                    ),
                },
                None => SavingsRow {
                    metric: row.strategy.clone(),
                    clustered_rounds: row.mean_rounds,
                    clustered_energy_wh: row.mean_energy_wh,
                    baseline: None,
                    baseline_rounds: None,
                    baseline_energy_wh: None,
                    rounds_reduction_pct: None,
                    energy_reduction_pct: None,
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        serde_json::from_str(
            r#"{
                "dataset": {
                    "kind": "synthetic",
                    "classes": 3,
                    "features": 4,
                    "samples_per_class": 40,
                    "spread": 0.25,
                    "seed": 11,
                    "test_fraction": 0.25
                },
                "clients": 6,
                "beta": 0.3,
                "metrics": ["euclidean", "jsd"],
                "random_baselines": [{"n": 2}],
                "hyper": {"max_rounds": 4, "learning_rate": 0.2, "batch_size": 8,
                          "accuracy_threshold": 0.9, "arch": {"mlp": {"hidden": 8}}},
                "seeds": [3]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn config_parses_with_defaults() {
        let c = tiny_config();
        c.validate().unwrap();
        assert_eq!(c.hyper.local_epochs, 1); // default filled in
        assert_eq!(c.power, PowerModel::Uniform(50.0));
        assert!(matches!(c.timing, TimingModel::Injected { .. }));
        assert_eq!(c.strategies().len(), 3);
        assert_eq!(c.strategies()[2].label(), "random_n2");
    }

    #[test]
    fn config_rejects_random_as_metric() {
        let mut c = tiny_config();
        c.metrics.push(MetricId::Random);
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("random_baselines"), "{err}");
    }

    #[test]
    fn config_rejects_duplicates_and_small_populations() {
        let mut c = tiny_config();
        c.metrics.push(MetricId::Euclidean);
        assert!(c.validate().is_err());

        c = tiny_config();
        c.clients = 3;
        assert!(c.validate().is_err());

        c = tiny_config();
        c.seeds = vec![];
        assert!(c.validate().is_err());

        c = tiny_config();
        c.seeds = vec![1, 1];
        assert!(c.validate().is_err());

        c = tiny_config();
        c.metrics.clear();
        c.random_baselines.clear();
        assert!(c.validate().is_err());

        c = tiny_config();
        c.c_max = Some(6);
        assert!(c.validate().is_err());
    }

    #[test]
    fn strategy_labels_are_filename_safe() {
        assert_eq!(
            Strategy::Clustered(MetricId::Wasserstein1).label(),
            "wasserstein1"
        );
        assert_eq!(
            Strategy::Random(SelectionSize::Count { n: 10 }).label(),
            "random_n10"
        );
        assert_eq!(
            Strategy::Random(SelectionSize::Fraction { epsilon: 0.02 }).label(),
            "random_eps0.02"
        );
    }

    fn row(strategy: &str, clustered: bool, cpr: f64, rounds: f64, energy: f64) -> TableRow {
        TableRow {
            strategy: strategy.into(),
            clustered,
            mean_clients_per_round: cpr,
            mean_rounds: rounds,
            mean_energy_wh: energy,
            mean_accuracy_std: None,
            converged_seeds: 5,
            total_seeds: 5,
        }
    }

    #[test]
    fn savings_percentage_matches_worked_example() {
        let table = vec![
            row("euclidean", true, 10.0, 60.4, 329.746),
            row("random_n10", false, 10.0, 87.8, 563.378),
        ];
        let savings = compare_summary(&table);
        assert_eq!(savings.len(), 1);
        let s = &savings[0];
        assert_eq!(s.baseline.as_deref(), Some("random_n10"));
        let pct = s.energy_reduction_pct.unwrap();
        assert!(
            (pct - 41.47).abs() < 0.005,
            "expected ~41.47% energy reduction, got {pct}"
        );
    }

    #[test]
    fn savings_can_be_negative_and_unmatched() {
        let table = vec![
            row("kl", true, 2.0, 120.0, 700.0),
            row("jsd", true, 7.0, 50.0, 300.0),
            row("random_n2", false, 2.0, 100.0, 500.0),
        ];
        let savings = compare_summary(&table);
        // kl matched random_n2 and lost: negative, not clamped.
        let kl = &savings[0];
        assert!(kl.rounds_reduction_pct.unwrap() < 0.0);
        assert!((kl.energy_reduction_pct.unwrap() - (-40.0)).abs() < 1e-9);
        // jsd has no baseline within one client.
        let jsd = &savings[1];
        assert_eq!(jsd.baseline, None);
        assert_eq!(jsd.rounds_reduction_pct, None);
    }

    #[test]
    fn savings_picks_the_nearest_baseline() {
        let table = vec![
            row("mse", true, 3.0, 50.0, 100.0),
            row("random_n2", false, 2.0, 80.0, 200.0),
            row("random_n3", false, 3.0, 70.0, 150.0),
        ];
        let savings = compare_summary(&table);
        assert_eq!(savings[0].baseline.as_deref(), Some("random_n3"));
    }

    #[test]
    fn experiment_grid_runs_and_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config();
        let report = run_experiment(&config, dir.path()).unwrap();

        assert_eq!(report.failures.len(), 0, "failures: {:?}", report.failures);
        assert_eq!(report.cells.len(), 3);
        assert_eq!(report.table.len(), 3);
        assert_eq!(report.savings.len(), 2);

        for name in [
            "table.csv",
            "summary.json",
            "pca_euclidean.csv",
            "pca_jsd.csv",
            "rounds_euclidean_3.csv",
            "rounds_jsd_3.csv",
            "rounds_random_n2_3.csv",
            "energy_euclidean_3.csv",
            "energy_random_n2_3.csv",
        ] {
            assert!(dir.path().join(name).exists(), "missing {name}");
        }

        // summary.json parses back into the same report.
        let text = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
        let parsed: ExperimentReport = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn experiment_is_deterministic_across_directories() {
        let config = tiny_config();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_experiment(&config, a.path()).unwrap();
        run_experiment(&config, b.path()).unwrap();
        let mut names: Vec<String> = std::fs::read_dir(a.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let left = std::fs::read(a.path().join(&name)).unwrap();
            let right = std::fs::read(b.path().join(&name)).unwrap();
            assert_eq!(left, right, "artifact {name} differs between runs");
        }
    }
}
