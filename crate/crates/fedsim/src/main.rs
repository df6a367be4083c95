//! Command-line front end: cluster clients, train one strategy, run the
//! whole experiment grid, or re-summarize a finished run.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use fedsim::clustering::select_cluster_count;
use fedsim::dataio::partition_dirichlet;
use fedsim::distmatrix::{build_distribution_matrix, pca_project};
use fedsim::fedcore::{run_federated, FedRunConfig};
use fedsim::harness::{
    compare_summary, csvio, run_experiment, ExperimentConfig, SavingsRow, Strategy, TableRow,
};
use fedsim::metrics::{clustering_dissimilarity, pairwise_dissimilarity, MetricId};
use fedsim::selection::SelectionPlan;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "fedsim",
    version,
    about = "Deterministic federated-learning simulator with similarity-clustered client selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition clients and export label-distribution, dissimilarity,
    /// cluster, and projection CSVs without training anything.
    Cluster {
        /// Experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Single metric to cluster with; defaults to every configured metric.
        #[arg(long)]
        metric: Option<String>,
        /// Partition seed; defaults to the first configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "fedsim_out")]
        out: PathBuf,
    },
    /// Train one strategy end to end and write its round and energy logs.
    Train {
        /// Experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Metric name for clustered selection, or "random" for the first
        /// configured random baseline.
        #[arg(long)]
        metric: String,
        /// Seed; defaults to the first configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "fedsim_out")]
        out: PathBuf,
    },
    /// Run every strategy over every seed and write all artifacts.
    Experiment {
        /// Experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "fedsim_out")]
        out: PathBuf,
    },
    /// Recompute the clustered-versus-random savings from table.csv.
    Summarize {
        /// Directory holding a finished run's table.csv.
        #[arg(long, default_value = "fedsim_out")]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    // Die quietly on a closed pipe (`fedsim summarize | head`), like other
    // line-oriented tools, instead of panicking inside the print macros.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match Cli::parse().command {
        Command::Cluster {
            config,
            metric,
            seed,
            out,
        } => cmd_cluster(&config, metric.as_deref(), seed, &out),
        Command::Train {
            config,
            metric,
            seed,
            out,
        } => cmd_train(&config, &metric, seed, &out),
        Command::Experiment { config, out } => cmd_experiment(&config, &out),
        Command::Summarize { out } => cmd_summarize(&out),
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_path(path).with_context(|| format!("loading config {}", path.display()))
}

fn parse_metric(name: &str) -> Result<MetricId> {
    let metric: MetricId = name.parse()?;
    if metric == MetricId::Random {
        bail!("'random' is a selection baseline, not a clustering metric");
    }
    Ok(metric)
}

fn cmd_cluster(
    config_path: &Path,
    metric: Option<&str>,
    seed: Option<u64>,
    out: &Path,
) -> Result<()> {
    let config = load_config(config_path)?;
    let seed = seed.unwrap_or(config.seeds[0]);
    let metrics: Vec<MetricId> = match metric {
        Some(name) => vec![parse_metric(name)?],
        None => config.metrics.clone(),
    };
    if metrics.is_empty() {
        bail!("no metrics to cluster with; pass --metric or configure some");
    }
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;

    let (train, _test) = config.dataset.load()?;
    let shards = partition_dirichlet(&train, config.clients, config.beta, seed)?;
    let matrix = build_distribution_matrix(&shards, &train)?;
    csvio::write_pmatrix(&out.join(format!("pmatrix_{seed}.csv")), &matrix)?;

    let c_max = config.c_max.unwrap_or(config.clients - 1);
    println!("{:<14} {:>9} {:>12}", "metric", "clusters", "silhouette");
    for metric in metrics {
        let d = pairwise_dissimilarity(&matrix, metric)?;
        csvio::write_dmatrix(&out.join(format!("dmatrix_{metric}_{seed}.csv")), &d)?;
        let model = select_cluster_count(&clustering_dissimilarity(&matrix, metric)?, c_max)?;
        csvio::write_clusters(&out.join(format!("clusters_{metric}_{seed}.csv")), &model)?;
        let projection = pca_project(&matrix)?;
        if projection.rank_deficient {
            eprintln!(
                "warning: label matrix spans fewer than two directions; \
                 pca_{metric}.csv has a zero second coordinate"
            );
        }
        csvio::write_pca(&out.join(format!("pca_{metric}.csv")), &projection, &model)?;
        println!(
            "{:<14} {:>9} {:>12.4}",
            metric.name(),
            model.cluster_count(),
            model.silhouette()
        );
    }
    println!("artifacts written to {}", out.display());
    Ok(())
}

fn cmd_train(config_path: &Path, metric: &str, seed: Option<u64>, out: &Path) -> Result<()> {
    let config = load_config(config_path)?;
    let seed = seed.unwrap_or(config.seeds[0]);
    let strategy = if metric == "random" {
        match config.random_baselines.first() {
            Some(&size) => Strategy::Random(size),
            None => bail!("--metric random requires at least one configured random baseline"),
        }
    } else {
        Strategy::Clustered(parse_metric(metric)?)
    };
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;

    let (train, test) = config.dataset.load()?;
    let shards = partition_dirichlet(&train, config.clients, config.beta, seed)?;
    let plan = match strategy {
        Strategy::Clustered(metric) => {
            let matrix = build_distribution_matrix(&shards, &train)?;
            let d = clustering_dissimilarity(&matrix, metric)?;
            let c_max = config.c_max.unwrap_or(config.clients - 1);
            let model = select_cluster_count(&d, c_max)?;
            println!(
                "clustered with {}: {} clusters, silhouette {:.4}",
                metric,
                model.cluster_count(),
                model.silhouette()
            );
            SelectionPlan::Clustered(model)
        }
        Strategy::Random(size) => SelectionPlan::Random(size),
    };

    let output = run_federated(&FedRunConfig {
        train: &train,
        test: &test,
        shards: &shards,
        plan: &plan,
        hyper: &config.hyper,
        power: &config.power,
        timing: &config.timing,
        seed,
    })?;

    let label = strategy.label();
    csvio::write_rounds(
        &out.join(format!("rounds_{label}_{seed}.csv")),
        &output.record.rounds,
    )?;
    csvio::write_energy(
        &out.join(format!("energy_{label}_{seed}.csv")),
        output.ledger.entries(),
    )?;

    let record = &output.record;
    let final_accuracy = record.rounds.last().expect("round 0 exists").accuracy;
    match record.rounds_to_converge {
        Some(r) => println!("converged after {r} rounds"),
        None => println!("did not converge within {} rounds", config.hyper.max_rounds),
    }
    println!("final accuracy {:.4}", final_accuracy);
    println!("total energy {:.4} Wh", record.total_energy_wh);
    println!("artifacts written to {}", out.display());
    Ok(())
}

fn cmd_experiment(config_path: &Path, out: &Path) -> Result<()> {
    let config = load_config(config_path)?;
    let report = run_experiment(&config, out)?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    print_table(&report.table);
    println!();
    print_savings(&report.savings);
    println!();
    println!("artifacts written to {}", out.display());
    if !report.failures.is_empty() {
        eprintln!();
        for failure in &report.failures {
            eprintln!(
                "failed: {} (seed {}): {}",
                failure.strategy, failure.seed, failure.error
            );
        }
        std::process::exit(1);
    }
    Ok(())
}

fn cmd_summarize(out: &Path) -> Result<()> {
    let table_path = out.join("table.csv");
    let table = csvio::read_table(&table_path)
        .with_context(|| format!("reading {}", table_path.display()))?;
    if table.is_empty() {
        bail!("{} has no rows", table_path.display());
    }
    let savings = compare_summary(&table);
    csvio::write_savings(&out.join("savings.csv"), &savings)?;
    print_table(&table);
    println!();
    print_savings(&savings);
    println!();
    println!("savings written to {}", out.join("savings.csv").display());
    Ok(())
}

fn print_table(table: &[TableRow]) {
    println!(
        "{:<16} {:>13} {:>9} {:>12} {:>10}",
        "strategy", "clients/round", "rounds", "energy(Wh)", "converged"
    );
    for row in table {
        println!(
            "{:<16} {:>13.2} {:>9.1} {:>12.3} {:>7}/{}",
            row.strategy,
            row.mean_clients_per_round,
            row.mean_rounds,
            row.mean_energy_wh,
            row.converged_seeds,
            row.total_seeds
        );
    }
}

fn print_savings(savings: &[SavingsRow]) {
    if savings.is_empty() {
        println!("no clustered strategies to compare");
        return;
    }
    println!(
        "{:<16} {:<16} {:>16} {:>16}",
        "metric", "baseline", "rounds saved", "energy saved"
    );
    for row in savings {
        match (
            &row.baseline,
            row.rounds_reduction_pct,
            row.energy_reduction_pct,
        ) {
            (Some(baseline), Some(rounds_pct), Some(energy_pct)) => println!(
                "{:<16} {:<16} {:>15.2}% {:>15.2}%",
                row.metric, baseline, rounds_pct, energy_pct
            ),
            _ => println!(
                "{:<16} {:<16} {:>16} {:>16}",
                row.metric, "(no match)", "--", "--"
            ),
        }
    }
}
