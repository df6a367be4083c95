//! CSV readers and writers for every artifact the experiment produces.
//!
//! All floats go through the shortest round-trip representation, so
//! `read(write(x)) == x` exactly and identical runs produce byte-identical
//! files.

use super::{HarnessError, SavingsRow, TableRow};
use crate::clustering::ClusterModel;
use crate::distmatrix::{LabelMatrix, PcaProjection};
use crate::energy::EnergyEntry;
use crate::fedcore::RoundEntry;
use crate::metrics::DissimilarityMatrix;
use serde::{Deserialize, Serialize};
use std::path::Path;

fn open_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, HarnessError> {
    csv::Writer::from_path(path).map_err(|source| HarnessError::Csv {
        path: path.display().to_string(),
        source,
    })
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>, HarnessError> {
    csv::Reader::from_path(path).map_err(|source| HarnessError::Csv {
        path: path.display().to_string(),
        source,
    })
}

fn csv_err(path: &Path, source: csv::Error) -> HarnessError {
    HarnessError::Csv {
        path: path.display().to_string(),
        source,
    }
}

/// One round-log line; index lists are `;`-joined so the file stays flat.
#[derive(Serialize, Deserialize)]
struct RoundRow {
    round: usize,
    accuracy: f64,
    selected: String,
    samples: String,
    seconds: String,
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn split_parse<T: std::str::FromStr>(text: &str, path: &Path) -> Result<Vec<T>, HarnessError> {
    text.split(';')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>().map_err(|_| {
                HarnessError::BadConfig(format!(
                    "unparseable list entry {s:?} in {}",
                    path.display()
                ))
            })
        })
        .collect()
}

pub fn write_rounds(path: &Path, rounds: &[RoundEntry]) -> Result<(), HarnessError> {
    let mut w = open_writer(path)?;
    for entry in rounds {
        w.serialize(RoundRow {
            round: entry.round,
            accuracy: entry.accuracy,
            selected: join(&entry.selected),
            samples: join(&entry.samples),
            seconds: join(&entry.seconds),
        })
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_rounds(path: &Path) -> Result<Vec<RoundEntry>, HarnessError> {
    let mut r = open_reader(path)?;
    let mut out = Vec::new();
    for row in r.deserialize::<RoundRow>() {
        let row = row.map_err(|e| csv_err(path, e))?;
        out.push(RoundEntry {
            round: row.round,
            accuracy: row.accuracy,
            selected: split_parse(&row.selected, path)?,
            samples: split_parse(&row.samples, path)?,
            seconds: split_parse(&row.seconds, path)?,
        });
    }
    Ok(out)
}

pub fn write_energy(path: &Path, entries: &[EnergyEntry]) -> Result<(), HarnessError> {
    let mut w = open_writer(path)?;
    for entry in entries {
        w.serialize(entry).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_energy(path: &Path) -> Result<Vec<EnergyEntry>, HarnessError> {
    let mut r = open_reader(path)?;
    let mut out = Vec::new();
    for row in r.deserialize::<EnergyEntry>() {
        out.push(row.map_err(|e| csv_err(path, e))?);
    }
    Ok(out)
}

/// One client's position in the two-component projection, tagged with its
/// cluster assignment so the file plots directly as a colored scatter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaRow {
    pub client_id: usize,
    pub pc1: f64,
    pub pc2: f64,
    pub cluster_id: usize,
    pub is_medoid: bool,
}

pub fn write_pca(
    path: &Path,
    projection: &PcaProjection,
    model: &ClusterModel,
) -> Result<(), HarnessError> {
    let mut w = open_writer(path)?;
    for (client_id, point) in projection.points.iter().enumerate() {
        w.serialize(PcaRow {
            client_id,
            pc1: point[0],
            pc2: point[1],
            cluster_id: model.assignment()[client_id],
            is_medoid: model.medoids().contains(&client_id),
        })
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_pca(path: &Path) -> Result<Vec<PcaRow>, HarnessError> {
    let mut r = open_reader(path)?;
    let mut out = Vec::new();
    for row in r.deserialize::<PcaRow>() {
        out.push(row.map_err(|e| csv_err(path, e))?);
    }
    Ok(out)
}

/// One client's cluster assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRow {
    pub client_id: usize,
    pub cluster_id: usize,
    pub is_medoid: bool,
}

pub fn write_clusters(path: &Path, model: &ClusterModel) -> Result<(), HarnessError> {
    let mut w = open_writer(path)?;
    for (client_id, &cluster_id) in model.assignment().iter().enumerate() {
        w.serialize(ClusterRow {
            client_id,
            cluster_id,
            is_medoid: model.medoids().contains(&client_id),
        })
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_clusters(path: &Path) -> Result<Vec<ClusterRow>, HarnessError> {
    let mut r = open_reader(path)?;
    let mut out = Vec::new();
    for row in r.deserialize::<ClusterRow>() {
        out.push(row.map_err(|e| csv_err(path, e))?);
    }
    Ok(out)
}

/// Write the client-by-class label-distribution matrix with one row per
/// client: `client_id, p0, p1, ...`.
pub fn write_pmatrix(path: &Path, matrix: &LabelMatrix) -> Result<(), HarnessError> {
    let mut w = open_writer(path)?;
    let mut header = vec!["client_id".to_string()];
    header.extend((0..matrix.classes()).map(|k| format!("p{k}")));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for i in 0..matrix.clients() {
        let mut record = vec![i.to_string()];
        record.extend(matrix.row(i).iter().map(|p| p.to_string()));
        w.write_record(&record).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Write a client-by-client dissimilarity matrix: `client_id, d0, d1, ...`.
pub fn write_dmatrix(path: &Path, matrix: &DissimilarityMatrix) -> Result<(), HarnessError> {
    let mut w = open_writer(path)?;
    let mut header = vec!["client_id".to_string()];
    header.extend((0..matrix.n()).map(|j| format!("d{j}")));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for i in 0..matrix.n() {
        let mut record = vec![i.to_string()];
        record.extend((0..matrix.n()).map(|j| matrix.get(i, j).to_string()));
        w.write_record(&record).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_table(path: &Path, rows: &[TableRow]) -> Result<(), HarnessError> {
    let mut w = open_writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_table(path: &Path) -> Result<Vec<TableRow>, HarnessError> {
    let mut r = open_reader(path)?;
    let mut out = Vec::new();
    for row in r.deserialize::<TableRow>() {
        out.push(row.map_err(|e| csv_err(path, e))?);
    }
    Ok(out)
}

pub fn write_savings(path: &Path, rows: &[SavingsRow]) -> Result<(), HarnessError> {
    let mut w = open_writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_savings(path: &Path) -> Result<Vec<SavingsRow>, HarnessError> {
    let mut r = open_reader(path)?;
    let mut out = Vec::new();
    for row in r.deserialize::<SavingsRow>() {
        out.push(row.map_err(|e| csv_err(path, e))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_log_survives_a_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rounds.csv");
        let rounds = vec![
            RoundEntry {
                round: 0,
                selected: vec![],
                samples: vec![],
                seconds: vec![],
                accuracy: 0.1,
            },
            RoundEntry {
                round: 1,
                selected: vec![2, 5, 9],
                samples: vec![40, 17, 33],
                seconds: vec![0.9, 0.67, 0.8300000000000001],
                accuracy: 0.7123456789012345,
            },
        ];
        write_rounds(&path, &rounds).unwrap();
        assert_eq!(read_rounds(&path).unwrap(), rounds);
    }

    #[test]
    fn energy_log_survives_a_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("energy.csv");
        let entries = vec![
            EnergyEntry {
                round: 1,
                client: 2,
                seconds: 36.0,
                wh: 1.0,
            },
            EnergyEntry {
                round: 2,
                client: 0,
                seconds: 0.1,
                wh: 0.002777777777777778,
            },
        ];
        write_energy(&path, &entries).unwrap();
        assert_eq!(read_energy(&path).unwrap(), entries);
    }

    #[test]
    fn table_and_savings_round_trip_with_missing_values() {
        let dir = tempfile::tempdir().unwrap();
        let table = vec![
            TableRow {
                strategy: "cosine".into(),
                clustered: true,
                mean_clients_per_round: 3.2,
                mean_rounds: 41.8,
                mean_energy_wh: 219.4561,
                mean_accuracy_std: Some(0.0016996731711975958),
                converged_seeds: 5,
                total_seeds: 5,
            },
            TableRow {
                strategy: "random_n3".into(),
                clustered: false,
                mean_clients_per_round: 3.0,
                mean_rounds: 88.0,
                mean_energy_wh: 431.75,
                mean_accuracy_std: None,
                converged_seeds: 0,
                total_seeds: 5,
            },
        ];
        let tpath = dir.path().join("table.csv");
        write_table(&tpath, &table).unwrap();
        assert_eq!(read_table(&tpath).unwrap(), table);

        let savings = vec![
            SavingsRow {
                metric: "cosine".into(),
                clustered_rounds: 41.8,
                clustered_energy_wh: 219.4561,
                baseline: Some("random_n3".into()),
                baseline_rounds: Some(88.0),
                baseline_energy_wh: Some(431.75),
                rounds_reduction_pct: Some(52.5),
                energy_reduction_pct: Some(49.17),
            },
            SavingsRow {
                metric: "kl".into(),
                clustered_rounds: 70.0,
                clustered_energy_wh: 400.0,
                baseline: None,
                baseline_rounds: None,
                baseline_energy_wh: None,
                rounds_reduction_pct: None,
                energy_reduction_pct: None,
            },
        ];
        let spath = dir.path().join("savings.csv");
        write_savings(&spath, &savings).unwrap();
        assert_eq!(read_savings(&spath).unwrap(), savings);
    }

    #[test]
    fn cluster_and_pca_rows_round_trip() {
        use crate::clustering::kmedoids;
        use crate::distmatrix::{pca_project, LabelMatrix};
        use crate::metrics::{pairwise_dissimilarity, MetricId};

        let rows = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.9, 0.1, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.1, 0.0, 0.9],
        ];
        let matrix = LabelMatrix::new(rows, 3).unwrap();
        let d = pairwise_dissimilarity(&matrix, MetricId::Euclidean).unwrap();
        let model = kmedoids(&d, 2).unwrap();
        let projection = pca_project(&matrix).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let cpath = dir.path().join("clusters.csv");
        write_clusters(&cpath, &model).unwrap();
        let clusters = read_clusters(&cpath).unwrap();
        assert_eq!(clusters.len(), 4);
        assert_eq!(clusters[0].cluster_id, clusters[1].cluster_id);
        assert_ne!(clusters[0].cluster_id, clusters[2].cluster_id);
        assert_eq!(clusters.iter().filter(|r| r.is_medoid).count(), 2);

        let ppath = dir.path().join("pca.csv");
        write_pca(&ppath, &projection, &model).unwrap();
        let pca = read_pca(&ppath).unwrap();
        assert_eq!(pca.len(), 4);
        for (i, row) in pca.iter().enumerate() {
            assert_eq!(row.client_id, i);
            assert_eq!(row.pc1, projection.points[i][0]);
            assert_eq!(row.pc2, projection.points[i][1]);
        }
    }

    #[test]
    fn matrix_exports_have_headers_and_full_rows() {
        use crate::distmatrix::LabelMatrix;
        use crate::metrics::{pairwise_dissimilarity, MetricId};

        let matrix =
            LabelMatrix::new(vec![vec![0.5, 0.5], vec![1.0, 0.0], vec![0.0, 1.0]], 2).unwrap();
        let dir = tempfile::tempdir().unwrap();

        let ppath = dir.path().join("pmatrix.csv");
        write_pmatrix(&ppath, &matrix).unwrap();
        let text = std::fs::read_to_string(&ppath).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "client_id,p0,p1");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,0.5,0.5"));

        let d = pairwise_dissimilarity(&matrix, MetricId::Manhattan).unwrap();
        let dpath = dir.path().join("dmatrix.csv");
        write_dmatrix(&dpath, &d).unwrap();
        let text = std::fs::read_to_string(&dpath).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "client_id,d0,d1,d2");
        assert_eq!(lines.len(), 4);
        // Diagonal is exactly zero.
        assert!(lines[1].starts_with("0,0,"));
    }

    #[test]
    fn empty_selection_lists_read_back_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rounds.csv");
        let rounds = vec![RoundEntry {
            round: 0,
            selected: vec![],
            samples: vec![],
            seconds: vec![],
            accuracy: 0.25,
        }];
        write_rounds(&path, &rounds).unwrap();
        let back = read_rounds(&path).unwrap();
        assert!(back[0].selected.is_empty());
        assert!(back[0].samples.is_empty());
        assert!(back[0].seconds.is_empty());
    }
}
