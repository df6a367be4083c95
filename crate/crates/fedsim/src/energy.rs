//! Energy accounting for simulated training: power models, timing models,
//! and a per-round ledger.
//!
//! Only computational energy of clients that actually train is counted: a
//! client not selected in a round spends nothing. Energy is
//! `power (W) * time (s) / 3600`, reported in watt-hours.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("power must be finite and > 0, got {0} W")]
    BadPower(f64),
    #[error("no per-client power entry for client {client} (have {have})")]
    MissingClient { client: usize, have: usize },
    #[error("training time must be finite and >= 0, got {0} s")]
    BadSeconds(f64),
    #[error("timing coefficient must be finite and >= 0, got {0}")]
    BadCoefficient(f64),
}

/// Hardware power draw during local training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PowerModel {
    /// Every client draws the same wattage.
    Uniform(f64),
    /// Client `i` draws `watts[i]`.
    PerClient(Vec<f64>),
}

impl PowerModel {
    /// Validate the model's wattages once, up front.
    pub fn validate(&self) -> Result<(), EnergyError> {
        let all = match self {
            PowerModel::Uniform(w) => std::slice::from_ref(w),
            PowerModel::PerClient(v) => v.as_slice(),
        };
        for &w in all {
            if !(w.is_finite() && w > 0.0) {
                return Err(EnergyError::BadPower(w));
            }
        }
        if let PowerModel::PerClient(v) = self {
            if v.is_empty() {
                return Err(EnergyError::MissingClient { client: 0, have: 0 });
            }
        }
        Ok(())
    }

    /// Power draw of `client` in watts.
    pub fn watts(&self, client: usize) -> Result<f64, EnergyError> {
        match self {
            PowerModel::Uniform(w) => Ok(*w),
            PowerModel::PerClient(v) => v.get(client).copied().ok_or(EnergyError::MissingClient {
                client,
                have: v.len(),
            }),
        }
    }
}

/// Where a local-training duration comes from.
///
/// `Wall` uses the measured wall-clock time of the simulated training step —
/// honest but machine-dependent. `Injected` derives the duration from the
/// workload instead: `base_seconds + per_sample_seconds * samples * epochs`,
/// which makes runs reproducible byte-for-byte across machines and is the
/// default everywhere results are compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TimingModel {
    Wall,
    Injected {
        base_seconds: f64,
        per_sample_seconds: f64,
    },
}

impl TimingModel {
    pub fn validate(&self) -> Result<(), EnergyError> {
        if let TimingModel::Injected {
            base_seconds,
            per_sample_seconds,
        } = *self
        {
            for c in [base_seconds, per_sample_seconds] {
                if !(c.is_finite() && c >= 0.0) {
                    return Err(EnergyError::BadCoefficient(c));
                }
            }
        }
        Ok(())
    }

    /// Duration to charge for one local training step.
    pub fn train_seconds(&self, wall_seconds: f64, samples: usize, epochs: usize) -> f64 {
        match *self {
            TimingModel::Wall => wall_seconds,
            TimingModel::Injected {
                base_seconds,
                per_sample_seconds,
            } => base_seconds + per_sample_seconds * samples as f64 * epochs as f64,
        }
    }
}

/// One client's energy charge for one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEntry {
    pub round: usize,
    pub client: usize,
    pub seconds: f64,
    pub wh: f64,
}

/// Append-only record of every charged training step in a run.
#[derive(Debug, Clone, Default)]
pub struct EnergyLedger {
    entries: Vec<EnergyEntry>,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Charge `watts * seconds / 3600` watt-hours to `client` in `round`,
    /// returning the charged amount.
    pub fn record(
        &mut self,
        round: usize,
        client: usize,
        watts: f64,
        seconds: f64,
    ) -> Result<f64, EnergyError> {
        if !(watts.is_finite() && watts > 0.0) {
            return Err(EnergyError::BadPower(watts));
        }
        if !(seconds.is_finite() && seconds >= 0.0) {
            return Err(EnergyError::BadSeconds(seconds));
        }
        let wh = watts * seconds / 3600.0;
        self.entries.push(EnergyEntry {
            round,
            client,
            seconds,
            wh,
        });
        Ok(wh)
    }

    /// Every entry, in the order charged.
    pub fn entries(&self) -> &[EnergyEntry] {
        &self.entries
    }

    /// Total energy across all entries, Kahan-summed so totals are stable
    /// regardless of run length.
    pub fn total_wh(&self) -> f64 {
        let mut sum = 0.0f64;
        let mut carry = 0.0f64;
        for e in &self.entries {
            let y = e.wh - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
        }
        sum
    }
}
