use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{DerivativeKind, Seeds};
use crate::error::{Error, Result};
use crate::feature_net::ActivationKind;
use crate::optimizer::Algorithm;
use crate::problems::Hyperparams;

/// One solve or one optimizer run inside a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub label: String,
    pub activation: ActivationKind,
    pub derivative: DerivativeKind,
    pub algorithm: Option<Algorithm>,
    /// Hyperparameters of the solve (the best found, for optimizer runs).
    pub hyperparams: Hyperparams,
    /// L² relative error per field, plus post-processed fields where present.
    pub fvals: BTreeMap<String, f64>,
    pub fitness: f64,
    pub residual_norm: Option<f64>,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub newton_iterations: Option<usize>,
    /// Inner solves spent by an optimizer run.
    pub evaluations: Option<usize>,
    pub seconds: f64,
}

impl ReportEntry {
    pub(crate) fn new(
        label: impl Into<String>,
        activation: ActivationKind,
        derivative: DerivativeKind,
        hyperparams: Hyperparams,
    ) -> Self {
        ReportEntry {
            label: label.into(),
            activation,
            derivative,
            algorithm: None,
            hyperparams,
            fvals: BTreeMap::new(),
            fitness: f64::NAN,
            residual_norm: None,
            rows: None,
            cols: None,
            newton_iterations: None,
            evaluations: None,
            seconds: 0.0,
        }
    }
}

/// Summary written as `report.json` next to the CSV outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub problem: String,
    pub seeds: Seeds,
    pub wall_seconds: f64,
    pub entries: Vec<ReportEntry>,
    /// Derived scalars such as the FD-over-analytic error ratio.
    pub summary: BTreeMap<String, f64>,
    pub artifacts: Vec<PathBuf>,
}

impl RunReport {
    pub fn entry(&self, label: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
