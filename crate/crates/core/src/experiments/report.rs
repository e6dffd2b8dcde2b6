//! Evaluation report: one JSON document plus flat CSVs and heatmaps.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::Method;
use super::heatmap::{emit_heatmap, Matrix};
use crate::error::{Error, Result};

/// Hyperparameters a method ended up with; unused fields are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Chosen {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head_lr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head_epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_best_epoch: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub test_aucpr: f64,
    /// Probe-val AUCPR of the selected configuration (learned methods).
    pub val_aucpr: Option<f64>,
    pub chosen: Chosen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSummary {
    pub size: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub n_examples: usize,
    pub n_classes: usize,
    /// Trajectory depth available to LogitDynamics.
    pub depth: usize,
    pub n_layers: Option<usize>,
    pub hidden_dim: Option<usize>,
    pub misclassification_rate: f64,
    pub p_probe: f64,
    pub split_seed: u64,
    pub subsets: BTreeMap<String, SubsetSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetResult {
    pub dataset: String,
    pub methods: Vec<MethodResult>,
    /// LogitDynamics minus the reference competitor.
    pub delta: Option<f64>,
    pub delta_reference: Option<String>,
    /// Enabled methods that could not run on this dataset.
    pub skipped: Vec<String>,
}

impl DatasetResult {
    pub fn get(&self, m: Method) -> Option<&MethodResult> {
        self.methods.iter().find(|r| r.method == m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossResult {
    /// Method name → train × test AUCPR.
    pub aucpr: BTreeMap<String, Matrix>,
    /// Method name → LogitDynamics minus method, cell-wise.
    pub difference_vs_logit_dynamics: BTreeMap<String, Matrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResult {
    pub with_dynamics: Matrix,
    pub without_dynamics: Matrix,
    /// With minus without.
    pub difference: Matrix,
    pub mean_diagonal: Option<f64>,
    pub mean_off_diagonal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub run_id: String,
    /// Seconds since the Unix epoch; the only non-deterministic field.
    pub generated_at: u64,
    pub seed: u64,
    pub feature_grid: Vec<(usize, usize)>,
    pub datasets: Vec<DatasetSummary>,
    pub in_distribution: Vec<DatasetResult>,
    pub cross: Option<CrossResult>,
    pub ablation: Option<AblationResult>,
}

/// One entry of the competitor list used for Δ.
#[derive(Debug, Clone, PartialEq)]
pub struct Competitor {
    pub name: String,
    pub aucpr: f64,
    /// Trains a probe on labelled features.
    pub learned: bool,
}

/// `ld − best competitor`, where the competitor pool is the learned
/// methods when any are present and every method otherwise. Returns the
/// reference name alongside; `None` without competitors.
pub fn delta_vs_best(ld: f64, competitors: &[Competitor]) -> Option<(f64, String)> {
    let learned: Vec<&Competitor> = competitors.iter().filter(|c| c.learned).collect();
    let pool: Vec<&Competitor> = if learned.is_empty() {
        competitors.iter().collect()
    } else {
        learned
    };
    // First listed wins on ties.
    let best = pool
        .into_iter()
        .reduce(|a, b| if b.aucpr > a.aucpr { b } else { a })?;
    Some((ld - best.aucpr, best.name.clone()))
}

/// Fills `delta` / `delta_reference` from the method rows.
pub fn attach_delta(r: &mut DatasetResult) {
    let Some(ld) = r.get(Method::LogitDynamics).map(|m| m.test_aucpr) else {
        r.delta = None;
        r.delta_reference = None;
        return;
    };
    let competitors: Vec<Competitor> = r
        .methods
        .iter()
        .filter(|m| m.method != Method::LogitDynamics)
        .map(|m| Competitor {
            name: m.method.name().to_string(),
            aucpr: m.test_aucpr,
            learned: m.method.is_learned(),
        })
        .collect();
    match delta_vs_best(ld, &competitors) {
        Some((d, name)) => {
            r.delta = Some(d);
            r.delta_reference = Some(name);
        }
        None => {
            r.delta = None;
            r.delta_reference = None;
        }
    }
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Writes `report.json`, `in_distribution.csv` and every matrix as CSV
    /// plus SVG into `dir` (created if missing).
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json = dir.join("report.json");
        fs::write(&json, self.to_json()?).map_err(|e| Error::io(&json, e))?;

        let mut w = csv::Writer::from_path(dir.join("in_distribution.csv"))?;
        w.write_record(["dataset", "method", "test_aucpr", "val_aucpr"])?;
        for d in &self.in_distribution {
            for m in &d.methods {
                w.write_record([
                    d.dataset.clone(),
                    m.method.name().to_string(),
                    m.test_aucpr.to_string(),
                    m.val_aucpr.map_or(String::new(), |v| v.to_string()),
                ])?;
            }
            w.write_record([
                d.dataset.clone(),
                "delta".to_string(),
                d.delta.map_or(String::new(), |v| v.to_string()),
                String::new(),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;

        if let Some(c) = &self.cross {
            for (name, m) in &c.aucpr {
                m.write_csv(dir.join(format!("cross_aucpr_{name}.csv")))?;
            }
            for (name, m) in &c.difference_vs_logit_dynamics {
                emit_heatmap(
                    m,
                    dir,
                    &format!("cross_diff_{name}"),
                    &format!("AUCPR: logit-dynamics minus {name}"),
                )?;
            }
        }
        if let Some(a) = &self.ablation {
            a.with_dynamics
                .write_csv(dir.join("ablation_with_dynamics.csv"))?;
            a.without_dynamics
                .write_csv(dir.join("ablation_without_dynamics.csv"))?;
            emit_heatmap(
                &a.difference,
                dir,
                "ablation_difference",
                "AUCPR: with dynamics minus without",
            )?;
        }
        Ok(())
    }
}
