//! Linear error predictor.
//!
//! Features are standardized with statistics from the probe-train rows
//! only. The probe is a logistic model trained with AdamW on binary
//! cross-entropy whose positive (error) term is weighted by `N_neg / N_pos`
//! of probe-train. After every epoch the probe-val AUCPR is measured and
//! the best epoch (earliest on ties) is kept.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::feature_matrix::FeatureMatrix;
use crate::metrics::aucpr;
use crate::optim::AdamW;
use crate::splits::SplitAssignment;

pub const STD_FLOOR: f64 = 1e-8;
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Which rows the statistics came from, e.g. `"probe_train"`.
    pub source: String,
}

/// Column means and population standard deviations over `rows`.
pub fn fit_standardizer(x: &FeatureMatrix, rows: &[usize], source: &str) -> Result<Standardizer> {
    if rows.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "standardizer needs at least 2 rows, got {}",
            rows.len()
        )));
    }
    let f = x.n_features();
    let n = rows.len() as f64;
    let mut mean = vec![0.0; f];
    for &i in rows {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; f];
    for &i in rows {
        for ((s, v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var.into_iter().map(|s| (s / n).sqrt().max(STD_FLOOR)).collect();
    Ok(Standardizer {
        mean,
        std,
        source: source.to_string(),
    })
}

impl Standardizer {
    pub fn transform_into(&self, x: &[f64], out: &mut [f64]) {
        for (((o, v), m), s) in out.iter_mut().zip(x).zip(&self.mean).zip(&self.std) {
            *o = (v - m) / s;
        }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.transform_into(x, &mut out);
        out
    }
}

pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Positive-weighted binary cross-entropy of one prediction.
pub fn weighted_bce(p: f64, is_error: bool, pos_weight: f64) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if is_error {
        -pos_weight * p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Mean weighted BCE over `rows` of the standardized matrix `z` (row-major,
/// `f` columns) and its gradient w.r.t. `[weights..., bias]`.
pub fn loss_and_grad(
    params: &[f64],
    z: &[f64],
    f: usize,
    labels: &[bool],
    rows: &[usize],
    pos_weight: f64,
) -> (f64, Vec<f64>) {
    let (w, b) = params.split_at(f);
    let mut grad = vec![0.0; f + 1];
    let mut loss = 0.0;
    for &i in rows {
        let x = &z[i * f..(i + 1) * f];
        let s = b[0] + w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
        let p = sigmoid(s);
        loss += weighted_bce(p, labels[i], pos_weight);
        let ds = if labels[i] { -pos_weight * (1.0 - p) } else { p };
        for (g, v) in grad.iter_mut().zip(x) {
            *g += ds * v;
        }
        grad[f] += ds;
    }
    let n = rows.len().max(1) as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    (loss / n, grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            epochs: 100,
            batch_size: 256,
            weight_decay: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardizer: Standardizer,
    pub config: ProbeConfig,
    pub pos_weight: f64,
    /// 1-based epoch whose parameters were kept; 0 = initialization.
    pub best_epoch: usize,
    pub val_aucpr: Option<f64>,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub feature_names_hash: String,
}

pub fn feature_names_hash(names: &[String]) -> String {
    let mut h = Sha256::new();
    for n in names {
        h.update(n.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

fn standardize_all(x: &FeatureMatrix, st: &Standardizer) -> Vec<f64> {
    let f = x.n_features();
    let mut z = vec![0.0; x.n_rows() * f];
    for i in 0..x.n_rows() {
        st.transform_into(x.row(i), &mut z[i * f..(i + 1) * f]);
    }
    z
}

fn decision(params: &[f64], x: &[f64]) -> f64 {
    let f = x.len();
    params[f] + params[..f].iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
}

pub fn train_probe(x: &FeatureMatrix, split: &SplitAssignment, cfg: &ProbeConfig) -> Result<ProbeModel> {
    if !(cfg.lr > 0.0 && cfg.lr.is_finite()) || cfg.batch_size == 0 {
        return Err(Error::InvalidConfig(
            "probe lr and batch size must be positive".into(),
        ));
    }
    split.validate(x.n_rows())?;
    let train = &split.probe_train;
    let n_pos = train.iter().filter(|&&i| x.labels[i]).count();
    let n_neg = train.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass(format!(
            "probe-train has {n_pos} errors and {n_neg} correct examples"
        )));
    }
    let pos_weight = n_neg as f64 / n_pos as f64;
    let standardizer = fit_standardizer(x, train, "probe_train")?;
    let f = x.n_features();
    let z = standardize_all(x, &standardizer);
    let labels = &x.labels;

    let val_labels: Vec<bool> = split.probe_val.iter().map(|&i| labels[i]).collect();
    let val_usable = val_labels.iter().any(|&l| l) && val_labels.iter().any(|&l| !l);
    let val_score = |params: &[f64]| -> Result<f64> {
        let s: Vec<f64> = split
            .probe_val
            .iter()
            .map(|&i| decision(params, &z[i * f..(i + 1) * f]))
            .collect();
        Ok(aucpr(&s, &val_labels)?.aucpr)
    };

    let mut params = vec![0.0; f + 1];
    let (initial_loss, _) = loss_and_grad(&params, &z, f, labels, train, pos_weight);
    let mut best = params.clone();
    let mut best_epoch = 0;
    let mut best_val = if val_usable {
        Some(val_score(&params)?)
    } else {
        None
    };

    let mut opt = AdamW::new(f + 1, cfg.lr, cfg.weight_decay);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order = train.clone();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let (loss, grad) = loss_and_grad(&params, &z, f, labels, batch, pos_weight);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged(format!(
                    "probe loss became {loss} in epoch {epoch}"
                )));
            }
            opt.step(&mut params, &grad);
        }
        if val_usable {
            let v = val_score(&params)?;
            if best_val.is_none_or(|b| v > b) {
                best_val = Some(v);
                best = params.clone();
                best_epoch = epoch;
            }
        } else {
            best = params.clone();
            best_epoch = epoch;
        }
    }

    let (final_loss, _) = loss_and_grad(&best, &z, f, labels, train, pos_weight);
    let bias = best[f];
    best.truncate(f);
    Ok(ProbeModel {
        weights: best,
        bias,
        standardizer,
        config: cfg.clone(),
        pos_weight,
        best_epoch,
        val_aucpr: best_val,
        initial_loss,
        final_loss,
        feature_names_hash: feature_names_hash(&x.feature_names),
    })
}

impl ProbeModel {
    /// Pre-sigmoid score `w · standardize(x) + b`; used for ranking.
    pub fn decision_score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "probe expects {} features, got {}",
                self.weights.len(),
                x.len()
            )));
        }
        let z = self.standardizer.transform(x);
        Ok(self.bias + self.weights.iter().zip(&z).map(|(a, v)| a * v).sum::<f64>())
    }

    /// Probability that the base prediction is wrong.
    pub fn predict_error_score(&self, x: &[f64]) -> Result<f64> {
        self.decision_score(x).map(sigmoid)
    }

    /// Decision scores for every row of `x`.
    pub fn score_matrix(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        (0..x.n_rows()).map(|i| self.decision_score(x.row(i))).collect()
    }

    /// Same weights with standardization statistics refit on `rows` of a
    /// different dataset.
    pub fn transferred(&self, target: &FeatureMatrix, rows: &[usize]) -> Result<ProbeModel> {
        if target.n_features() != self.weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot transfer a {}-feature probe to {} features",
                self.weights.len(),
                target.n_features()
            )));
        }
        let mut m = self.clone();
        m.standardizer = fit_standardizer(target, rows, "target_probe_train")?;
        Ok(m)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, serde_json::to_string_pretty(self)? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
