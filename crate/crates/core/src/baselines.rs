//! Comparison methods.
//!
//! Scalar confidences (max logit, entropy, margin, energy) are computed on
//! the final classifier logits and turned into error scores by a single
//! negation in [`error_scores`]. The learned baselines (top-K logits,
//! Mahalanobis layer scores, linear probing on CLS states) produce a
//! [`FeatureMatrix`] that goes through the same probe as LogitDynamics.

use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{HiddenStateDataset, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::feature_matrix::FeatureMatrix;
use crate::ranking::top_k_indices;

pub const COVARIANCE_EPS: f64 = 1e-6;

fn to_f64<T: Copy + Into<f64>>(z: &[T]) -> impl Iterator<Item = f64> + Clone + '_ {
    z.iter().map(|&v| v.into())
}

fn log_sum_exp(z: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = z.clone().fold(f64::NEG_INFINITY, f64::max);
    max + z.map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn score_max_logit<T: Copy + Into<f64>>(z: &[T]) -> f64 {
    to_f64(z).fold(f64::NEG_INFINITY, f64::max)
}

/// Shannon entropy (nats) of `softmax(z)`.
pub fn softmax_entropy<T: Copy + Into<f64>>(z: &[T]) -> f64 {
    let lse = log_sum_exp(to_f64(z));
    -to_f64(z)
        .map(|v| {
            let lp = v - lse;
            let p = lp.exp();
            if p > 0.0 {
                p * lp
            } else {
                0.0
            }
        })
        .sum::<f64>()
}

/// Negative softmax entropy, so that larger means more confident.
pub fn score_entropy<T: Copy + Into<f64>>(z: &[T]) -> f64 {
    -softmax_entropy(z)
}

pub fn score_margin<T: Copy + Into<f64>>(z: &[T]) -> Result<f64> {
    if z.len() < 2 {
        return Err(Error::InvalidConfig("margin needs at least two classes".into()));
    }
    let top = top_k_indices(z, 2);
    Ok(z[top[0]].into() - z[top[1]].into())
}

/// Negative energy, `T · logsumexp(z / T)`.
pub fn score_energy<T: Copy + Into<f64>>(z: &[T], temperature: f64) -> Result<f64> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "energy temperature must be positive, got {temperature}"
        )));
    }
    Ok(temperature * log_sum_exp(to_f64(z).map(|v| v / temperature)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarMethod {
    MaxLogit,
    Entropy,
    Margin,
    Energy,
}

impl ScalarMethod {
    pub const ALL: [ScalarMethod; 4] = [Self::MaxLogit, Self::Entropy, Self::Margin, Self::Energy];

    pub fn name(self) -> &'static str {
        match self {
            Self::MaxLogit => "max-logit",
            Self::Entropy => "entropy",
            Self::Margin => "margin",
            Self::Energy => "energy",
        }
    }

    /// Confidence of one logit vector; higher = more confident.
    pub fn confidence<T: Copy + Into<f64>>(self, z: &[T], temperature: f64) -> Result<f64> {
        match self {
            Self::MaxLogit => Ok(score_max_logit(z)),
            Self::Entropy => Ok(score_entropy(z)),
            Self::Margin => score_margin(z),
            Self::Energy => score_energy(z, temperature),
        }
    }
}

/// Per-example error scores (negated confidence) on the final logits.
pub fn error_scores(ds: &TrajectoryDataset, method: ScalarMethod, temperature: f64) -> Result<Vec<f64>> {
    (0..ds.n_examples())
        .into_par_iter()
        .map(|i| method.confidence(ds.final_logits(i), temperature).map(|s| -s))
        .collect()
}

/// The `k` largest entries of `z`, descending.
pub fn topk_logit_features<T: Copy + Into<f64>>(z: &[T], k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > z.len() {
        return Err(Error::InvalidConfig(format!(
            "top-K needs 1 <= K <= C, got K={k}, C={}",
            z.len()
        )));
    }
    Ok(top_k_indices(z, k).into_iter().map(|c| z[c].into()).collect())
}

/// Top-K final logits of every example, columns `top1..topK`.
pub fn topk_logit_matrix(ds: &TrajectoryDataset, k: usize) -> Result<FeatureMatrix> {
    let mut data = Vec::with_capacity(ds.n_examples() * k);
    for i in 0..ds.n_examples() {
        data.extend(topk_logit_features(ds.final_logits(i), k)?);
    }
    let names = (1..=k).map(|r| format!("top{r}")).collect();
    FeatureMatrix::new(data, k, ds.errors(), names, None)
}

/// Class-conditional Gaussians with a tied covariance, one set per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MahalanobisModel {
    pub layers: Vec<usize>,
    pub hidden_dim: usize,
    /// Classes that had enough fit samples, in ascending order.
    pub classes: Vec<u32>,
    /// `means[l]` is `classes.len() × hidden_dim`, row-major.
    pub means: Vec<Vec<f64>>,
    /// `precisions[l]` is `hidden_dim × hidden_dim`, row-major.
    pub precisions: Vec<Vec<f64>>,
}

/// Fits class means and the pooled within-class covariance of each layer
/// on `fit_rows`. Classes with fewer than two samples are dropped.
pub fn fit_mahalanobis(
    hs: &HiddenStateDataset,
    fit_rows: &[usize],
    layers: &[usize],
) -> Result<MahalanobisModel> {
    if let Some(&bad) = layers.iter().find(|&&t| t >= hs.n_layers()) {
        return Err(Error::DimensionMismatch(format!(
            "layer {bad} out of range for {} layers",
            hs.n_layers()
        )));
    }
    let mut counts = vec![0usize; hs.n_classes()];
    for &i in fit_rows {
        counts[hs.true_label(i) as usize] += 1;
    }
    let classes: Vec<u32> = (0..hs.n_classes() as u32)
        .filter(|&c| counts[c as usize] >= 2)
        .collect();
    let dropped = counts.iter().filter(|&&n| n == 1).count();
    if dropped > 0 {
        log::warn!("mahalanobis: dropped {dropped} classes with a single fit sample");
    }
    if classes.len() < 2 {
        return Err(Error::SingleClass(format!(
            "mahalanobis needs two classes with >= 2 samples, found {}",
            classes.len()
        )));
    }
    let mut slot = vec![usize::MAX; hs.n_classes()];
    for (s, &c) in classes.iter().enumerate() {
        slot[c as usize] = s;
    }
    let rows: Vec<usize> = fit_rows
        .iter()
        .copied()
        .filter(|&i| slot[hs.true_label(i) as usize] != usize::MAX)
        .collect();

    let h = hs.hidden_dim();
    let mut means = Vec::with_capacity(layers.len());
    let mut precisions = Vec::with_capacity(layers.len());
    for &t in layers {
        let mut mu = vec![0.0; classes.len() * h];
        for &i in &rows {
            let s = slot[hs.true_label(i) as usize];
            for (m, &v) in mu[s * h..(s + 1) * h].iter_mut().zip(hs.state(i, t)) {
                *m += v as f64;
            }
        }
        for (s, &c) in classes.iter().enumerate() {
            let n = counts[c as usize] as f64;
            mu[s * h..(s + 1) * h].iter_mut().for_each(|m| *m /= n);
        }

        let mut cov = DMatrix::<f64>::zeros(h, h);
        let mut d = vec![0.0; h];
        for &i in &rows {
            let s = slot[hs.true_label(i) as usize];
            for ((dj, &v), m) in d.iter_mut().zip(hs.state(i, t)).zip(&mu[s * h..(s + 1) * h]) {
                *dj = v as f64 - m;
            }
            for a in 0..h {
                for b in a..h {
                    cov[(a, b)] += d[a] * d[b];
                }
            }
        }
        let n = rows.len() as f64;
        for a in 0..h {
            for b in a..h {
                let v = cov[(a, b)] / n;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }
        // Zero scatter (every sample on its mean) still gets an SPD matrix.
        let scale = match cov.trace() / h as f64 {
            s if s > 0.0 => s,
            _ => 1.0,
        };
        for a in 0..h {
            cov[(a, a)] += COVARIANCE_EPS * scale;
        }
        let chol = cov
            .cholesky()
            .ok_or_else(|| Error::Numeric(format!("layer {t} covariance is not positive definite")))?;
        let p = chol.inverse();
        means.push(mu);
        precisions.push(p.transpose().as_slice().to_vec());
    }

    Ok(MahalanobisModel {
        layers: layers.to_vec(),
        hidden_dim: h,
        classes,
        means,
        precisions,
    })
}

impl MahalanobisModel {
    /// `max_c −(x − μ_c)ᵀ Σ⁻¹ (x − μ_c)` for layer slot `l`.
    pub fn layer_score<T: Copy + Into<f64>>(&self, l: usize, x: &[T]) -> Result<f64> {
        let h = self.hidden_dim;
        if x.len() != h {
            return Err(Error::DimensionMismatch(format!(
                "state has {} dims, model expects {h}",
                x.len()
            )));
        }
        let p = &self.precisions[l];
        let mut d = vec![0.0; h];
        let mut best = f64::NEG_INFINITY;
        for mu in self.means[l].chunks_exact(h) {
            for ((dj, &v), m) in d.iter_mut().zip(x).zip(mu) {
                *dj = v.into() - m;
            }
            let q: f64 = p
                .chunks_exact(h)
                .zip(&d)
                .map(|(row, &da)| da * row.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>())
                .sum();
            best = best.max(-q);
        }
        Ok(best)
    }
}

/// One score per model layer for a single example.
pub fn mahalanobis_layer_scores(m: &MahalanobisModel, hs: &HiddenStateDataset, i: usize) -> Result<Vec<f64>> {
    if hs.hidden_dim() != m.hidden_dim {
        return Err(Error::DimensionMismatch(format!(
            "hidden_dim {} vs model {}",
            hs.hidden_dim(),
            m.hidden_dim
        )));
    }
    m.layers
        .iter()
        .enumerate()
        .map(|(l, &t)| {
            if t >= hs.n_layers() {
                return Err(Error::DimensionMismatch(format!(
                    "model layer {t} missing from a {}-layer dataset",
                    hs.n_layers()
                )));
            }
            m.layer_score(l, hs.state(i, t))
        })
        .collect()
}

/// Layer scores of every example as probe inputs, columns `maha_l{t}`.
pub fn mahalanobis_features(m: &MahalanobisModel, hs: &HiddenStateDataset) -> Result<FeatureMatrix> {
    let rows: Vec<Vec<f64>> = (0..hs.n_examples())
        .into_par_iter()
        .map(|i| mahalanobis_layer_scores(m, hs, i))
        .collect::<Result<_>>()?;
    let names = m.layers.iter().map(|t| format!("maha_l{t}")).collect();
    FeatureMatrix::new(rows.concat(), m.layers.len(), hs.errors(), names, None)
}

/// Raw CLS state at `layer` as probe inputs, columns `h0..h{H-1}`.
pub fn linear_probe_features(hs: &HiddenStateDataset, layer: usize) -> Result<FeatureMatrix> {
    if layer >= hs.n_layers() {
        return Err(Error::DimensionMismatch(format!(
            "layer {layer} out of range for {} layers",
            hs.n_layers()
        )));
    }
    let h = hs.hidden_dim();
    let mut data = Vec::with_capacity(hs.n_examples() * h);
    for i in 0..hs.n_examples() {
        data.extend(hs.state(i, layer).iter().map(|&v| v as f64));
    }
    let names = (0..h).map(|j| format!("h{j}")).collect();
    FeatureMatrix::new(data, h, hs.errors(), names, None)
}

/// Writes `example_id,method,error_score` rows, one block per method.
pub fn write_scores_csv(path: impl AsRef<Path>, scores: &[(String, Vec<f64>)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["example_id", "method", "error_score"])?;
    for (method, s) in scores {
        for (i, v) in s.iter().enumerate() {
            w.write_record([i.to_string(), method.clone(), v.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}
