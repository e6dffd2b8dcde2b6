//! LogitDynamics features.
//!
//! For a trajectory suffix of `L + 1` depths (the last `L` head layers and
//! the classifier) a row is:
//!
//! * per depth, the logit of the final prediction followed by the `K`
//!   largest competitor logits (prediction excluded), depths in order;
//! * optionally, seven statistics of the top-1 / top-K identities across
//!   depth, in the order of [`DYNAMICS_FEATURE_NAMES`].
//!
//! Top-K sets for the dynamics are taken on raw logits and may contain the
//! prediction. Ties always go to the lowest class index.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Trajectory, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::feature_matrix::FeatureMatrix;
use crate::ranking::{argmax, top_k_indices, top_k_indices_excluding};

pub const DYNAMICS_FEATURE_NAMES: [&str; 7] = [
    "top1_switch_rate",
    "topk_weighted_jaccard",
    "unique_topk_count",
    "top1_mode_frequency",
    "top1_entropy",
    "top1_unique_count",
    "top1_commitment_depth",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Number of head layers before the classifier row.
    pub last_l: usize,
    pub top_k: usize,
    pub include_dynamics: bool,
}

impl FeatureConfig {
    pub fn new(last_l: usize, top_k: usize, include_dynamics: bool) -> Self {
        Self {
            last_l,
            top_k,
            include_dynamics,
        }
    }

    pub fn n_features(&self) -> usize {
        (self.last_l + 1) * (self.top_k + 1) + if self.include_dynamics { 7 } else { 0 }
    }

    /// Checks the config against a dataset shape.
    pub fn validate(&self, n_classes: usize, depth: usize) -> Result<()> {
        if self.top_k == 0 || self.top_k >= n_classes {
            return Err(Error::InvalidConfig(format!(
                "top_k must satisfy 1 ≤ K < C (K={}, C={n_classes})",
                self.top_k
            )));
        }
        if self.last_l + 1 > depth {
            return Err(Error::InvalidConfig(format!(
                "last_l + 1 = {} exceeds the trajectory depth {depth}",
                self.last_l + 1
            )));
        }
        Ok(())
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.n_features());
        for j in 0..=self.last_l {
            let tag = if j == self.last_l {
                "clf".to_string()
            } else {
                format!("head{}", j + 1)
            };
            names.push(format!("{tag}_pred"));
            names.extend((1..=self.top_k).map(|r| format!("{tag}_comp{r}")));
        }
        if self.include_dynamics {
            names.extend(DYNAMICS_FEATURE_NAMES.iter().map(|s| s.to_string()));
        }
        names
    }
}

/// `[z_ŷ, top-K competitors descending]` for each depth of `traj`,
/// concatenated in depth order.
pub fn logit_block(traj: Trajectory<'_>, predicted: usize, k: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(traj.depth() * (k + 1));
    push_logit_block(traj, predicted, k, &mut out)?;
    Ok(out)
}

fn push_logit_block(traj: Trajectory<'_>, predicted: usize, k: usize, out: &mut Vec<f64>) -> Result<()> {
    let c = traj.n_classes();
    if k >= c {
        return Err(Error::InvalidConfig(format!(
            "logit block needs K < C (K={k}, C={c})"
        )));
    }
    if predicted >= c {
        return Err(Error::DimensionMismatch(format!(
            "predicted class {predicted} out of range for C={c}"
        )));
    }
    for row in traj.rows() {
        out.push(row[predicted] as f64);
        for j in top_k_indices_excluding(row, k, Some(predicted)) {
            out.push(row[j] as f64);
        }
    }
    Ok(())
}

/// Softmax over the given logits with max subtraction.
pub fn restricted_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// The seven depth-dynamics statistics of a trajectory (every depth of
/// `traj` participates; pass a suffix to restrict to the last `L + 1`).
pub fn dynamics_features(traj: Trajectory<'_>, k: usize) -> Result<[f64; 7]> {
    let c = traj.n_classes();
    if k == 0 || k > c {
        return Err(Error::InvalidConfig(format!(
            "dynamics need 1 ≤ K ≤ C (K={k}, C={c})"
        )));
    }
    let depth = traj.depth();
    let top1: Vec<usize> = traj.rows().map(argmax).collect();
    let sets: Vec<Vec<(usize, f64)>> = traj
        .rows()
        .map(|row| {
            let idx = top_k_indices(row, k);
            let z: Vec<f64> = idx.iter().map(|&i| row[i] as f64).collect();
            idx.into_iter().zip(restricted_softmax(&z)).collect()
        })
        .collect();

    let pairs = depth - 1;
    let (switch_rate, jaccard) = if pairs == 0 {
        (0.0, 1.0)
    } else {
        let switches = top1.windows(2).filter(|w| w[0] != w[1]).count();
        let jw: f64 = sets.windows(2).map(|w| weighted_jaccard(&w[0], &w[1])).sum();
        (switches as f64 / pairs as f64, jw / pairs as f64)
    };

    let mut union: Vec<usize> = sets.iter().flatten().map(|(i, _)| *i).collect();
    union.sort_unstable();
    union.dedup();

    let mut counts: Vec<(usize, usize)> = Vec::new();
    for &t in &top1 {
        match counts.iter_mut().find(|(cls, _)| *cls == t) {
            Some((_, n)) => *n += 1,
            None => counts.push((t, 1)),
        }
    }
    let total = depth as f64;
    let mode = counts.iter().map(|(_, n)| *n).max().unwrap_or(0) as f64 / total;
    // `+ 0.0` turns the −0.0 of a constant top-1 into +0.0.
    let entropy = counts
        .iter()
        .map(|(_, n)| {
            let p = *n as f64 / total;
            -p * p.ln()
        })
        .sum::<f64>()
        + 0.0;

    let last = top1[depth - 1];
    let committed_from = top1.iter().rposition(|&t| t != last).map_or(0, |p| p + 1);
    let commitment = if pairs == 0 {
        0.0
    } else {
        committed_from as f64 / pairs as f64
    };

    Ok([
        switch_rate,
        jaccard,
        union.len() as f64,
        mode,
        entropy,
        counts.len() as f64,
        commitment,
    ])
}

fn weighted_jaccard(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let inter: f64 = a
        .iter()
        .filter_map(|(i, wa)| b.iter().find(|(j, _)| j == i).map(|(_, wb)| wa.min(*wb)))
        .sum();
    let mass_a: f64 = a.iter().map(|(_, w)| w).sum();
    let mass_b: f64 = b.iter().map(|(_, w)| w).sum();
    inter / (mass_a + mass_b - inter)
}

/// One feature row for a full trajectory and its prediction.
pub fn feature_row(traj: Trajectory<'_>, predicted: usize, cfg: &FeatureConfig) -> Result<Vec<f64>> {
    let suffix = traj.suffix(cfg.last_l + 1);
    let mut row = Vec::with_capacity(cfg.n_features());
    push_logit_block(suffix, predicted, cfg.top_k, &mut row)?;
    if cfg.include_dynamics {
        row.extend(dynamics_features(suffix, cfg.top_k)?);
    }
    Ok(row)
}

/// Feature matrix of a whole dataset; labels are the error indicators.
pub fn build_features(ds: &TrajectoryDataset, cfg: &FeatureConfig) -> Result<FeatureMatrix> {
    cfg.validate(ds.n_classes(), ds.depth())?;
    let f = cfg.n_features();
    let mut data = vec![0.0; ds.n_examples() * f];
    data.par_chunks_mut(f.max(1))
        .enumerate()
        .try_for_each(|(i, out)| -> Result<()> {
            let row = feature_row(ds.trajectory(i), ds.predicted_label(i) as usize, cfg)?;
            out.copy_from_slice(&row);
            Ok(())
        })?;
    FeatureMatrix::new(data, f, ds.errors(), cfg.feature_names(), Some(*cfg))
}
