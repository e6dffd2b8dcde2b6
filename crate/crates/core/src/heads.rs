//! Per-layer linear classification heads on frozen CLS states, and the
//! projection of a hidden-state dataset into logit trajectories.
//!
//! Heads are trained independently (they share no parameters), start from
//! zeros and minimize multinomial cross-entropy with AdamW. Parameters are
//! accumulated in f64 and stored as f32.
//!
//! Blob format, little-endian:
//!
//! ```text
//! "LHED1\0" | u32 n_heads | n_heads × [ u32 layer | u32 C | u32 H | C×H f32 W | C f32 b ]
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{HiddenStateDataset, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::optim::AdamW;

pub const LHED_MAGIC: [u8; 6] = *b"LHED1\0";

#[derive(Debug, Clone, PartialEq)]
pub struct LayerHead {
    pub layer_index: usize,
    pub n_classes: usize,
    pub hidden_dim: usize,
    /// Row-major `n_classes × hidden_dim`.
    pub weight: Vec<f32>,
    pub bias: Vec<f32>,
}

impl LayerHead {
    pub fn zeros(layer_index: usize, n_classes: usize, hidden_dim: usize) -> Self {
        Self {
            layer_index,
            n_classes,
            hidden_dim,
            weight: vec![0.0; n_classes * hidden_dim],
            bias: vec![0.0; n_classes],
        }
    }

    /// `W h + b` in f64.
    pub fn logits(&self, h: &[f32]) -> Vec<f64> {
        debug_assert_eq!(h.len(), self.hidden_dim);
        self.weight
            .chunks_exact(self.hidden_dim)
            .zip(&self.bias)
            .map(|(w, &b)| b as f64 + w.iter().zip(h).map(|(&a, &x)| a as f64 * x as f64).sum::<f64>())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeadTrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for HeadTrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            epochs: 10,
            batch_size: 512,
            weight_decay: 0.0,
            seed: 0,
        }
    }
}

impl HeadTrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) || self.batch_size == 0 {
            return Err(Error::InvalidConfig(
                "head lr and batch size must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    z.iter_mut().for_each(|v| *v /= total);
}

/// Trains one head on `rows`; also returns the mean training loss of each
/// epoch (accumulated over the epoch's minibatches before each update).
pub fn train_layer_head(
    hs: &HiddenStateDataset,
    rows: &[usize],
    layer: usize,
    cfg: &HeadTrainConfig,
) -> Result<(LayerHead, Vec<f64>)> {
    cfg.validate()?;
    if layer >= hs.n_layers() {
        return Err(Error::DimensionMismatch(format!(
            "layer {layer} out of range for {} layers",
            hs.n_layers()
        )));
    }
    let mut distinct = rows.iter().map(|&i| hs.true_label(i));
    let first = distinct.next();
    if first.is_none() || distinct.all(|y| Some(y) == first) {
        return Err(Error::SingleClass(
            "head training needs at least two distinct labels".into(),
        ));
    }

    let (c, h) = (hs.n_classes(), hs.hidden_dim());
    let n_params = c * h + c;
    let mut params = vec![0.0f64; n_params];
    let mut opt = AdamW::new(n_params, cfg.lr, cfg.weight_decay);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (layer as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut order = rows.to_vec();
    let mut grad = vec![0.0f64; n_params];
    let mut z = vec![0.0f64; c];
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut batch_loss = 0.0;
            for &i in batch {
                let x = hs.state(i, layer);
                let y = hs.true_label(i) as usize;
                for (k, zk) in z.iter_mut().enumerate() {
                    let w = &params[k * h..(k + 1) * h];
                    *zk = params[c * h + k] + w.iter().zip(x).map(|(a, &v)| a * v as f64).sum::<f64>();
                }
                softmax_in_place(&mut z);
                batch_loss -= z[y].max(1e-300).ln();
                for k in 0..c {
                    let d = z[k] - if k == y { 1.0 } else { 0.0 };
                    for (g, &v) in grad[k * h..(k + 1) * h].iter_mut().zip(x) {
                        *g += d * v as f64;
                    }
                    grad[c * h + k] += d;
                }
            }
            let m = batch.len() as f64;
            grad.iter_mut().for_each(|g| *g /= m);
            if !batch_loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged(format!(
                    "head for layer {layer} hit a non-finite loss in epoch {epoch}; lower the learning rate"
                )));
            }
            epoch_loss += batch_loss;
            opt.step(&mut params, &grad);
        }
        history.push(epoch_loss / rows.len() as f64);
    }

    let mut head = LayerHead::zeros(layer, c, h);
    for (dst, src) in head.weight.iter_mut().zip(&params[..c * h]) {
        *dst = *src as f32;
    }
    for (dst, src) in head.bias.iter_mut().zip(&params[c * h..]) {
        *dst = *src as f32;
    }
    if head.weight.iter().chain(&head.bias).any(|v| !v.is_finite()) {
        return Err(Error::Diverged(format!("head for layer {layer} overflowed f32")));
    }
    Ok((head, history))
}

/// Trains one head per entry of `layers` on the given rows, in parallel.
pub fn train_layer_heads(
    hs: &HiddenStateDataset,
    rows: &[usize],
    layers: &[usize],
    cfg: &HeadTrainConfig,
) -> Result<Vec<LayerHead>> {
    layers
        .par_iter()
        .map(|&layer| train_layer_head(hs, rows, layer, cfg).map(|(h, _)| h))
        .collect()
}

/// Indices of the last `last_l` layers of `hs`, in order.
pub fn suffix_layers(n_layers: usize, last_l: usize) -> Vec<usize> {
    (n_layers.saturating_sub(last_l)..n_layers).collect()
}

/// Logit trajectories from the heads of the last `last_l` layers followed by
/// the classifier logits. Predictions and error labels depend only on the
/// classifier row.
pub fn project_to_trajectories(
    hs: &HiddenStateDataset,
    heads: &[LayerHead],
    last_l: usize,
) -> Result<TrajectoryDataset> {
    if last_l > hs.n_layers() {
        return Err(Error::InvalidConfig(format!(
            "last_l={last_l} exceeds the {} available layers",
            hs.n_layers()
        )));
    }
    let layers = suffix_layers(hs.n_layers(), last_l);
    let chosen: Vec<&LayerHead> = layers
        .iter()
        .map(|&t| {
            heads
                .iter()
                .find(|h| h.layer_index == t)
                .ok_or_else(|| Error::InvalidConfig(format!("no head for layer {t}")))
        })
        .collect::<Result<_>>()?;
    for h in &chosen {
        if h.n_classes != hs.n_classes() || h.hidden_dim != hs.hidden_dim() {
            return Err(Error::DimensionMismatch(format!(
                "head for layer {} is {}×{}, data is C={} H={}",
                h.layer_index,
                h.n_classes,
                h.hidden_dim,
                hs.n_classes(),
                hs.hidden_dim()
            )));
        }
    }
    let (n, c, depth) = (hs.n_examples(), hs.n_classes(), last_l + 1);
    let mut logits = vec![0.0f32; n * depth * c];
    logits.par_chunks_mut(depth * c).enumerate().for_each(|(i, out)| {
        for (d, head) in chosen.iter().enumerate() {
            let z = head.logits(hs.state(i, head.layer_index));
            for (o, v) in out[d * c..(d + 1) * c].iter_mut().zip(z) {
                *o = v as f32;
            }
        }
        out[last_l * c..].copy_from_slice(hs.classifier_logits(i));
    });
    TrajectoryDataset::new(hs.dataset_id.clone(), c, depth, logits, hs.true_labels().to_vec())
}

pub fn write_heads(heads: &[LayerHead], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    w.write_all(&LHED_MAGIC).map_err(io)?;
    w.write_all(&(heads.len() as u32).to_le_bytes()).map_err(io)?;
    for h in heads {
        for v in [h.layer_index as u32, h.n_classes as u32, h.hidden_dim as u32] {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        for v in h.weight.iter().chain(&h.bias) {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn read_heads(path: impl AsRef<Path>) -> Result<Vec<LayerHead>> {
    let path = path.as_ref();
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    if buf.len() < 10 || buf[..4] != LHED_MAGIC[..4] {
        return Err(Error::BadMagic {
            expected: "LHED1".into(),
            found: buf[..buf.len().min(6)].to_vec(),
        });
    }
    if buf[4..6] != LHED_MAGIC[4..6] {
        return Err(Error::UnsupportedVersion {
            format: "LHED",
            version: buf[4],
        });
    }
    let mut pos = 6;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
        let s = buf.get(*pos..*pos + n).ok_or(Error::Truncated {
            expected: (*pos + n) as u64,
            offset: buf.len() as u64,
        })?;
        *pos += n;
        Ok(s)
    };
    let u32_of = |b: &[u8]| u32::from_le_bytes(b.try_into().unwrap()) as usize;
    let count = u32_of(take(&mut pos, 4)?);
    let mut heads = Vec::with_capacity(count);
    for _ in 0..count {
        let layer = u32_of(take(&mut pos, 4)?);
        let c = u32_of(take(&mut pos, 4)?);
        let h = u32_of(take(&mut pos, 4)?);
        let floats: Vec<f32> = take(&mut pos, 4 * (c * h + c))?
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        heads.push(LayerHead {
            layer_index: layer,
            n_classes: c,
            hidden_dim: h,
            weight: floats[..c * h].to_vec(),
            bias: floats[c * h..].to_vec(),
        });
    }
    if pos != buf.len() {
        return Err(Error::TrailingBytes {
            trailing: (buf.len() - pos) as u64,
            offset: pos as u64,
        });
    }
    Ok(heads)
}
