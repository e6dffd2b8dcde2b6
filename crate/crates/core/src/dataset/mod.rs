//! Trajectory and hidden-state datasets.
//!
//! A [`TrajectoryDataset`] holds, for every example, a `depth × n_classes`
//! matrix of logits ordered from the earliest head layer to the final
//! classifier (last row), plus the true and predicted labels. The predicted
//! label is always the argmax of the final row; it is derived, never trusted.
//!
//! A [`HiddenStateDataset`] holds per-layer CLS vectors and the classifier
//! logits; it feeds head training, the Mahalanobis detector and linear
//! probing.

mod format;
mod manifest;
mod synthetic;

pub use format::{
    load_hidden_states, load_trajectories, read_hidden_header, read_trajectory_header, write_hidden_states,
    write_trajectories, write_trajectories_only, HiddenHeader, TrajectoryHeader, LHID_MAGIC, LTRJ_MAGIC,
};
pub use manifest::{manifest_path, Manifest};
pub use synthetic::{
    generate_synthetic, generate_synthetic_hidden, CommitDepth, HiddenSynthConfig, SyntheticConfig,
};

use crate::error::{Error, Result};
use crate::ranking::argmax;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDataset {
    pub dataset_id: String,
    n_classes: usize,
    depth: usize,
    logits: Vec<f32>,
    true_label: Vec<u32>,
    predicted_label: Vec<u32>,
}

impl TrajectoryDataset {
    /// Builds a dataset from row-major `N × depth × n_classes` logits.
    /// Predictions are recomputed from the final depth.
    pub fn new(
        dataset_id: impl Into<String>,
        n_classes: usize,
        depth: usize,
        logits: Vec<f32>,
        true_label: Vec<u32>,
    ) -> Result<Self> {
        check_dims(n_classes, depth)?;
        let n = true_label.len();
        if logits.len() != n * depth * n_classes {
            return Err(Error::DimensionMismatch(format!(
                "expected {} logits for N={n}, D={depth}, C={n_classes}, got {}",
                n * depth * n_classes,
                logits.len()
            )));
        }
        let mut predicted_label = Vec::with_capacity(n);
        for i in 0..n {
            let row = &logits[i * depth * n_classes..(i + 1) * depth * n_classes];
            validate_record(i, row, true_label[i], n_classes)?;
            predicted_label.push(argmax(&row[(depth - 1) * n_classes..]) as u32);
        }
        Ok(Self {
            dataset_id: dataset_id.into(),
            n_classes,
            depth,
            logits,
            true_label,
            predicted_label,
        })
    }

    pub fn n_examples(&self) -> usize {
        self.true_label.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// The full `depth × n_classes` trajectory of example `i`.
    pub fn trajectory(&self, i: usize) -> Trajectory<'_> {
        let stride = self.depth * self.n_classes;
        Trajectory {
            logits: &self.logits[i * stride..(i + 1) * stride],
            n_classes: self.n_classes,
        }
    }

    pub fn final_logits(&self, i: usize) -> &[f32] {
        self.trajectory(i).at(self.depth - 1)
    }

    pub fn true_label(&self, i: usize) -> u32 {
        self.true_label[i]
    }

    pub fn predicted_label(&self, i: usize) -> u32 {
        self.predicted_label[i]
    }

    pub fn true_labels(&self) -> &[u32] {
        &self.true_label
    }

    pub fn predicted_labels(&self) -> &[u32] {
        &self.predicted_label
    }

    pub fn raw_logits(&self) -> &[f32] {
        &self.logits
    }

    pub fn is_error(&self, i: usize) -> bool {
        self.predicted_label[i] != self.true_label[i]
    }

    /// Error indicator for every example (`true` = misclassified).
    pub fn errors(&self) -> Vec<bool> {
        (0..self.n_examples()).map(|i| self.is_error(i)).collect()
    }

    /// Same logits with different ground truth.
    pub fn with_true_labels(&self, true_label: Vec<u32>) -> Result<Self> {
        Self::new(
            self.dataset_id.clone(),
            self.n_classes,
            self.depth,
            self.logits.clone(),
            true_label,
        )
    }
}

/// Borrowed view of one example's logit trajectory.
#[derive(Debug, Clone, Copy)]
pub struct Trajectory<'a> {
    logits: &'a [f32],
    n_classes: usize,
}

impl<'a> Trajectory<'a> {
    /// Wraps a row-major `depth × n_classes` slice.
    pub fn new(logits: &'a [f32], n_classes: usize) -> Self {
        assert!(n_classes > 0 && logits.len().is_multiple_of(n_classes));
        Self { logits, n_classes }
    }

    pub fn depth(&self) -> usize {
        self.logits.len() / self.n_classes
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn at(&self, d: usize) -> &'a [f32] {
        &self.logits[d * self.n_classes..(d + 1) * self.n_classes]
    }

    /// The last `count` depths.
    pub fn suffix(&self, count: usize) -> Trajectory<'a> {
        let d = self.depth();
        assert!(count >= 1 && count <= d);
        Trajectory {
            logits: &self.logits[(d - count) * self.n_classes..],
            n_classes: self.n_classes,
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &'a [f32]> + 'a {
        self.logits.chunks_exact(self.n_classes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenStateDataset {
    pub dataset_id: String,
    n_layers: usize,
    hidden_dim: usize,
    n_classes: usize,
    states: Vec<f32>,
    true_label: Vec<u32>,
    classifier_logits: Vec<f32>,
}

impl HiddenStateDataset {
    /// `states` is row-major `N × n_layers × hidden_dim`; `classifier_logits`
    /// is `N × n_classes`.
    pub fn new(
        dataset_id: impl Into<String>,
        n_layers: usize,
        hidden_dim: usize,
        n_classes: usize,
        states: Vec<f32>,
        true_label: Vec<u32>,
        classifier_logits: Vec<f32>,
    ) -> Result<Self> {
        if n_layers == 0 || hidden_dim == 0 || n_classes == 0 {
            return Err(Error::InvalidConfig(
                "layers, hidden_dim and classes must all be positive".into(),
            ));
        }
        let n = true_label.len();
        if states.len() != n * n_layers * hidden_dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} state values, got {}",
                n * n_layers * hidden_dim,
                states.len()
            )));
        }
        if classifier_logits.len() != n * n_classes {
            return Err(Error::DimensionMismatch(format!(
                "expected {} classifier logits, got {}",
                n * n_classes,
                classifier_logits.len()
            )));
        }
        let stride = n_layers * hidden_dim;
        for i in 0..n {
            if states[i * stride..(i + 1) * stride]
                .iter()
                .chain(&classifier_logits[i * n_classes..(i + 1) * n_classes])
                .any(|v| !v.is_finite())
            {
                return Err(Error::NonFinite { index: i });
            }
            if true_label[i] as usize >= n_classes {
                return Err(Error::Corrupt {
                    index: i,
                    reason: format!("label {} out of range for C={n_classes}", true_label[i]),
                });
            }
        }
        Ok(Self {
            dataset_id: dataset_id.into(),
            n_layers,
            hidden_dim,
            n_classes,
            states,
            true_label,
            classifier_logits,
        })
    }

    pub fn n_examples(&self) -> usize {
        self.true_label.len()
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn state(&self, i: usize, layer: usize) -> &[f32] {
        let off = (i * self.n_layers + layer) * self.hidden_dim;
        &self.states[off..off + self.hidden_dim]
    }

    /// All layers of example `i`, `n_layers × hidden_dim`.
    pub fn states_of(&self, i: usize) -> &[f32] {
        let stride = self.n_layers * self.hidden_dim;
        &self.states[i * stride..(i + 1) * stride]
    }

    pub fn classifier_logits(&self, i: usize) -> &[f32] {
        &self.classifier_logits[i * self.n_classes..(i + 1) * self.n_classes]
    }

    pub fn true_label(&self, i: usize) -> u32 {
        self.true_label[i]
    }

    pub fn true_labels(&self) -> &[u32] {
        &self.true_label
    }

    pub fn predicted_label(&self, i: usize) -> u32 {
        argmax(self.classifier_logits(i)) as u32
    }

    pub fn is_error(&self, i: usize) -> bool {
        self.predicted_label(i) != self.true_label[i]
    }

    pub fn errors(&self) -> Vec<bool> {
        (0..self.n_examples()).map(|i| self.is_error(i)).collect()
    }

    /// Trajectory dataset of depth 1 holding only the classifier logits.
    pub fn classifier_trajectories(&self) -> Result<TrajectoryDataset> {
        TrajectoryDataset::new(
            self.dataset_id.clone(),
            self.n_classes,
            1,
            self.classifier_logits.clone(),
            self.true_label.clone(),
        )
    }
}

fn check_dims(n_classes: usize, depth: usize) -> Result<()> {
    if n_classes == 0 || depth == 0 {
        return Err(Error::InvalidConfig(format!(
            "n_classes and depth must be positive (got C={n_classes}, D={depth})"
        )));
    }
    Ok(())
}

fn validate_record(i: usize, logits: &[f32], y: u32, n_classes: usize) -> Result<()> {
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    if y as usize >= n_classes {
        return Err(Error::Corrupt {
            index: i,
            reason: format!("true label {y} out of range for C={n_classes}"),
        });
    }
    Ok(())
}
