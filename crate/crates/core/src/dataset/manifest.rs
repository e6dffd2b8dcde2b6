use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{HiddenStateDataset, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::splits::SplitAssignment;

/// JSON sidecar stored next to a data file as `<stem>.manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// `"LTRJ1"` or `"LHID1"`.
    pub format: String,
    pub dataset_id: String,
    pub n_examples: usize,
    pub n_classes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_layers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_dim: Option<usize>,
    /// Split used when this file was produced or evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitAssignment>,
    /// Generator configuration for synthetic files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

/// `data/foo.ltrj` → `data/foo.manifest.json`.
pub fn manifest_path(data_path: impl AsRef<Path>) -> PathBuf {
    data_path.as_ref().with_extension("manifest.json")
}

impl Manifest {
    pub fn for_trajectories(ds: &TrajectoryDataset) -> Self {
        Self {
            format: "LTRJ1".into(),
            dataset_id: ds.dataset_id.clone(),
            n_examples: ds.n_examples(),
            n_classes: ds.n_classes(),
            depth: Some(ds.depth()),
            n_layers: None,
            hidden_dim: None,
            split: None,
            generator: None,
            source: None,
        }
    }

    pub fn for_hidden_states(hs: &HiddenStateDataset) -> Self {
        Self {
            format: "LHID1".into(),
            dataset_id: hs.dataset_id.clone(),
            n_examples: hs.n_examples(),
            n_classes: hs.n_classes(),
            depth: None,
            n_layers: Some(hs.n_layers()),
            hidden_dim: Some(hs.hidden_dim()),
            split: None,
            generator: None,
            source: None,
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)?;
        fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Manifest belonging to a data file, `Ok(None)` if there is none.
    pub fn read_for(data_path: impl AsRef<Path>) -> Result<Option<Self>> {
        let p = manifest_path(data_path);
        if p.exists() {
            Self::read(p).map(Some)
        } else {
            Ok(None)
        }
    }

    /// Writes this manifest next to `data_path`.
    pub fn write_for(&self, data_path: impl AsRef<Path>) -> Result<()> {
        self.write(manifest_path(data_path))
    }
}
