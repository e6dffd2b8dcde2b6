//! Declarative experiment configuration, read from TOML or JSON.
//!
//! Relative dataset paths resolve against the directory of the config file.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::ScalarMethod;
use crate::error::{Error, Result};
use crate::probe::ProbeConfig;
use crate::splits::DEFAULT_P_PROBE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    LogitDynamics,
    MaxLogit,
    Entropy,
    Margin,
    Energy,
    TopKLogits,
    Mahalanobis,
    LinearProbe,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Self::MaxLogit,
        Self::Entropy,
        Self::Margin,
        Self::Energy,
        Self::TopKLogits,
        Self::Mahalanobis,
        Self::LinearProbe,
        Self::LogitDynamics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::LogitDynamics => "logit-dynamics",
            Self::MaxLogit => "max-logit",
            Self::Entropy => "entropy",
            Self::Margin => "margin",
            Self::Energy => "energy",
            Self::TopKLogits => "top-k-logits",
            Self::Mahalanobis => "mahalanobis",
            Self::LinearProbe => "linear-probe",
        }
    }

    pub fn scalar(self) -> Option<ScalarMethod> {
        match self {
            Self::MaxLogit => Some(ScalarMethod::MaxLogit),
            Self::Entropy => Some(ScalarMethod::Entropy),
            Self::Margin => Some(ScalarMethod::Margin),
            Self::Energy => Some(ScalarMethod::Energy),
            _ => None,
        }
    }

    /// Methods that train a probe on labelled features.
    pub fn is_learned(self) -> bool {
        self.scalar().is_none()
    }

    pub fn needs_hidden_states(self) -> bool {
        matches!(self, Self::Mahalanobis | Self::LinearProbe)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method `{s}`")))
    }
}

/// Parses a comma-separated method list; `all` expands to every method.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut out = BTreeSet::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if part == "all" {
            out.extend(Method::ALL);
        } else {
            out.insert(part.parse()?);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig("empty method list".into()));
    }
    Ok(out.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSource {
    pub name: String,
    /// LTRJ file; when absent, trajectories are projected through heads
    /// trained on `hidden_states`.
    #[serde(default)]
    pub trajectories: Option<PathBuf>,
    #[serde(default)]
    pub hidden_states: Option<PathBuf>,
    #[serde(default = "default_p_probe")]
    pub p_probe: f64,
    /// Fixed split JSON; otherwise a stratified split is drawn from the seed.
    #[serde(default)]
    pub split: Option<PathBuf>,
}

fn default_p_probe() -> f64 {
    DEFAULT_P_PROBE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeadGrid {
    pub lr: Vec<f64>,
    pub epochs: Vec<usize>,
    pub batch_size: usize,
    pub weight_decay: f64,
}

impl Default for HeadGrid {
    fn default() -> Self {
        Self {
            lr: vec![1e-4, 2e-4, 5e-4, 7e-4, 1e-3],
            epochs: vec![2, 5, 7, 10, 12, 16],
            batch_size: 512,
            weight_decay: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run_id: String,
    pub datasets: Vec<DatasetSource>,
    pub methods: Vec<Method>,
    pub last_l: Vec<usize>,
    pub top_k: Vec<usize>,
    pub heads: HeadGrid,
    pub probe: ProbeConfig,
    pub seed: u64,
    pub energy_temperature: f64,
    /// Hidden-state layers for Mahalanobis; default: the last `max(last_l)`.
    pub mahalanobis_layers: Option<Vec<usize>>,
    /// Candidate layers for linear probing; default: T/4, T/2, 3T/4, T−1.
    pub linear_probe_layers: Option<Vec<usize>>,
    /// Use this `(L, K)` for every transfer cell instead of the source's
    /// selected pair.
    pub cross_fixed: Option<(usize, usize)>,
    pub out_dir: PathBuf,
    pub jobs: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            run_id: "run".into(),
            datasets: Vec::new(),
            methods: Method::ALL.to_vec(),
            last_l: vec![1, 3, 5, 7, 9, 12, 16, 20, 24],
            top_k: vec![1, 3, 5, 7, 10],
            heads: HeadGrid::default(),
            probe: ProbeConfig::default(),
            seed: 0,
            energy_temperature: 1.0,
            mahalanobis_layers: None,
            linear_probe_layers: None,
            cross_fixed: None,
            out_dir: PathBuf::from("reports"),
            jobs: None,
        }
    }
}

impl ExperimentConfig {
    /// Reads `.toml` or `.json` (by extension) and resolves relative paths.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?
        };
        let base = path.parent().unwrap_or(Path::new("."));
        for d in &mut cfg.datasets {
            for p in [&mut d.trajectories, &mut d.hidden_states, &mut d.split]
                .into_iter()
                .flatten()
            {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.datasets.is_empty() {
            return bad("at least one dataset is required");
        }
        if self.methods.is_empty() {
            return bad("at least one method is required");
        }
        if self.last_l.is_empty() || self.top_k.is_empty() {
            return bad("last_l and top_k grids must be non-empty");
        }
        if self.top_k.contains(&0) {
            return bad("top_k entries must be >= 1");
        }
        if self.heads.lr.is_empty() || self.heads.epochs.is_empty() {
            return bad("head lr and epoch grids must be non-empty");
        }
        if !(self.energy_temperature > 0.0 && self.energy_temperature.is_finite()) {
            return bad("energy_temperature must be positive");
        }
        let mut names = BTreeSet::new();
        for d in &self.datasets {
            if !names.insert(&d.name) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate dataset name `{}`",
                    d.name
                )));
            }
            if d.trajectories.is_none() && d.hidden_states.is_none() {
                return Err(Error::InvalidConfig(format!(
                    "dataset `{}` needs trajectories or hidden_states",
                    d.name
                )));
            }
            if !(d.p_probe > 0.0 && d.p_probe < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "dataset `{}`: p_probe must be in (0, 1)",
                    d.name
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("nope".parse::<Method>().is_err());
        assert_eq!(parse_methods("all").unwrap().len(), 8);
        assert_eq!(
            parse_methods("max-logit, logit-dynamics").unwrap(),
            vec![Method::LogitDynamics, Method::MaxLogit]
        );
    }

    #[test]
    fn toml_with_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("exp.toml");
        fs::write(
            &p,
            r#"
run_id = "demo"
methods = ["max-logit", "logit-dynamics"]
last_l = [1, 2]
top_k = [3]

[[datasets]]
name = "a"
trajectories = "a.ltrj"
p_probe = 0.3

[probe]
epochs = 5
"#,
        )
        .unwrap();
        let cfg = ExperimentConfig::load(&p).unwrap();
        assert_eq!(
            cfg.datasets[0].trajectories.as_deref(),
            Some(dir.path().join("a.ltrj").as_path())
        );
        assert_eq!(cfg.probe.epochs, 5);
        assert_eq!(cfg.probe.lr, 1e-3);
        assert_eq!(cfg.heads, HeadGrid::default());
    }

    #[test]
    fn rejects_incomplete_configs() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_err());
        cfg.datasets.push(DatasetSource {
            name: "a".into(),
            trajectories: None,
            hidden_states: None,
            p_probe: 0.2,
            split: None,
        });
        assert!(cfg.validate().is_err());
        cfg.datasets[0].trajectories = Some("x".into());
        cfg.validate().unwrap();
        cfg.datasets.push(cfg.datasets[0].clone());
        assert!(cfg.validate().is_err());
    }
}
