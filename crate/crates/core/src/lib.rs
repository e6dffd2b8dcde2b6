//! Misclassification detection from depth-wise logit trajectories.
//!
//! A frozen classifier is read at several depths: intermediate CLS states go
//! through per-layer linear heads and the final classifier supplies the last
//! row. The resulting `D × C` trajectory is summarized by a fixed-length
//! feature vector (top-K logit blocks plus seven dynamics statistics) and a
//! linear probe turns that vector into an error score.
//!
//! ```no_run
//! use logitdyn::dataset::{generate_synthetic, SyntheticConfig};
//! use logitdyn::features::{build_features, FeatureConfig};
//! use logitdyn::probe::{train_probe, ProbeConfig};
//! use logitdyn::splits::stratified_split;
//!
//! let ds = generate_synthetic(&SyntheticConfig::default())?;
//! let x = build_features(&ds, &FeatureConfig::new(2, 3, true))?;
//! let split = stratified_split(&x.labels, 0.2, 0)?;
//! let probe = train_probe(&x, &split, &ProbeConfig::default())?;
//! println!("best epoch {}", probe.best_epoch);
//! # Ok::<(), logitdyn::Error>(())
//! ```
//!
//! Runnable examples live in `examples/`:
//!
//! - data: `synth_and_inspect`, `train_heads`
//! - features and scores: `dynamics_features`, `confidence_baselines`, `mahalanobis`
//! - probes and evaluation: `error_probe`, `in_distribution`, `cross_dataset`, `ablation`

pub mod baselines;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod feature_matrix;
pub mod features;
pub mod heads;
pub mod metrics;
pub mod optim;
pub mod probe;
pub mod ranking;
pub mod splits;

pub use error::{Error, Result};
pub use feature_matrix::FeatureMatrix;
