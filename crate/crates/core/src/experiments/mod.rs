//! In-distribution comparison, cross-dataset transfer and the dynamics
//! ablation.
//!
//! Every learned method follows the same recipe per dataset: features are
//! built for all rows, a probe is trained on probe-train for each candidate
//! configuration, the candidate with the best probe-val AUCPR is kept
//! (earliest in grid order on ties) and its test AUCPR is reported. Test
//! labels never enter training or selection.
//!
//! Transfer cells reuse the source probe weights and the source-selected
//! configuration; the target contributes its own trajectories (heads
//! trained on its head-train rows) and refit standardization statistics
//! from its probe-train rows. Diagonal cells are the in-distribution values.

pub mod config;
pub mod heatmap;
pub mod report;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::baselines::{
    error_scores, fit_mahalanobis, linear_probe_features, mahalanobis_features, topk_logit_matrix,
};
use crate::dataset::{load_hidden_states, load_trajectories, HiddenStateDataset, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::feature_matrix::FeatureMatrix;
use crate::features::{build_features, FeatureConfig};
use crate::heads::{project_to_trajectories, suffix_layers, train_layer_heads, HeadTrainConfig};
use crate::metrics::{aucpr_on, misclassification_rate};
use crate::probe::{train_probe, ProbeModel};
use crate::splits::{stratified_split, SplitAssignment};

pub use config::{parse_methods, DatasetSource, ExperimentConfig, HeadGrid, Method};
pub use heatmap::{emit_heatmap, Matrix};
pub use report::{
    attach_delta, delta_vs_best, AblationResult, Chosen, Competitor, CrossResult, DatasetResult,
    DatasetSummary, EvalReport, MethodResult, SubsetSummary,
};

/// A dataset with its split, ready for evaluation.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub name: String,
    pub trajectories: Option<TrajectoryDataset>,
    pub hidden: Option<HiddenStateDataset>,
    pub split: SplitAssignment,
    errors: Vec<bool>,
    /// Final classifier logits as a depth-1 dataset (scalar and top-K
    /// baselines).
    classifier: TrajectoryDataset,
}

impl PreparedDataset {
    /// Uses `split` if given, otherwise draws a stratified split.
    pub fn new(
        name: impl Into<String>,
        trajectories: Option<TrajectoryDataset>,
        hidden: Option<HiddenStateDataset>,
        split: Option<SplitAssignment>,
        p_probe: f64,
        seed: u64,
    ) -> Result<Self> {
        let name = name.into();
        let classifier = match (&trajectories, &hidden) {
            (_, Some(hs)) => hs.classifier_trajectories()?,
            (Some(ds), None) => {
                let c = ds.n_classes();
                let finals = (0..ds.n_examples())
                    .flat_map(|i| ds.final_logits(i).to_vec())
                    .collect();
                TrajectoryDataset::new(ds.dataset_id.clone(), c, 1, finals, ds.true_labels().to_vec())?
            }
            (None, None) => {
                return Err(Error::InvalidConfig(format!(
                    "dataset `{name}` has neither trajectories nor hidden states"
                )))
            }
        };
        let errors = classifier.errors();
        if let (Some(ds), Some(_)) = (&trajectories, &hidden) {
            if ds.errors() != errors {
                return Err(Error::DimensionMismatch(format!(
                    "dataset `{name}`: trajectory and hidden-state files disagree on errors"
                )));
            }
        }
        let split = match split {
            Some(s) => {
                s.validate(errors.len())?;
                s
            }
            None => stratified_split(&errors, p_probe, seed)?,
        };
        Ok(Self {
            name,
            trajectories,
            hidden,
            split,
            errors,
            classifier,
        })
    }

    pub fn load(src: &DatasetSource, seed: u64) -> Result<Self> {
        let traj = src.trajectories.as_ref().map(load_trajectories).transpose()?;
        let hidden = src.hidden_states.as_ref().map(load_hidden_states).transpose()?;
        let split = src.split.as_ref().map(SplitAssignment::read).transpose()?;
        Self::new(src.name.clone(), traj, hidden, split, src.p_probe, seed)
    }

    pub fn n_examples(&self) -> usize {
        self.errors.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classifier.n_classes()
    }

    pub fn errors(&self) -> &[bool] {
        &self.errors
    }

    /// Trajectory depth LogitDynamics can use.
    pub fn available_depth(&self) -> usize {
        match (&self.trajectories, &self.hidden) {
            (Some(ds), _) => ds.depth(),
            (None, Some(hs)) => hs.n_layers() + 1,
            (None, None) => 1,
        }
    }

    pub fn summary(&self) -> DatasetSummary {
        let subsets = self
            .split
            .subsets()
            .into_iter()
            .map(|(name, rows)| {
                let errors = rows.iter().filter(|&&i| self.errors[i]).count();
                (
                    name.to_string(),
                    SubsetSummary {
                        size: rows.len(),
                        errors,
                    },
                )
            })
            .collect();
        DatasetSummary {
            name: self.name.clone(),
            n_examples: self.n_examples(),
            n_classes: self.n_classes(),
            depth: self.available_depth(),
            n_layers: self.hidden.as_ref().map(|h| h.n_layers()),
            hidden_dim: self.hidden.as_ref().map(|h| h.hidden_dim()),
            misclassification_rate: misclassification_rate(&self.classifier),
            p_probe: self.split.p_probe,
            split_seed: self.split.seed,
            subsets,
        }
    }
}

/// A trained probe plus everything needed to rebuild its inputs elsewhere.
#[derive(Debug, Clone)]
pub struct FittedProbe {
    pub probe: ProbeModel,
    pub chosen: Chosen,
    pub val_aucpr: Option<f64>,
    pub test_aucpr: f64,
}

/// The LogitDynamics fit of one dataset, with the trajectories of the
/// selected heads kept for transfer.
#[derive(Debug, Clone)]
pub struct LdFit {
    pub fit: FittedProbe,
    pub features: FeatureConfig,
    pub trajectories: TrajectoryDataset,
}

fn val_key(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NEG_INFINITY)
}

fn fit_on(
    x: &FeatureMatrix,
    split: &SplitAssignment,
    cfg: &ExperimentConfig,
    chosen: Chosen,
) -> Result<FittedProbe> {
    let probe = train_probe(x, split, &cfg.probe)?;
    let scores = probe.score_matrix(x)?;
    let test_aucpr = aucpr_on(&scores, &x.labels, &split.test)?.aucpr;
    let val_aucpr = probe.val_aucpr;
    let chosen = Chosen {
        probe_best_epoch: Some(probe.best_epoch),
        ..chosen
    };
    Ok(FittedProbe {
        probe,
        chosen,
        val_aucpr,
        test_aucpr,
    })
}

/// Picks the best candidate by probe-val AUCPR, first on ties. Test AUCPR
/// is computed for every candidate but never consulted here.
fn select<T>(candidates: Vec<(T, FittedProbe)>) -> Option<(T, FittedProbe)> {
    candidates.into_iter().reduce(|a, b| {
        if val_key(b.1.val_aucpr) > val_key(a.1.val_aucpr) {
            b
        } else {
            a
        }
    })
}

fn score_probe_on(probe: &ProbeModel, x: &FeatureMatrix, target: &SplitAssignment) -> Result<f64> {
    let m = probe.transferred(x, &target.probe_train)?;
    let s = m.score_matrix(x)?;
    Ok(aucpr_on(&s, &x.labels, &target.test)?.aucpr)
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// An experiment over prepared datasets.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub datasets: Vec<PreparedDataset>,
    grid: Vec<(usize, usize)>,
}

impl Experiment {
    /// Keeps the `(L, K)` pairs valid for every dataset.
    pub fn new(config: ExperimentConfig, datasets: Vec<PreparedDataset>) -> Result<Self> {
        if datasets.is_empty() {
            return Err(Error::InvalidConfig("no datasets".into()));
        }
        let mut grid = Vec::new();
        for &l in &config.last_l {
            for &k in &config.top_k {
                let fc = FeatureConfig::new(l, k, true);
                if datasets
                    .iter()
                    .all(|d| fc.validate(d.n_classes(), d.available_depth()).is_ok())
                {
                    grid.push((l, k));
                }
            }
        }
        if let Some((l, k)) = config.cross_fixed {
            let fc = FeatureConfig::new(l, k, true);
            for d in &datasets {
                fc.validate(d.n_classes(), d.available_depth())?;
            }
        }
        if grid.is_empty() {
            return Err(Error::InvalidConfig(
                "no (last_l, top_k) pair is valid for every dataset".into(),
            ));
        }
        Ok(Self {
            config,
            datasets,
            grid,
        })
    }

    pub fn from_config(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let datasets = config
            .datasets
            .iter()
            .map(|d| PreparedDataset::load(d, config.seed))
            .collect::<Result<Vec<_>>>()?;
        Self::new(config, datasets)
    }

    pub fn feature_grid(&self) -> &[(usize, usize)] {
        &self.grid
    }

    fn names(&self) -> Vec<String> {
        self.datasets.iter().map(|d| d.name.clone()).collect()
    }

    fn head_configs(&self) -> Vec<HeadTrainConfig> {
        let g = &self.config.heads;
        g.lr.iter()
            .flat_map(|&lr| {
                g.epochs.iter().map(move |&epochs| HeadTrainConfig {
                    lr,
                    epochs,
                    batch_size: g.batch_size,
                    weight_decay: g.weight_decay,
                    seed: self.config.seed,
                })
            })
            .collect()
    }

    /// Trajectories for LogitDynamics: the stored file, or one projection
    /// per head configuration covering the deepest `L` of the grid.
    fn trajectory_candidates(
        &self,
        d: &PreparedDataset,
        max_l: usize,
    ) -> Result<Vec<(Option<HeadTrainConfig>, TrajectoryDataset)>> {
        if let Some(ds) = &d.trajectories {
            return Ok(vec![(None, ds.clone())]);
        }
        let hs = d.hidden.as_ref().expect("prepared dataset has a source");
        let layers = suffix_layers(hs.n_layers(), max_l);
        self.head_configs()
            .into_iter()
            .map(|hc| {
                let heads = if layers.is_empty() {
                    Vec::new()
                } else {
                    train_layer_heads(hs, &d.split.head_train, &layers, &hc)?
                };
                Ok((Some(hc), project_to_trajectories(hs, &heads, max_l)?))
            })
            .collect()
    }

    /// Fits LogitDynamics on one dataset over `pairs`.
    pub fn fit_logit_dynamics(
        &self,
        d: &PreparedDataset,
        pairs: &[(usize, usize)],
        include_dynamics: bool,
    ) -> Result<LdFit> {
        let max_l = pairs.iter().map(|p| p.0).max().unwrap_or(0);
        let mut best: Option<LdFit> = None;
        for (head, traj) in self.trajectory_candidates(d, max_l)? {
            let fits: Vec<(FeatureConfig, FittedProbe)> = pairs
                .par_iter()
                .map(|&(l, k)| {
                    let fc = FeatureConfig::new(l, k, include_dynamics);
                    let x = build_features(&traj, &fc)?;
                    let chosen = Chosen {
                        last_l: Some(l),
                        top_k: Some(k),
                        head_lr: head.as_ref().map(|h| h.lr),
                        head_epochs: head.as_ref().map(|h| h.epochs),
                        ..Default::default()
                    };
                    Ok((fc, fit_on(&x, &d.split, &self.config, chosen)?))
                })
                .collect::<Result<_>>()?;
            let (fc, fit) = select(fits).expect("non-empty grid");
            if best
                .as_ref()
                .is_none_or(|b| val_key(fit.val_aucpr) > val_key(b.fit.val_aucpr))
            {
                best = Some(LdFit {
                    fit,
                    features: fc,
                    trajectories: traj,
                });
            }
        }
        best.ok_or_else(|| Error::InvalidConfig("empty head grid".into()))
    }

    fn fit_topk(&self, d: &PreparedDataset) -> Result<(usize, FittedProbe)> {
        let ks: Vec<usize> = self
            .config
            .top_k
            .iter()
            .copied()
            .filter(|&k| k <= d.n_classes())
            .collect();
        if ks.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "no top_k value fits C={}",
                d.n_classes()
            )));
        }
        let fits = ks
            .par_iter()
            .map(|&k| {
                let x = topk_logit_matrix(&d.classifier, k)?;
                let chosen = Chosen {
                    top_k: Some(k),
                    ..Default::default()
                };
                Ok((k, fit_on(&x, &d.split, &self.config, chosen)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(select(fits).expect("non-empty"))
    }

    fn mahalanobis_layers(&self, hs: &HiddenStateDataset) -> Vec<usize> {
        match &self.config.mahalanobis_layers {
            Some(l) => l.clone(),
            None => {
                let max_l = self.grid.iter().map(|p| p.0).max().unwrap_or(1).max(1);
                suffix_layers(hs.n_layers(), max_l.min(hs.n_layers()))
            }
        }
    }

    fn mahalanobis_matrix(&self, d: &PreparedDataset, hs: &HiddenStateDataset) -> Result<FeatureMatrix> {
        let model = fit_mahalanobis(hs, &d.split.head_train, &self.mahalanobis_layers(hs))?;
        mahalanobis_features(&model, hs)
    }

    fn fit_mahalanobis_probe(&self, d: &PreparedDataset, hs: &HiddenStateDataset) -> Result<FittedProbe> {
        let x = self.mahalanobis_matrix(d, hs)?;
        let chosen = Chosen {
            layers: Some(self.mahalanobis_layers(hs)),
            ..Default::default()
        };
        fit_on(&x, &d.split, &self.config, chosen)
    }

    fn linear_probe_layers(&self, hs: &HiddenStateDataset) -> Vec<usize> {
        let t = hs.n_layers();
        let mut layers = match &self.config.linear_probe_layers {
            Some(l) => l.clone(),
            None => vec![t / 4, t / 2, 3 * t / 4, t - 1],
        };
        layers.retain(|&l| l < t);
        layers.dedup();
        layers
    }

    fn fit_linear_probe(&self, d: &PreparedDataset, hs: &HiddenStateDataset) -> Result<(usize, FittedProbe)> {
        let layers = self.linear_probe_layers(hs);
        if layers.is_empty() {
            return Err(Error::InvalidConfig("no valid linear-probe layer".into()));
        }
        let fits = layers
            .par_iter()
            .map(|&layer| {
                let x = linear_probe_features(hs, layer)?;
                let chosen = Chosen {
                    layer: Some(layer),
                    ..Default::default()
                };
                Ok((layer, fit_on(&x, &d.split, &self.config, chosen)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(select(fits).expect("non-empty"))
    }

    fn scalar_result(&self, d: &PreparedDataset, m: Method) -> Result<MethodResult> {
        let sm = m.scalar().expect("scalar method");
        let s = error_scores(&d.classifier, sm, self.config.energy_temperature)?;
        Ok(MethodResult {
            method: m,
            test_aucpr: aucpr_on(&s, &d.errors, &d.split.test)?.aucpr,
            val_aucpr: None,
            chosen: Chosen {
                temperature: (m == Method::Energy).then_some(self.config.energy_temperature),
                ..Default::default()
            },
        })
    }

    /// All enabled methods on one dataset.
    fn evaluate_dataset(&self, d: &PreparedDataset) -> Result<(DatasetResult, Fits)> {
        let mut methods = Vec::new();
        let mut skipped = Vec::new();
        let mut fits = Fits::default();
        for &m in &self.config.methods {
            let learned = |fit: &FittedProbe| MethodResult {
                method: m,
                test_aucpr: fit.test_aucpr,
                val_aucpr: fit.val_aucpr,
                chosen: fit.chosen.clone(),
            };
            if m.needs_hidden_states() && d.hidden.is_none() {
                log::warn!("{}: skipping {m}, no hidden-state file", d.name);
                skipped.push(m.name().to_string());
                continue;
            }
            log::info!("{}: fitting {m}", d.name);
            match m {
                Method::LogitDynamics => {
                    let f = self.fit_logit_dynamics(d, &self.grid, true)?;
                    methods.push(learned(&f.fit));
                    fits.ld = Some(f);
                }
                Method::TopKLogits => {
                    let (_, f) = self.fit_topk(d)?;
                    methods.push(learned(&f));
                    fits.topk = Some(f);
                }
                Method::Mahalanobis => {
                    let f = self.fit_mahalanobis_probe(d, d.hidden.as_ref().unwrap())?;
                    methods.push(learned(&f));
                    fits.mahalanobis = Some(f);
                }
                Method::LinearProbe => {
                    let (_, f) = self.fit_linear_probe(d, d.hidden.as_ref().unwrap())?;
                    methods.push(learned(&f));
                    fits.linear = Some(f);
                }
                _ => methods.push(self.scalar_result(d, m)?),
            }
        }
        let mut r = DatasetResult {
            dataset: d.name.clone(),
            methods,
            delta: None,
            delta_reference: None,
            skipped,
        };
        attach_delta(&mut r);
        Ok((r, fits))
    }

    fn evaluate_all(&self) -> Result<Vec<(DatasetResult, Fits)>> {
        with_jobs(self.config.jobs, || {
            self.datasets.iter().map(|d| self.evaluate_dataset(d)).collect()
        })?
    }

    fn report(
        &self,
        in_distribution: Vec<DatasetResult>,
        cross: Option<CrossResult>,
        ablation: Option<AblationResult>,
    ) -> EvalReport {
        EvalReport {
            run_id: self.config.run_id.clone(),
            generated_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            seed: self.config.seed,
            feature_grid: self.grid.clone(),
            datasets: self.datasets.iter().map(PreparedDataset::summary).collect(),
            in_distribution,
            cross,
            ablation,
        }
    }

    pub fn run_in_distribution(&self) -> Result<EvalReport> {
        let results = self.evaluate_all()?;
        Ok(self.report(results.into_iter().map(|r| r.0).collect(), None, None))
    }

    /// Builds a transfer matrix. `cell(s, t)` computes an off-diagonal cell;
    /// the diagonal comes from `diag`.
    fn matrix(
        &self,
        diag: impl Fn(usize) -> Option<f64>,
        cell: impl Fn(usize, usize) -> Result<Option<f64>> + Sync,
    ) -> Result<Matrix> {
        let n = self.datasets.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|s| (0..n).map(move |t| (s, t)))
            .filter(|(s, t)| s != t)
            .collect();
        let off: Vec<Option<f64>> = pairs
            .par_iter()
            .map(|&(s, t)| cell(s, t))
            .collect::<Result<_>>()?;
        let mut values = vec![vec![None; n]; n];
        for (i, v) in values.iter_mut().enumerate() {
            v[i] = diag(i);
        }
        for (&(s, t), v) in pairs.iter().zip(off) {
            values[s][t] = v;
        }
        Matrix::square(&self.names(), values)
    }

    /// LogitDynamics trained on `s`, applied to `t`'s trajectories with
    /// `fc`.
    fn ld_transfer(
        &self,
        src: &FittedProbe,
        fc: &FeatureConfig,
        target: &LdFit,
        t: usize,
    ) -> Result<Option<f64>> {
        let x = build_features(&target.trajectories, fc)?;
        score_probe_on(&src.probe, &x, &self.datasets[t].split).map(Some)
    }

    /// Refits LogitDynamics on every dataset with a fixed `(L, K)`.
    fn refit_fixed(&self, fits: &[Option<LdFit>], include_dynamics: bool) -> Result<Vec<Option<LdFit>>> {
        match self.config.cross_fixed {
            None => Ok(fits.to_vec()),
            Some(p) => self
                .datasets
                .iter()
                .map(|d| self.fit_logit_dynamics(d, &[p], include_dynamics).map(Some))
                .collect(),
        }
    }

    fn ld_matrix(&self, fits: &[Option<LdFit>]) -> Result<Matrix> {
        self.matrix(
            |i| fits[i].as_ref().map(|f| f.fit.test_aucpr),
            |s, t| match (&fits[s], &fits[t]) {
                (Some(src), Some(tgt)) => self.ld_transfer(&src.fit, &src.features, tgt, t),
                _ => Ok(None),
            },
        )
    }

    pub fn run_cross_matrix(&self) -> Result<EvalReport> {
        if self.datasets.len() < 2 {
            return Err(Error::InvalidConfig(
                "cross-dataset evaluation needs at least two datasets".into(),
            ));
        }
        let results = self.evaluate_all()?;
        let (rows, fits): (Vec<DatasetResult>, Vec<Fits>) = results.into_iter().unzip();
        let cross = with_jobs(self.config.jobs, || self.cross_from(&rows, &fits))??;
        Ok(self.report(rows, Some(cross), None))
    }

    fn cross_from(&self, rows: &[DatasetResult], fits: &[Fits]) -> Result<CrossResult> {
        let mut aucpr = BTreeMap::new();
        let ld_fits: Vec<Option<LdFit>> = fits.iter().map(|f| f.ld.clone()).collect();
        for &m in &self.config.methods {
            let diag = |i: usize| rows[i].get(m).map(|r| r.test_aucpr);
            let matrix = match m {
                Method::LogitDynamics => self.ld_matrix(&self.refit_fixed(&ld_fits, true)?)?,
                Method::TopKLogits => self.matrix(diag, |s, t| {
                    let Some(src) = &fits[s].topk else { return Ok(None) };
                    let k = src.chosen.top_k.expect("top-k records K");
                    let d = &self.datasets[t];
                    if k > d.n_classes() {
                        return Ok(None);
                    }
                    score_probe_on(&src.probe, &topk_logit_matrix(&d.classifier, k)?, &d.split).map(Some)
                })?,
                Method::Mahalanobis => self.matrix(diag, |s, t| {
                    let (Some(src), Some(hs)) = (&fits[s].mahalanobis, &self.datasets[t].hidden) else {
                        return Ok(None);
                    };
                    let x = self.mahalanobis_matrix(&self.datasets[t], hs)?;
                    if x.n_features() != src.probe.weights.len() {
                        log::warn!("mahalanobis transfer {s}->{t}: layer counts differ");
                        return Ok(None);
                    }
                    score_probe_on(&src.probe, &x, &self.datasets[t].split).map(Some)
                })?,
                Method::LinearProbe => self.matrix(diag, |s, t| {
                    let (Some(src), Some(hs)) = (&fits[s].linear, &self.datasets[t].hidden) else {
                        return Ok(None);
                    };
                    let layer = src.chosen.layer.expect("linear probe records its layer");
                    if layer >= hs.n_layers() || hs.hidden_dim() != src.probe.weights.len() {
                        log::warn!("linear-probe transfer {s}->{t}: hidden shapes differ");
                        return Ok(None);
                    }
                    score_probe_on(
                        &src.probe,
                        &linear_probe_features(hs, layer)?,
                        &self.datasets[t].split,
                    )
                    .map(Some)
                })?,
                // Label-free scores do not depend on the training dataset.
                _ => self.matrix(diag, |_, t| Ok(rows[t].get(m).map(|r| r.test_aucpr)))?,
            };
            aucpr.insert(m.name().to_string(), matrix);
        }
        let mut difference = BTreeMap::new();
        if let Some(ld) = aucpr.get(Method::LogitDynamics.name()) {
            for (name, m) in &aucpr {
                if name != Method::LogitDynamics.name() {
                    difference.insert(name.clone(), ld.minus(m)?);
                }
            }
        }
        Ok(CrossResult {
            aucpr,
            difference_vs_logit_dynamics: difference,
        })
    }

    /// LogitDynamics transfer matrices with and without the dynamics block.
    pub fn ablation_matrices(&self, first_dynamics: bool, second_dynamics: bool) -> Result<(Matrix, Matrix)> {
        with_jobs(self.config.jobs, || -> Result<(Matrix, Matrix)> {
            let pairs: Vec<(usize, usize)> = match self.config.cross_fixed {
                Some(p) => vec![p],
                None => self.grid.clone(),
            };
            let fit = |dyn_on: bool| -> Result<Matrix> {
                let fits = self
                    .datasets
                    .iter()
                    .map(|d| self.fit_logit_dynamics(d, &pairs, dyn_on).map(Some))
                    .collect::<Result<Vec<_>>>()?;
                self.ld_matrix(&fits)
            };
            Ok((fit(first_dynamics)?, fit(second_dynamics)?))
        })?
    }

    pub fn run_ablation(&self) -> Result<EvalReport> {
        let (on, off) = self.ablation_matrices(true, false)?;
        let diff = on.minus(&off)?;
        let ablation = AblationResult {
            mean_diagonal: diff.mean_diagonal(),
            mean_off_diagonal: diff.mean_off_diagonal(),
            with_dynamics: on,
            without_dynamics: off,
            difference: diff,
        };
        Ok(self.report(Vec::new(), None, Some(ablation)))
    }
}

#[derive(Debug, Clone, Default)]
struct Fits {
    ld: Option<LdFit>,
    topk: Option<FittedProbe>,
    mahalanobis: Option<FittedProbe>,
    linear: Option<FittedProbe>,
}

pub fn run_in_distribution(cfg: &ExperimentConfig) -> Result<EvalReport> {
    Experiment::from_config(cfg.clone())?.run_in_distribution()
}

pub fn run_cross_matrix(cfg: &ExperimentConfig) -> Result<EvalReport> {
    Experiment::from_config(cfg.clone())?.run_cross_matrix()
}

pub fn run_ablation(cfg: &ExperimentConfig) -> Result<EvalReport> {
    Experiment::from_config(cfg.clone())?.run_ablation()
}

/// `out_dir/run_id`.
pub fn report_dir(cfg: &ExperimentConfig) -> std::path::PathBuf {
    cfg.out_dir.join(&cfg.run_id)
}

/// Writes each dataset's split next to the report as `splits/<name>.json`.
pub fn write_splits(exp: &Experiment, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref().join("splits");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for d in &exp.datasets {
        d.split.write(dir.join(format!("{}.json", d.name)))?;
    }
    Ok(())
}
