//! Seeded desk-scale data with controllable, error-correlated depth dynamics.
//!
//! Trajectory generator, per example:
//!
//! 1. draw the true class `y` and the error flag; an error picks a final
//!    prediction `ŷ ≠ y`, a correct example uses `ŷ = y`;
//! 2. draw a commitment depth `d*` from the correct/error distribution;
//! 3. before `d*` the leading class is some class other than `ŷ`. Correct
//!    examples keep it; error examples replace it at each depth with
//!    probability `1 − exp(−volatility_error)`;
//! 4. from `d*` on the leading class is `ŷ`. The lead over the runner-up
//!    grows with the time since commitment.
//!
//! Background logits are a per-example class profile plus per-depth noise,
//! so top-K sets drift between depths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{HiddenStateDataset, TrajectoryDataset};
use crate::error::{Error, Result};

/// Distribution of the 1-based commitment depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CommitDepth {
    Fixed {
        depth: usize,
    },
    /// Inclusive range.
    Uniform {
        low: usize,
        high: usize,
    },
    /// `weights[j]` is the (unnormalized) mass of depth `j + 1`.
    Weighted {
        weights: Vec<f64>,
    },
}

impl CommitDepth {
    fn validate(&self, depth: usize, what: &str) -> Result<()> {
        let ok = match self {
            CommitDepth::Fixed { depth: d } => (1..=depth).contains(d),
            CommitDepth::Uniform { low, high } => 1 <= *low && low <= high && *high <= depth,
            CommitDepth::Weighted { weights } => {
                !weights.is_empty()
                    && weights.len() <= depth
                    && weights.iter().all(|w| w.is_finite() && *w >= 0.0)
                    && weights.iter().sum::<f64>() > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "{what} commitment depth {self:?} does not lie in [1, {depth}]"
            )))
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        match self {
            CommitDepth::Fixed { depth } => *depth,
            CommitDepth::Uniform { low, high } => rng.random_range(*low..=*high),
            CommitDepth::Weighted { weights } => {
                let total: f64 = weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                for (j, w) in weights.iter().enumerate() {
                    if u < *w {
                        return j + 1;
                    }
                    u -= w;
                }
                weights.iter().rposition(|w| *w > 0.0).unwrap() + 1
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub dataset_id: String,
    pub n_examples: usize,
    pub n_classes: usize,
    pub depth: usize,
    pub error_rate: f64,
    pub commit_depth_correct: CommitDepth,
    pub commit_depth_error: CommitDepth,
    /// Rate of pre-commitment top-1 replacement for error examples.
    pub volatility_error: f64,
    /// Logit lead of the intended top-1 class (before the margin factor).
    pub boost: f64,
    /// Scale of the background logits; also a global logit scale.
    pub noise_scale: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            dataset_id: "synthetic".into(),
            n_examples: 5000,
            n_classes: 10,
            depth: 6,
            error_rate: 0.2,
            commit_depth_correct: CommitDepth::Uniform { low: 1, high: 3 },
            commit_depth_error: CommitDepth::Uniform { low: 3, high: 6 },
            volatility_error: 1.0,
            boost: 2.0,
            noise_scale: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_classes < 2 {
            return bad(format!("n_classes must be at least 2, got {}", self.n_classes));
        }
        if self.depth == 0 {
            return bad("depth must be positive".into());
        }
        if !(self.error_rate > 0.0 && self.error_rate < 1.0) {
            return bad(format!("error_rate must lie in (0, 1), got {}", self.error_rate));
        }
        if !(self.volatility_error > 0.0 && self.volatility_error.is_finite()) {
            return bad("volatility_error must be a positive real".into());
        }
        if !(self.boost > 0.0 && self.boost.is_finite()) {
            return bad("boost must be a positive real".into());
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return bad("noise_scale must be non-negative".into());
        }
        self.commit_depth_correct.validate(self.depth, "correct")?;
        self.commit_depth_error.validate(self.depth, "error")
    }
}

/// Correlation of background logits across depths.
const PROFILE_CORRELATION: f64 = 0.8;

fn other_class(rng: &mut impl Rng, n_classes: usize, avoid: usize) -> usize {
    let c = rng.random_range(0..n_classes - 1);
    if c >= avoid {
        c + 1
    } else {
        c
    }
}

fn other_class2(rng: &mut impl Rng, n_classes: usize, a: usize, b: usize) -> usize {
    if a == b {
        return other_class(rng, n_classes, a);
    }
    if n_classes < 3 {
        // Nothing left; draw anyway so the stream length does not depend on C.
        rng.random_range(0..n_classes);
        return b;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let mut c = rng.random_range(0..n_classes - 2);
    if c >= lo {
        c += 1;
    }
    if c >= hi {
        c += 1;
    }
    c
}

pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<TrajectoryDataset> {
    cfg.validate()?;
    let (n, c, d) = (cfg.n_examples, cfg.n_classes, cfg.depth);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let switch_prob = 1.0 - (-cfg.volatility_error).exp();
    let fresh = (1.0 - PROFILE_CORRELATION * PROFILE_CORRELATION).sqrt();

    let mut logits = Vec::with_capacity(n * d * c);
    let mut labels = Vec::with_capacity(n);
    let mut profile = vec![0.0f64; c];
    let mut row = vec![0.0f64; c];

    for _ in 0..n {
        let y = rng.random_range(0..c);
        let is_error = rng.random_bool(cfg.error_rate);
        let y_hat = if is_error { other_class(&mut rng, c, y) } else { y };
        let commit = if is_error {
            cfg.commit_depth_error.sample(&mut rng)
        } else {
            cfg.commit_depth_correct.sample(&mut rng)
        };
        let lead_scale = cfg.boost * rng.random_range(0.5..1.5);
        for p in profile.iter_mut() {
            *p = StandardNormal.sample(&mut rng);
        }

        let mut leader = other_class(&mut rng, c, y_hat);
        for depth in 1..=d {
            if depth >= commit {
                leader = y_hat;
            } else if depth > 1 {
                let u: f64 = rng.random();
                let candidate = other_class2(&mut rng, c, y_hat, leader);
                if is_error && u < switch_prob {
                    leader = candidate;
                }
            }
            for (v, p) in row.iter_mut().zip(&profile) {
                let e: f64 = StandardNormal.sample(&mut rng);
                *v = cfg.noise_scale * (PROFILE_CORRELATION * p + fresh * e);
            }
            let factor = if depth >= commit {
                1.0 - 0.5 * (-((depth - commit) as f64)).exp()
            } else {
                0.5
            };
            let runner_up = row
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != leader)
                .map(|(_, v)| *v)
                .fold(f64::NEG_INFINITY, f64::max);
            row[leader] = runner_up + lead_scale * factor;

            let start = logits.len();
            logits.extend(row.iter().map(|&v| v as f32));
            let stored = &mut logits[start..];
            let top = stored[leader];
            let best_other = stored
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != leader)
                .map(|(_, v)| *v)
                .fold(f32::NEG_INFINITY, f32::max);
            if top <= best_other {
                stored[leader] = best_other.next_up();
            }
        }
        labels.push(y as u32);
    }
    TrajectoryDataset::new(cfg.dataset_id.clone(), c, d, logits, labels)
}

/// Gaussian class clusters that become separable with depth, plus a
/// nearest-mean classifier on the last layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HiddenSynthConfig {
    pub dataset_id: String,
    pub n_examples: usize,
    pub n_classes: usize,
    pub n_layers: usize,
    pub hidden_dim: usize,
    /// Typical norm of a class mean.
    pub separation: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for HiddenSynthConfig {
    fn default() -> Self {
        Self {
            dataset_id: "synthetic-hidden".into(),
            n_examples: 2000,
            n_classes: 5,
            n_layers: 6,
            hidden_dim: 16,
            separation: 4.0,
            noise: 1.0,
            seed: 0,
        }
    }
}

pub fn generate_synthetic_hidden(cfg: &HiddenSynthConfig) -> Result<HiddenStateDataset> {
    if cfg.n_classes < 2 || cfg.n_layers == 0 || cfg.hidden_dim == 0 {
        return Err(Error::InvalidConfig(
            "need ≥2 classes, ≥1 layer and a positive hidden_dim".into(),
        ));
    }
    if !(cfg.separation > 0.0 && cfg.noise >= 0.0) {
        return Err(Error::InvalidConfig("separation must be positive".into()));
    }
    let (n, c, t, h) = (cfg.n_examples, cfg.n_classes, cfg.n_layers, cfg.hidden_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scale = cfg.separation / (h as f64).sqrt();
    let means: Vec<Vec<f64>> = (0..c)
        .map(|_| {
            (0..h)
                .map(|_| {
                    scale * {
                        let v: f64 = StandardNormal.sample(&mut rng);
                        v
                    }
                })
                .collect()
        })
        .collect();

    let mut states = Vec::with_capacity(n * t * h);
    let mut labels = Vec::with_capacity(n);
    let mut clf = Vec::with_capacity(n * c);
    let mut shared = vec![0.0f64; h];
    let mut last = vec![0.0f64; h];
    for _ in 0..n {
        let y = rng.random_range(0..c);
        let confuser = other_class(&mut rng, c, y);
        let difficulty: f64 = rng.random::<f64>().powi(2) * 0.9;
        for s in shared.iter_mut() {
            let v: f64 = StandardNormal.sample(&mut rng);
            *s = cfg.noise * v;
        }
        for layer in 0..t {
            let progress = (layer + 1) as f64 / t as f64;
            // Hard examples drift toward the confuser in late layers and are
            // noisier, so they also sit off the class manifold.
            let pull = difficulty * progress;
            let spread = 0.3 * cfg.noise * (1.0 + 2.0 * difficulty);
            for k in 0..h {
                let e: f64 = StandardNormal.sample(&mut rng);
                let centre = (1.0 - pull) * means[y][k] + pull * means[confuser][k];
                let v = progress * centre + shared[k] + spread * e;
                states.push(v as f32);
                last[k] = v;
            }
        }
        for mean in &means {
            let d2: f64 = last.iter().zip(mean).map(|(a, b)| (a - b) * (a - b)).sum();
            let e: f64 = StandardNormal.sample(&mut rng);
            clf.push((-0.5 * d2 + 0.1 * e) as f32);
        }
        labels.push(y as u32);
    }
    HiddenStateDataset::new(cfg.dataset_id.clone(), t, h, c, states, labels, clf)
}
