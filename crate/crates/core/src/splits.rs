//! Stratified four-way split: test, head-training, probe-train, probe-val.
//!
//! Stages, each stratified on the error label:
//!
//! 1. 15% of all examples → test;
//! 2. `p_probe` of the remaining 85% → probe pool, the rest → head training;
//! 3. probe pool → 75% probe-train / 25% probe-val.
//!
//! Every stage takes `round_half_up(frac · n)` items of which
//! `round_half_up(frac · n_pos)` are positives; negatives fill the rest.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TEST_FRACTION: f64 = 0.15;
pub const PROBE_TRAIN_FRACTION: f64 = 0.75;
pub const DEFAULT_P_PROBE: f64 = 0.2;
pub const MIN_EXAMPLES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub n_examples: usize,
    pub head_train: Vec<usize>,
    pub probe_train: Vec<usize>,
    pub probe_val: Vec<usize>,
    pub test: Vec<usize>,
    pub p_probe: f64,
    pub seed: u64,
}

/// Half-up rounding with a small guard against `k.4999999` artefacts.
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5 + 1e-9).floor().max(0.0) as usize
}

struct Pools {
    pos: Vec<usize>,
    neg: Vec<usize>,
}

impl Pools {
    fn len(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    /// Removes a stratified `frac` share (after shuffling) and returns it.
    fn take(&mut self, frac: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let size = round_half_up(frac * self.len() as f64).min(self.len());
        let n_pos = round_half_up(frac * self.pos.len() as f64)
            .min(self.pos.len())
            .min(size);
        let n_neg = (size - n_pos).min(self.neg.len());
        // Not enough negatives: top up with positives so the size holds.
        let n_pos = (size - n_neg).min(self.pos.len());
        self.pos.shuffle(rng);
        self.neg.shuffle(rng);
        let mut out: Vec<usize> = self.pos.drain(..n_pos).collect();
        out.extend(self.neg.drain(..n_neg));
        out.sort_unstable();
        out
    }

    fn into_sorted(self) -> Vec<usize> {
        let mut all = self.pos;
        all.extend(self.neg);
        all.sort_unstable();
        all
    }
}

/// Splits example indices stratified by `labels` (`true` = error).
pub fn stratified_split(labels: &[bool], p_probe: f64, seed: u64) -> Result<SplitAssignment> {
    let n = labels.len();
    if n < MIN_EXAMPLES {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_EXAMPLES} examples to split, got {n}"
        )));
    }
    if !(p_probe > 0.0 && p_probe < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "p_probe must lie in (0, 1), got {p_probe}"
        )));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    if n_pos == 0 || n_pos == n {
        return Err(Error::SingleClass(format!(
            "{n_pos} of {n} examples are errors; stratification needs both classes"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pools = Pools {
        pos: (0..n).filter(|&i| labels[i]).collect(),
        neg: (0..n).filter(|&i| !labels[i]).collect(),
    };
    let test = pools.take(TEST_FRACTION, &mut rng);
    let probe_pool = pools.take(p_probe, &mut rng);
    let head_train = pools.into_sorted();

    let mut probe = Pools {
        pos: probe_pool.iter().copied().filter(|&i| labels[i]).collect(),
        neg: probe_pool.iter().copied().filter(|&i| !labels[i]).collect(),
    };
    let probe_train = probe.take(PROBE_TRAIN_FRACTION, &mut rng);
    let probe_val = probe.into_sorted();

    Ok(SplitAssignment {
        n_examples: n,
        head_train,
        probe_train,
        probe_val,
        test,
        p_probe,
        seed,
    })
}

impl SplitAssignment {
    /// Checks coverage and disjointness against a dataset of size `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.n_examples != n {
            return Err(Error::DimensionMismatch(format!(
                "split covers {} examples, dataset has {n}",
                self.n_examples
            )));
        }
        let mut seen = vec![false; n];
        for &i in self.subsets().iter().flat_map(|(_, s)| s.iter()) {
            if i >= n || seen[i] {
                return Err(Error::InvalidConfig(format!(
                    "split index {i} is out of range or repeated"
                )));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidConfig("split does not cover every example".into()));
        }
        Ok(())
    }

    pub fn subsets(&self) -> [(&'static str, &[usize]); 4] {
        [
            ("head_train", &self.head_train),
            ("probe_train", &self.probe_train),
            ("probe_val", &self.probe_val),
            ("test", &self.test),
        ]
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, serde_json::to_string_pretty(self)? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
