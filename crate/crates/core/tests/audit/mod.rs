//! Leakage audits shared by the integration tests and the acceptance runner.

#![allow(dead_code)]

use logitdyn::dataset::{generate_synthetic_hidden, HiddenStateDataset, HiddenSynthConfig};
use logitdyn::experiments::{Chosen, Experiment, ExperimentConfig, HeadGrid, Method, PreparedDataset};
use logitdyn::probe::ProbeConfig;
use logitdyn::splits::{stratified_split, SplitAssignment};

/// Same states and classifier logits, with every test row's ground truth
/// moved to the next class.
pub fn corrupt_test_labels(hs: &HiddenStateDataset, split: &SplitAssignment) -> HiddenStateDataset {
    let mut y = hs.true_labels().to_vec();
    for &i in &split.test {
        y[i] = (y[i] + 1) % hs.n_classes() as u32;
    }
    let states = (0..hs.n_examples())
        .flat_map(|i| hs.states_of(i).to_vec())
        .collect();
    let clf = (0..hs.n_examples())
        .flat_map(|i| hs.classifier_logits(i).to_vec())
        .collect();
    HiddenStateDataset::new(
        hs.dataset_id.clone(),
        hs.n_layers(),
        hs.hidden_dim(),
        hs.n_classes(),
        states,
        y,
        clf,
    )
    .unwrap()
}

/// Per learned method: the chosen hyperparameters and probe-val AUCPR.
pub type Choices = Vec<(Method, Chosen, Option<f64>)>;

fn choices(hs: HiddenStateDataset, split: SplitAssignment) -> (Choices, Vec<f64>) {
    let cfg = ExperimentConfig {
        methods: vec![
            Method::LogitDynamics,
            Method::TopKLogits,
            Method::Mahalanobis,
            Method::LinearProbe,
        ],
        last_l: vec![1, 3],
        top_k: vec![1, 3],
        heads: HeadGrid {
            lr: vec![1e-3, 1e-2],
            epochs: vec![2, 5],
            batch_size: 64,
            weight_decay: 0.0,
        },
        probe: ProbeConfig {
            epochs: 10,
            ..Default::default()
        },
        ..Default::default()
    };
    let d = PreparedDataset::new("audit", None, Some(hs), Some(split), 0.3, 0).unwrap();
    let r = Experiment::new(cfg, vec![d])
        .unwrap()
        .run_in_distribution()
        .unwrap();
    let rows = &r.in_distribution[0].methods;
    (
        rows.iter()
            .map(|m| (m.method, m.chosen.clone(), m.val_aucpr))
            .collect(),
        rows.iter().map(|m| m.test_aucpr).collect(),
    )
}

/// Runs the learned methods on a clean and a test-corrupted copy under one
/// fixed split. Returns both choice lists and whether any test AUCPR moved
/// (which shows the corruption actually reached the test rows).
pub fn test_label_corruption_audit(seed: u64) -> (Choices, Choices, bool) {
    let hs = generate_synthetic_hidden(&HiddenSynthConfig {
        n_examples: 1200,
        n_classes: 5,
        n_layers: 5,
        hidden_dim: 8,
        seed,
        ..Default::default()
    })
    .unwrap();
    let split = stratified_split(&hs.errors(), 0.3, seed).unwrap();
    let bad = corrupt_test_labels(&hs, &split);
    let (clean, clean_test) = choices(hs, split.clone());
    let (corrupt, corrupt_test) = choices(bad, split);
    (clean, corrupt, clean_test != corrupt_test)
}
