//! Cross-domain AUCPR with and without the seven dynamics features.
//!
//! ```bash
//! cargo run --release --example ablation
//! ```

use logitdyn::dataset::{generate_synthetic, SyntheticConfig};
use logitdyn::experiments::{Experiment, ExperimentConfig, Method, PreparedDataset};
use logitdyn::probe::ProbeConfig;

fn main() -> logitdyn::Result<()> {
    let make = |name: &str, classes, scale, seed| -> logitdyn::Result<PreparedDataset> {
        let ds = generate_synthetic(&SyntheticConfig {
            dataset_id: name.to_string(),
            n_examples: 4000,
            n_classes: classes,
            depth: 6,
            noise_scale: scale,
            seed,
            ..Default::default()
        })?;
        PreparedDataset::new(name, Some(ds), None, None, 0.3, seed)
    };
    let cfg = ExperimentConfig {
        methods: vec![Method::LogitDynamics],
        last_l: vec![3],
        top_k: vec![3],
        probe: ProbeConfig {
            epochs: 30,
            ..Default::default()
        },
        ..Default::default()
    };
    let exp = Experiment::new(cfg, vec![make("narrow", 10, 1.0, 1)?, make("wide", 20, 3.0, 2)?])?;
    let report = exp.run_ablation()?;
    let a = report.ablation.as_ref().expect("ablation results");
    for (r, row) in a.difference.row_labels.iter().zip(&a.difference.values) {
        println!(
            "train {r}: {:?}",
            row.iter()
                .map(|v| v.map(|v| format!("{v:+.4}")))
                .collect::<Vec<_>>()
        );
    }
    println!(
        "mean diagonal {:?}, mean off-diagonal {:?}",
        a.mean_diagonal, a.mean_off_diagonal
    );
    Ok(())
}
