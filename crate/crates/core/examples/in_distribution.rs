//! In-distribution comparison of every trajectory-based method, with the
//! (L, K) grid selected on probe-val.
//!
//! ```bash
//! cargo run --release --example in_distribution
//! ```

use logitdyn::dataset::{generate_synthetic, SyntheticConfig};
use logitdyn::experiments::{Experiment, ExperimentConfig, Method, PreparedDataset};
use logitdyn::probe::ProbeConfig;

fn main() -> logitdyn::Result<()> {
    let ds = generate_synthetic(&SyntheticConfig {
        dataset_id: "synthetic".into(),
        n_examples: 6000,
        depth: 8,
        seed: 4,
        ..Default::default()
    })?;
    let data = PreparedDataset::new("synthetic", Some(ds), None, None, 0.2, 4)?;
    let cfg = ExperimentConfig {
        methods: Method::ALL.to_vec(),
        last_l: vec![1, 3, 5, 7],
        top_k: vec![1, 3, 5],
        probe: ProbeConfig {
            epochs: 30,
            ..Default::default()
        },
        seed: 4,
        ..Default::default()
    };
    let report = Experiment::new(cfg, vec![data])?.run_in_distribution()?;
    for d in &report.in_distribution {
        for m in &d.methods {
            println!(
                "{:>16}  test {:.4}  chosen {:?}",
                m.method.name(),
                m.test_aucpr,
                m.chosen
            );
        }
        println!("skipped (no hidden states): {:?}", d.skipped);
        match (d.delta, &d.delta_reference) {
            (Some(v), Some(r)) => println!("delta vs {r}: {v:+.4}"),
            _ => println!("delta: n/a"),
        }
    }
    Ok(())
}
