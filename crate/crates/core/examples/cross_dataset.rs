//! Train on one synthetic domain, test on another. Domains differ in class
//! count and logit scale; the transferred probe keeps its weights and
//! refits only the standardizer on the target's probe-train rows.
//!
//! ```bash
//! cargo run --release --example cross_dataset -- /tmp/cross
//! ```

use logitdyn::dataset::{generate_synthetic, SyntheticConfig};
use logitdyn::experiments::{Experiment, ExperimentConfig, Method, PreparedDataset};
use logitdyn::probe::ProbeConfig;

fn domain(name: &str, classes: usize, scale: f64, seed: u64) -> logitdyn::Result<PreparedDataset> {
    let ds = generate_synthetic(&SyntheticConfig {
        dataset_id: name.into(),
        n_examples: 4000,
        n_classes: classes,
        depth: 6,
        noise_scale: scale,
        seed,
        ..Default::default()
    })?;
    PreparedDataset::new(name, Some(ds), None, None, 0.3, seed)
}

fn main() -> logitdyn::Result<()> {
    let out = std::env::args().nth(1);
    let cfg = ExperimentConfig {
        methods: vec![Method::LogitDynamics, Method::TopKLogits, Method::MaxLogit],
        last_l: vec![2, 4],
        top_k: vec![1, 3],
        probe: ProbeConfig {
            epochs: 30,
            ..Default::default()
        },
        ..Default::default()
    };
    let datasets = vec![
        domain("a", 10, 1.0, 1)?,
        domain("b", 20, 2.0, 2)?,
        domain("c", 5, 0.5, 3)?,
    ];
    let report = Experiment::new(cfg, datasets)?.run_cross_matrix()?;
    let cross = report.cross.as_ref().expect("cross results");
    for (name, m) in &cross.aucpr {
        println!("{name}");
        for (r, row) in m.row_labels.iter().zip(&m.values) {
            let cells: Vec<String> = row
                .iter()
                .map(|v| v.map_or("  n/a ".into(), |v| format!("{v:.4}")))
                .collect();
            println!("  train {r}: {}", cells.join("  "));
        }
    }
    if let Some(dir) = out {
        report.write(&dir)?;
        println!("wrote {dir}/report.json and heatmaps");
    }
    Ok(())
}
