//! Build LogitDynamics features on a synthetic dataset and train the
//! weighted logistic probe.
//!
//! ```bash
//! cargo run --release --example error_probe
//! ```

use logitdyn::baselines::topk_logit_matrix;
use logitdyn::dataset::{generate_synthetic, SyntheticConfig};
use logitdyn::features::{build_features, FeatureConfig};
use logitdyn::metrics::aucpr_on;
use logitdyn::probe::{train_probe, ProbeConfig};
use logitdyn::splits::stratified_split;

fn main() -> logitdyn::Result<()> {
    let ds = generate_synthetic(&SyntheticConfig {
        n_examples: 8000,
        n_classes: 10,
        depth: 8,
        seed: 2,
        ..Default::default()
    })?;
    let split = stratified_split(&ds.errors(), 0.3, 2)?;
    let probe_cfg = ProbeConfig {
        epochs: 40,
        ..Default::default()
    };

    let x = build_features(&ds, &FeatureConfig::new(5, 3, true))?;
    let probe = train_probe(&x, &split, &probe_cfg)?;
    let s = probe.score_matrix(&x)?;
    println!(
        "logit dynamics: {} features, best epoch {}, val AUCPR {:.4}, test AUCPR {:.4}",
        x.n_features(),
        probe.best_epoch,
        probe.val_aucpr.unwrap_or(f64::NAN),
        aucpr_on(&s, &x.labels, &split.test)?.aucpr
    );

    let top = topk_logit_matrix(&ds, 3)?;
    let p = train_probe(&top, &split, &probe_cfg)?;
    let s = p.score_matrix(&top)?;
    println!(
        "final-layer top-3 logits: test AUCPR {:.4}",
        aucpr_on(&s, &top.labels, &split.test)?.aucpr
    );

    // Largest standardized weights.
    let names = &x.feature_names;
    let mut w: Vec<(&String, f64)> = names.iter().zip(probe.weights.iter().copied()).collect();
    w.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    for (n, v) in w.iter().take(5) {
        println!("{n:>24}  {v:+.3}");
    }
    Ok(())
}
