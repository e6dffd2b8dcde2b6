//! Tied-covariance Gaussian scores on synthetic CLS states.
//!
//! Fits class means and a shared precision per layer on the head-train
//! rows, then reports how well each layer's score separates errors from
//! correct predictions on the test rows, and what a probe over all layer
//! scores achieves.
//!
//! ```bash
//! cargo run --release --example mahalanobis
//! ```

use logitdyn::baselines::{fit_mahalanobis, mahalanobis_features};
use logitdyn::dataset::{generate_synthetic_hidden, HiddenSynthConfig};
use logitdyn::metrics::aucpr_on;
use logitdyn::probe::{train_probe, ProbeConfig};
use logitdyn::splits::stratified_split;

fn main() -> logitdyn::Result<()> {
    let hs = generate_synthetic_hidden(&HiddenSynthConfig {
        n_examples: 4000,
        n_classes: 8,
        n_layers: 8,
        hidden_dim: 16,
        seed: 3,
        ..Default::default()
    })?;
    let errors = hs.errors();
    let split = stratified_split(&errors, 0.2, 3)?;

    let layers: Vec<usize> = (0..hs.n_layers()).collect();
    let model = fit_mahalanobis(&hs, &split.head_train, &layers)?;
    let x = mahalanobis_features(&model, &hs)?;

    println!(
        "misclassification rate {:.3}",
        errors.iter().filter(|&&e| e).count() as f64 / errors.len() as f64
    );
    println!("layer  test AUCPR of -score");
    for (j, t) in layers.iter().enumerate() {
        // Closer to a class mean means more typical, so negate for an error score.
        let s: Vec<f64> = (0..x.n_rows()).map(|i| -x.row(i)[j]).collect();
        println!("{t:>5}  {:.4}", aucpr_on(&s, &errors, &split.test)?.aucpr);
    }

    let probe = train_probe(&x, &split, &ProbeConfig::default())?;
    let s = probe.score_matrix(&x)?;
    println!(
        "probe over all layers: test AUCPR {:.4}",
        aucpr_on(&s, &errors, &split.test)?.aucpr
    );
    Ok(())
}
