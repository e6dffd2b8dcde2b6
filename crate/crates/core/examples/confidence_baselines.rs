//! Scalar confidence scores on the final logits and their AUCPR as error
//! detectors.
//!
//! ```bash
//! cargo run --release --example confidence_baselines
//! ```

use logitdyn::baselines::{error_scores, ScalarMethod};
use logitdyn::dataset::{generate_synthetic, SyntheticConfig};
use logitdyn::metrics::aucpr;

fn main() -> logitdyn::Result<()> {
    let ds = generate_synthetic(&SyntheticConfig {
        n_examples: 10_000,
        seed: 1,
        ..Default::default()
    })?;
    let errors = ds.errors();
    let base = errors.iter().filter(|&&e| e).count() as f64 / errors.len() as f64;
    println!("base rate {base:.4}");
    for method in [
        ScalarMethod::MaxLogit,
        ScalarMethod::Entropy,
        ScalarMethod::Margin,
        ScalarMethod::Energy,
    ] {
        let s = error_scores(&ds, method, 1.0)?;
        println!("{:>10}  AUCPR {:.4}", method.name(), aucpr(&s, &errors)?.aucpr);
    }
    Ok(())
}
