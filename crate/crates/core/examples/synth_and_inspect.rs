//! Generate a trajectory dataset, write it as LTRJ with its manifest, and
//! read both back.
//!
//! ```bash
//! cargo run --example synth_and_inspect
//! ```

use logitdyn::dataset::{
    generate_synthetic, load_trajectories, read_trajectory_header, write_trajectories, Manifest,
    SyntheticConfig,
};
use logitdyn::metrics::misclassification_rate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = generate_synthetic(&SyntheticConfig {
        n_examples: 2000,
        n_classes: 10,
        depth: 6,
        error_rate: 0.2,
        seed: 7,
        ..Default::default()
    })?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("synthetic.ltrj");
    write_trajectories(&ds, &path)?;

    let header = read_trajectory_header(&path)?;
    println!("header: {header:?}");
    let back = load_trajectories(&path)?;
    assert_eq!(back, ds);
    println!(
        "round trip ok, misclassification rate {:.3}",
        misclassification_rate(&back)
    );

    if let Some(m) = Manifest::read_for(&path)? {
        println!("manifest: {}", serde_json::to_string_pretty(&m)?);
    }

    // Ground truth: the last row of trajectory 0 is the classifier output.
    let t = back.trajectory(0);
    println!(
        "example 0: y={} ŷ={} final logits {:?}",
        back.true_label(0),
        back.predicted_label(0),
        t.at(t.depth() - 1)
    );
    Ok(())
}
