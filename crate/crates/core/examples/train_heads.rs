//! Train per-layer linear heads on hidden states and project them into
//! logit trajectories.
//!
//! ```bash
//! cargo run --release --example train_heads
//! ```

use logitdyn::dataset::{generate_synthetic_hidden, HiddenSynthConfig};
use logitdyn::heads::{
    project_to_trajectories, suffix_layers, train_layer_head, train_layer_heads, HeadTrainConfig,
};
use logitdyn::ranking::argmax;
use logitdyn::splits::stratified_split;

fn main() -> logitdyn::Result<()> {
    let hs = generate_synthetic_hidden(&HiddenSynthConfig {
        n_examples: 3000,
        n_classes: 6,
        n_layers: 8,
        seed: 5,
        ..Default::default()
    })?;
    let split = stratified_split(&hs.errors(), 0.2, 5)?;
    let cfg = HeadTrainConfig {
        lr: 1e-2,
        epochs: 10,
        batch_size: 64,
        ..Default::default()
    };

    let (_, history) = train_layer_head(&hs, &split.head_train, hs.n_layers() - 1, &cfg)?;
    println!(
        "last-layer head loss by epoch: {:?}",
        history.iter().map(|l| format!("{l:.3}")).collect::<Vec<_>>()
    );

    let last_l = 4;
    let layers = suffix_layers(hs.n_layers(), last_l);
    let heads = train_layer_heads(&hs, &split.head_train, &layers, &cfg)?;
    let traj = project_to_trajectories(&hs, &heads, last_l)?;
    println!(
        "trajectory depth {} (heads on layers {layers:?} plus the classifier)",
        traj.depth()
    );

    // Head accuracy on test rows, per depth.
    for d in 0..traj.depth() {
        let hits = split
            .test
            .iter()
            .filter(|&&i| argmax(traj.trajectory(i).at(d)) as u32 == traj.true_label(i))
            .count();
        println!(
            "depth {d}: test accuracy {:.3}",
            hits as f64 / split.test.len() as f64
        );
    }
    Ok(())
}
