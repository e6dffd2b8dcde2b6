//! Feature rows for a single hand-written trajectory.
//!
//! The trajectory switches its top-1 class twice before settling, which
//! shows up in the switch rate, the unique-count and the commitment depth.
//!
//! ```bash
//! cargo run --example dynamics_features
//! ```

use logitdyn::dataset::Trajectory;
use logitdyn::features::{dynamics_features, feature_row, FeatureConfig, DYNAMICS_FEATURE_NAMES};
use logitdyn::ranking::argmax;

fn main() -> logitdyn::Result<()> {
    #[rustfmt::skip]
    let logits: Vec<f32> = vec![
        2.0, 1.0, 0.0, 0.5,
        0.5, 2.5, 0.0, 1.0,
        1.0, 0.0, 3.0, 0.2,
        0.1, 0.3, 3.5, 1.0,
        0.0, 0.1, 4.0, 1.5,
    ];
    let traj = Trajectory::new(&logits, 4);
    let predicted = argmax(traj.at(traj.depth() - 1));

    let dyn_feats = dynamics_features(traj, 2)?;
    for (name, v) in DYNAMICS_FEATURE_NAMES.iter().zip(dyn_feats) {
        println!("{name:>24}  {v:.4}");
    }

    // L = 4 heads plus the classifier row covers the whole trajectory.
    let cfg = FeatureConfig::new(4, 2, true);
    let row = feature_row(traj, predicted, &cfg)?;
    println!();
    for (name, v) in cfg.feature_names().iter().zip(&row) {
        println!("{name:>24}  {v:.4}");
    }
    Ok(())
}
