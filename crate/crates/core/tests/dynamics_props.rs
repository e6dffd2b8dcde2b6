mod oracle;

use logitdyn::dataset::Trajectory;
use logitdyn::dataset::TrajectoryDataset;
use logitdyn::features::{build_features, dynamics_features, restricted_softmax, FeatureConfig};
use proptest::prelude::*;

/// `(C, D, K, logits)`; half the cases draw small integers so ties occur.
/// The rest lie on a 1/1024 grid, so integer shifts are exact in f32.
fn trajectory() -> impl Strategy<Value = (usize, usize, usize, Vec<f32>)> {
    (2usize..=6, 1usize..=5, any::<bool>()).prop_flat_map(|(c, d, ints)| {
        let cell = if ints {
            (-2i32..=2).prop_map(|v| v as f32).boxed()
        } else {
            (-8192i32..8192).prop_map(|v| v as f32 / 1024.0).boxed()
        };
        (
            Just(c),
            Just(d),
            1usize..=c.min(3),
            prop::collection::vec(cell, c * d),
        )
    })
}

fn rows(logits: &[f32], c: usize) -> Vec<Vec<f64>> {
    logits
        .chunks(c)
        .map(|r| r.iter().map(|&v| v as f64).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn matches_naive_enumeration((c, _d, k, logits) in trajectory()) {
        let got = dynamics_features(Trajectory::new(&logits, c), k).unwrap();
        let want = oracle::dynamics(&rows(&logits, c), k);
        for j in 0..7 {
            prop_assert!((got[j] - want[j]).abs() <= 1e-12, "feature {j}: {} vs {}", got[j], want[j]);
        }
    }

    #[test]
    fn outputs_stay_in_range((c, d, k, logits) in trajectory()) {
        let f = dynamics_features(Trajectory::new(&logits, c), k).unwrap();
        for j in [0, 1, 3, 6] {
            prop_assert!((0.0..=1.0).contains(&f[j]));
        }
        prop_assert!(f[4] >= 0.0 && f[4] <= (d as f64).ln() + 1e-12);
        prop_assert!(f[2] >= k as f64 && f[2] <= (k * d).min(c) as f64);
        prop_assert!(f[5] >= 1.0 && f[5] <= d.min(c) as f64);
    }

    #[test]
    fn per_depth_shift_changes_nothing((c, _d, k, logits) in trajectory(), shift in prop::collection::vec(-3i32..=3, 5)) {
        // Integer shifts keep f32 arithmetic exact, so ties survive.
        let shifted: Vec<f32> = logits
            .chunks(c)
            .zip(&shift)
            .flat_map(|(r, s)| r.iter().map(move |v| v + *s as f32))
            .collect();
        let a = dynamics_features(Trajectory::new(&logits, c), k).unwrap();
        let b = dynamics_features(Trajectory::new(&shifted, c), k).unwrap();
        for j in 0..7 {
            prop_assert!((a[j] - b[j]).abs() <= 1e-12);
        }
    }

    #[test]
    fn class_permutation_changes_nothing((c, _d, k, logits) in (2usize..=6, 1usize..=5).prop_flat_map(|(c, d)| {
        // Each row is a shuffle of distinct values, so no tie-break is involved.
        let row = Just((0..c).map(|i| i as f32 * 0.75).collect::<Vec<f32>>()).prop_shuffle();
        (Just(c), Just(d), 1usize..=c.min(3), prop::collection::vec(row, d).prop_map(|r| r.concat()))
    }), perm_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut perm: Vec<usize> = (0..c).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
        let permuted: Vec<f32> = logits
            .chunks(c)
            .flat_map(|r| {
                let mut out = vec![0.0f32; c];
                for (i, &p) in perm.iter().enumerate() {
                    out[p] = r[i];
                }
                out
            })
            .collect();
        let a = dynamics_features(Trajectory::new(&logits, c), k).unwrap();
        let b = dynamics_features(Trajectory::new(&permuted, c), k).unwrap();
        for j in 0..7 {
            prop_assert!((a[j] - b[j]).abs() <= 1e-12);
        }
    }

    #[test]
    fn both_jaccard_forms_agree(a in prop::collection::vec(-5.0f64..5.0, 3), b in prop::collection::vec(-5.0f64..5.0, 3), shared in 0usize..=3) {
        // Classes 0..3 for the first set; the second shares `shared` of them.
        let sa: Vec<usize> = (0..3).collect();
        let sb: Vec<usize> = (0..3).map(|i| if i < shared { i } else { 10 + i }).collect();
        let wa = restricted_softmax(&a);
        let wb = restricted_softmax(&b);
        let mut da = vec![0.0; 16];
        let mut db = vec![0.0; 16];
        for (i, &c) in sa.iter().enumerate() { da[c] = wa[i]; }
        for (i, &c) in sb.iter().enumerate() { db[c] = wb[i]; }
        let inter: f64 = (0..16).filter(|c| sa.contains(c) && sb.contains(c)).map(|c| da[c].min(db[c])).sum();
        let general = oracle::weighted_jaccard(&sa, &da, &sb, &db);
        prop_assert!((general - inter / (2.0 - inter)).abs() <= 1e-12);
        prop_assert!((wa.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn feature_width_matches_config((c, d, k, logits) in trajectory(), dynamics in any::<bool>()) {
        prop_assume!(k < c);
        let labels: Vec<u32> = vec![0];
        let ds = TrajectoryDataset::new("p", c, d, logits, labels).unwrap();
        let cfg = FeatureConfig::new(d - 1, k, dynamics);
        let x = build_features(&ds, &cfg).unwrap();
        prop_assert_eq!(x.n_features(), d * (k + 1) + if dynamics { 7 } else { 0 });
        prop_assert_eq!(x.feature_names.len(), x.n_features());
    }
}
