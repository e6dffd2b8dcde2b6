mod oracle;

use logitdyn::feature_matrix::FeatureMatrix;
use logitdyn::metrics::aucpr_on;
use logitdyn::probe::{loss_and_grad, train_probe, ProbeConfig};
use logitdyn::splits::stratified_split;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small instance: rows, labels with both classes, params, pos_weight.
fn instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<bool>, Vec<f64>, f64)> {
    (1usize..=4, 2usize..=10).prop_flat_map(|(f, n)| {
        (
            prop::collection::vec(prop::collection::vec(-2.0f64..2.0, f), n),
            prop::collection::vec(any::<bool>(), n)
                .prop_filter("both classes", |l| l.iter().any(|&x| x) && l.iter().any(|&x| !x)),
            prop::collection::vec(-1.0f64..1.0, f + 1),
            0.2f64..5.0,
        )
    })
}

/// Norm-wise relative error of the analytic gradient against central
/// differences (h = 1e-5) of the plain-form loss.
fn gradient_error(x: &[Vec<f64>], y: &[bool], params: &[f64], pw: f64) -> f64 {
    let f = x[0].len();
    let flat: Vec<f64> = x.concat();
    let rows: Vec<usize> = (0..x.len()).collect();
    let (_, g) = loss_and_grad(params, &flat, f, y, &rows, pw);
    let h = 1e-5;
    let fd: Vec<f64> = (0..=f)
        .map(|j| {
            let mut p = params.to_vec();
            p[j] += h;
            let up = oracle::weighted_bce_loss(&p[..f], p[f], x, y, pw);
            p[j] -= 2.0 * h;
            let down = oracle::weighted_bce_loss(&p[..f], p[f], x, y, pw);
            (up - down) / (2.0 * h)
        })
        .collect();
    let diff = g
        .iter()
        .zip(&fd)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = g
        .iter()
        .map(|a| a * a)
        .sum::<f64>()
        .sqrt()
        .max(fd.iter().map(|a| a * a).sum::<f64>().sqrt());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gradient_matches_central_differences((x, y, params, pw) in instance()) {
        let err = gradient_error(&x, &y, &params, pw);
        prop_assert!(err <= 1e-6, "relative error {err}");
    }

    #[test]
    fn loss_agrees_with_plain_form((x, y, params, pw) in instance()) {
        let f = x[0].len();
        let rows: Vec<usize> = (0..x.len()).collect();
        let (loss, _) = loss_and_grad(&params, &x.concat(), f, &y, &rows, pw);
        let want = oracle::weighted_bce_loss(&params[..f], params[f], &x, &y, pw);
        prop_assert!((loss - want).abs() <= 1e-12 * want.max(1.0));
    }
}

fn noisy_problem(n: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let e = rng.random::<f64>() < 0.3;
        let shift = if e { 0.8 } else { 0.0 };
        rows.push(vec![
            rng.random::<f64>() + shift,
            10.0 * rng.random::<f64>() - 5.0,
            rng.random::<f64>() - 0.5 * shift,
        ]);
        labels.push(e);
    }
    FeatureMatrix::from_rows(rows, labels, "x").unwrap()
}

#[test]
fn invertible_affine_column_maps_leave_aucpr_unchanged() {
    let x = noisy_problem(600, 1);
    let split = stratified_split(&x.labels, 0.5, 1).unwrap();
    let cfg = ProbeConfig {
        epochs: 20,
        ..Default::default()
    };
    let base = {
        let m = train_probe(&x, &split, &cfg).unwrap();
        aucpr_on(&m.score_matrix(&x).unwrap(), &x.labels, &split.test)
            .unwrap()
            .aucpr
    };
    for (col, a, b) in [(0usize, 3.0, -2.0), (1, -0.5, 10.0), (2, 1e3, 1e3)] {
        let mut y = x.clone();
        y.map_column(col, |v| a * v + b);
        let m = train_probe(&y, &split, &cfg).unwrap();
        let got = aucpr_on(&m.score_matrix(&y).unwrap(), &y.labels, &split.test)
            .unwrap()
            .aucpr;
        assert!((got - base).abs() <= 1e-9, "column {col}: {got} vs {base}");
    }
}

#[test]
fn training_never_increases_the_loss() {
    for seed in 0..10 {
        let x = noisy_problem(300, seed);
        let split = stratified_split(&x.labels, 0.5, seed).unwrap();
        let m = train_probe(
            &x,
            &split,
            &ProbeConfig {
                epochs: 10,
                seed,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(m.final_loss <= m.initial_loss, "seed {seed}");
    }
}

#[test]
fn perturbing_held_out_rows_leaves_the_standardizer_alone() {
    let x = noisy_problem(400, 4);
    let split = stratified_split(&x.labels, 0.5, 4).unwrap();
    let cfg = ProbeConfig {
        epochs: 5,
        ..Default::default()
    };
    let before = train_probe(&x, &split, &cfg).unwrap();

    let mut y = x.clone();
    for &i in split.probe_val.iter().chain(&split.test).chain(&split.head_train) {
        y.row_mut(i).iter_mut().for_each(|v| *v = *v * 100.0 - 7.0);
    }
    let after = train_probe(&y, &split, &cfg).unwrap();
    assert_eq!(after.standardizer, before.standardizer);

    // Test rows play no part at all, so the whole model is identical.
    let mut z = x.clone();
    for &i in &split.test {
        z.row_mut(i).iter_mut().for_each(|v| *v = -*v);
    }
    assert_eq!(train_probe(&z, &split, &cfg).unwrap(), before);
}
