mod oracle;

use logitdyn::metrics::aucpr;
use proptest::prelude::*;

/// Scores from a small set so tie blocks are common; at least one of each label.
fn scored() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..=12).prop_flat_map(|n| {
        (
            prop::collection::vec((0i32..6).prop_map(|v| v as f64 * 0.25), n),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_filter("both classes", |(_, l)| {
                l.iter().any(|&x| x) && l.iter().any(|&x| !x)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matches_threshold_enumeration((s, l) in scored()) {
        let got = aucpr(&s, &l).unwrap();
        prop_assert!((got.aucpr - oracle::average_precision(&s, &l)).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&got.aucpr));
        prop_assert_eq!(got.n_pos + got.n_neg, s.len());
    }

    #[test]
    fn strictly_increasing_transform_is_invisible((s, l) in scored()) {
        let t: Vec<f64> = s.iter().map(|v| (3.0 * v).exp() - 7.0).collect();
        prop_assert!((aucpr(&s, &l).unwrap().aucpr - aucpr(&t, &l).unwrap().aucpr).abs() <= 1e-12);
    }

    #[test]
    fn flipped_problem_matches_oracle((s, l) in scored()) {
        // Negated scores against flipped labels rank the complementary class.
        let ns: Vec<f64> = s.iter().map(|v| -v).collect();
        let nl: Vec<bool> = l.iter().map(|v| !v).collect();
        let got = aucpr(&ns, &nl).unwrap();
        prop_assert!((got.aucpr - oracle::average_precision(&ns, &nl)).abs() <= 1e-12);
        prop_assert!((got.base_rate + aucpr(&s, &l).unwrap().base_rate - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn all_tied_scores_give_the_base_rate() {
    let l = [true, false, false, true, false];
    assert!((aucpr(&[1.0; 5], &l).unwrap().aucpr - 0.4).abs() < 1e-15);
}
