//! Area under the precision–recall curve, computed as step-wise average
//! precision with tied scores treated as one threshold block.

use serde::{Deserialize, Serialize};

use crate::dataset::TrajectoryDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrResult {
    pub aucpr: f64,
    pub n_pos: usize,
    pub n_neg: usize,
    pub base_rate: f64,
}

/// Average precision of `scores` (higher = more likely positive) against
/// binary `labels`: `Σ (R_n − R_{n−1}) · P_n` over descending distinct
/// score thresholds.
pub fn aucpr(scores: &[f64], labels: &[bool]) -> Result<PrResult> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass(format!(
            "average precision needs both classes (pos={n_pos}, neg={n_neg})"
        )));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let (mut tp, mut fp) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    let mut k = 0;
    while k < order.len() {
        let threshold = scores[order[k]];
        while k < order.len() && scores[order[k]] == threshold {
            if labels[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let recall = tp as f64 / n_pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }

    Ok(PrResult {
        aucpr: ap,
        n_pos,
        n_neg,
        base_rate: n_pos as f64 / labels.len() as f64,
    })
}

/// AUCPR restricted to a subset of rows.
pub fn aucpr_on(scores: &[f64], labels: &[bool], rows: &[usize]) -> Result<PrResult> {
    let s: Vec<f64> = rows.iter().map(|&i| scores[i]).collect();
    let l: Vec<bool> = rows.iter().map(|&i| labels[i]).collect();
    aucpr(&s, &l)
}

/// Fraction of misclassified examples; 0 for an empty dataset.
pub fn misclassification_rate(ds: &TrajectoryDataset) -> f64 {
    if ds.n_examples() == 0 {
        return 0.0;
    }
    ds.errors().iter().filter(|&&e| e).count() as f64 / ds.n_examples() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_ranking() {
        let r = aucpr(&[0.9, 0.8, 0.3, 0.1], &[true, true, false, false]).unwrap();
        assert_eq!(r.aucpr, 1.0);
        assert_eq!((r.n_pos, r.n_neg), (2, 2));
        assert_eq!(r.base_rate, 0.5);
    }

    #[test]
    fn hand_walk() {
        // PR points: (R=.5, P=1), (R=.5, P=.5), (R=1, P=2/3).
        let r = aucpr(&[0.9, 0.8, 0.7], &[true, false, true]).unwrap();
        assert!((r.aucpr - (0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn tied_block() {
        let r = aucpr(&[0.5, 0.5], &[true, false]).unwrap();
        assert_eq!(r.aucpr, 0.5);
    }

    #[test]
    fn worst_ranking_is_not_clamped_to_base_rate() {
        let r = aucpr(&[0.1, 0.9, 0.8, 0.7], &[true, false, false, false]).unwrap();
        assert!((r.aucpr - 0.25).abs() < 1e-15);
        let r = aucpr(&[0.1, 0.2, 0.9, 0.8], &[true, true, false, false]).unwrap();
        // P at R=.5 is 1/3, at R=1 is 1/2.
        assert!((r.aucpr - (0.5 / 3.0 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn degenerate_labels() {
        assert!(matches!(
            aucpr(&[1.0, 2.0], &[true, true]),
            Err(Error::SingleClass(_))
        ));
        assert!(matches!(aucpr(&[1.0], &[false]), Err(Error::SingleClass(_))));
        assert!(aucpr(&[f64::NAN, 1.0], &[true, false]).is_err());
        assert!(aucpr(&[1.0], &[true, false]).is_err());
    }

    #[test]
    fn misclassification_rate_extremes() {
        let ds = TrajectoryDataset::new("m", 2, 1, vec![1.0, 0.0, 1.0, 0.0], vec![0, 0]).unwrap();
        assert_eq!(misclassification_rate(&ds), 0.0);
        let ds = ds.with_true_labels(vec![1, 1]).unwrap();
        assert_eq!(misclassification_rate(&ds), 1.0);
    }
}
