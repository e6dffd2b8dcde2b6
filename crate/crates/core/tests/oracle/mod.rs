//! Deliberately naive reference implementations shared by the property
//! tests and the acceptance runner. Nothing here calls into the library's
//! feature or metric code.

#![allow(dead_code)]

use std::collections::BTreeSet;

/// Top-1 class by linear scan; a later class must be strictly larger.
pub fn top1(row: &[f64]) -> usize {
    let mut best = 0;
    for c in 1..row.len() {
        if row[c] > row[best] {
            best = c;
        }
    }
    best
}

/// Top-K by repeated selection of the largest remaining logit, lowest
/// index first on ties.
pub fn topk(row: &[f64], k: usize) -> Vec<usize> {
    let mut taken = vec![false; row.len()];
    let mut out = Vec::new();
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for c in 0..row.len() {
            if taken[c] {
                continue;
            }
            match best {
                Some(b) if row[c] <= row[b] => {}
                _ => best = Some(c),
            }
        }
        let b = best.unwrap();
        taken[b] = true;
        out.push(b);
    }
    out
}

/// Softmax over the classes in `set`, as a dense C-vector (0 outside).
pub fn restricted_weights(row: &[f64], set: &[usize]) -> Vec<f64> {
    let m = set.iter().map(|&c| row[c]).fold(f64::NEG_INFINITY, f64::max);
    let denom: f64 = set.iter().map(|&c| (row[c] - m).exp()).sum();
    let mut w = vec![0.0; row.len()];
    for &c in set {
        w[c] = (row[c] - m).exp() / denom;
    }
    w
}

/// Weighted Jaccard between two weighted sets, enumerating every class.
pub fn weighted_jaccard(a: &[usize], wa: &[f64], b: &[usize], wb: &[f64]) -> f64 {
    let sa: BTreeSet<usize> = a.iter().copied().collect();
    let sb: BTreeSet<usize> = b.iter().copied().collect();
    let mut inter = 0.0;
    for c in sa.intersection(&sb) {
        inter += wa[*c].min(wb[*c]);
    }
    let ta: f64 = sa.iter().map(|&c| wa[c]).sum();
    let tb: f64 = sb.iter().map(|&c| wb[c]).sum();
    inter / (ta + tb - inter)
}

/// The seven dynamics features of a `depth × classes` trajectory.
pub fn dynamics(rows: &[Vec<f64>], k: usize) -> [f64; 7] {
    let depth = rows.len();
    let l = depth - 1;
    let tops: Vec<usize> = rows.iter().map(|r| top1(r)).collect();
    let sets: Vec<Vec<usize>> = rows.iter().map(|r| topk(r, k)).collect();
    let weights: Vec<Vec<f64>> = rows
        .iter()
        .zip(&sets)
        .map(|(r, s)| restricted_weights(r, s))
        .collect();

    let (switch, jaccard) = if l == 0 {
        (0.0, 1.0)
    } else {
        let mut changes = 0usize;
        let mut j = 0.0;
        for d in 0..l {
            if tops[d] != tops[d + 1] {
                changes += 1;
            }
            j += weighted_jaccard(&sets[d], &weights[d], &sets[d + 1], &weights[d + 1]);
        }
        (changes as f64 / l as f64, j / l as f64)
    };

    let union: BTreeSet<usize> = sets.iter().flatten().copied().collect();
    let distinct: BTreeSet<usize> = tops.iter().copied().collect();
    let mut max_count = 0;
    let mut entropy = 0.0;
    for c in &distinct {
        let n = tops.iter().filter(|t| *t == c).count();
        max_count = max_count.max(n);
        let p = n as f64 / depth as f64;
        entropy -= p * p.ln();
    }

    // Earliest 1-based depth from which the top-1 stays at the final class.
    let last = tops[l];
    let mut star = depth;
    for start in (1..=depth).rev() {
        if (start - 1..depth).all(|d| tops[d] == last) {
            star = start;
        } else {
            break;
        }
    }
    let commitment = if l == 0 { 0.0 } else { (star - 1) as f64 / l as f64 };

    [
        switch,
        jaccard,
        union.len() as f64,
        max_count as f64 / depth as f64,
        entropy,
        distinct.len() as f64,
        commitment,
    ]
}

/// Average precision by enumerating every distinct threshold and counting
/// from scratch at each one.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> f64 {
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let n_pos = labels.iter().filter(|&&l| l).count() as f64;
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for t in thresholds {
        let mut tp = 0.0;
        let mut predicted = 0.0;
        for (s, l) in scores.iter().zip(labels) {
            if *s >= t {
                predicted += 1.0;
                if *l {
                    tp += 1.0;
                }
            }
        }
        let recall = tp / n_pos;
        ap += (recall - prev_recall) * (tp / predicted);
        prev_recall = recall;
    }
    ap
}

/// Mean weighted BCE over all rows with unclamped probabilities, written
/// in the numerically plain form.
pub fn weighted_bce_loss(w: &[f64], b: f64, x: &[Vec<f64>], y: &[bool], pos_weight: f64) -> f64 {
    let mut total = 0.0;
    for (row, &e) in x.iter().zip(y) {
        let s = b + row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
        let p = 1.0 / (1.0 + (-s).exp());
        total += if e { -pos_weight * p.ln() } else { -(1.0 - p).ln() };
    }
    total / x.len() as f64
}
