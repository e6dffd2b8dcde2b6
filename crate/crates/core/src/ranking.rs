//! Deterministic argmax / top-K over logit rows.
//!
//! Ties are always broken toward the lowest class index, so the same row
//! yields the same ranking on every platform.

use std::cmp::Ordering;

/// Descending by value, ascending by index on ties.
#[inline]
fn rank_order<T: Copy + Into<f64>>(row: &[T], a: usize, b: usize) -> Ordering {
    let (va, vb): (f64, f64) = (row[a].into(), row[b].into());
    vb.total_cmp(&va).then(a.cmp(&b))
}

/// Index of the largest entry, lowest index on ties. Panics on an empty row.
pub fn argmax<T: Copy + Into<f64>>(row: &[T]) -> usize {
    assert!(!row.is_empty(), "argmax of an empty row");
    let mut best = 0;
    let mut best_val: f64 = row[0].into();
    for (i, &v) in row.iter().enumerate().skip(1) {
        let v: f64 = v.into();
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

/// Indices of the `k` largest entries in rank order.
pub fn top_k_indices<T: Copy + Into<f64>>(row: &[T], k: usize) -> Vec<usize> {
    top_k_indices_excluding(row, k, None)
}

/// Like [`top_k_indices`], optionally skipping one class (the prediction).
pub fn top_k_indices_excluding<T: Copy + Into<f64>>(
    row: &[T],
    k: usize,
    exclude: Option<usize>,
) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).filter(|&i| Some(i) != exclude).collect();
    let k = k.min(idx.len());
    if k == 0 {
        return Vec::new();
    }
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, |&a, &b| rank_order(row, a, b));
        idx.truncate(k);
    }
    idx.sort_unstable_by(|&a, &b| rank_order(row, a, b));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[1.0f32, 4.0, 4.0]), 1);
        assert_eq!(argmax(&[2.0f32, 2.0]), 0);
        assert_eq!(argmax(&[-3.0f64]), 0);
    }

    #[test]
    fn top_k_ties_and_exclusion() {
        let row = [1.0f32, 4.0, 4.0, 0.5];
        assert_eq!(top_k_indices(&row, 2), vec![1, 2]);
        assert_eq!(top_k_indices_excluding(&row, 2, Some(1)), vec![2, 0]);
        assert_eq!(top_k_indices(&row, 10), vec![1, 2, 0, 3]);
        assert!(top_k_indices(&row, 0).is_empty());
    }

    #[test]
    fn top_k_matches_full_sort() {
        let row = [3.0f32, -1.0, 3.0, 7.0, 0.0, 3.0, 7.0];
        let mut full: Vec<usize> = (0..row.len()).collect();
        full.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        for k in 0..=row.len() {
            assert_eq!(top_k_indices(&row, k), full[..k].to_vec());
        }
    }
}
