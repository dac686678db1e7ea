//! Evaluation protocol shared by the Hebbian models and the baselines.
//!
//! Unsupervised models are scored by mapping every unit (or cluster) to the
//! most frequent training label among the samples it wins, then reading the
//! test predictions through that map.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::math;

/// Unit → class map: the majority training label of each unit's winners.
/// Ties go to the lower class; units that win nothing map to class 0.
pub fn majority_label_map(winners: &[usize], labels: &[usize], n_units: usize, n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0usize; n_units * n_classes.max(1)];
    for (&w, &l) in winners.iter().zip(labels) {
        if w < n_units && l < n_classes {
            counts[w * n_classes + l] += 1;
        }
    }
    (0..n_units)
        .map(|u| {
            let row = &counts[u * n_classes..(u + 1) * n_classes];
            let mut best = 0;
            for (c, &n) in row.iter().enumerate() {
                if n > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Fraction of positions where `predicted == truth`.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}

/// Argmax per row (lowest index on ties).
pub fn row_argmax(m: &Matrix) -> Vec<usize> {
    m.row_iter().map(|r| math::argmax(r).unwrap_or(0)).collect()
}

/// Accuracy of the majority-label protocol: fit the map on the training
/// winners, apply it to the test winners.
pub fn majority_accuracy(
    train_winners: &[usize],
    train_labels: &[usize],
    test_winners: &[usize],
    test_labels: &[usize],
    n_units: usize,
    n_classes: usize,
) -> f64 {
    let map = majority_label_map(train_winners, train_labels, n_units, n_classes);
    let pred: Vec<usize> = test_winners.iter().map(|&w| map.get(w).copied().unwrap_or(0)).collect();
    accuracy(&pred, test_labels)
}

/// Cluster purity: the fraction of samples whose cluster's majority label
/// matches their own.
pub fn purity(assignments: &[usize], labels: &[usize], n_units: usize, n_classes: usize) -> f64 {
    majority_accuracy(assignments, labels, assignments, labels, n_units, n_classes)
}
