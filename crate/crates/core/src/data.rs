//! In-memory datasets and synthetic fixtures.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

use crate::linalg::Matrix;
use crate::rng;
use crate::{Error, Result};

/// Row-major features with optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: Matrix,
    pub labels: Option<Vec<usize>>,
    pub n_classes: usize,
}

impl LabeledDataset {
    pub fn new(features: Matrix, labels: Option<Vec<usize>>, n_classes: usize) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != features.rows() {
                return Err(Error::DimensionMismatch {
                    what: "label count",
                    expected: features.rows(),
                    found: l.len(),
                });
            }
            if let Some(&bad) = l.iter().find(|&&v| v >= n_classes) {
                return Err(Error::DimensionMismatch {
                    what: "label value below n_classes",
                    expected: n_classes,
                    found: bad,
                });
            }
        }
        Ok(LabeledDataset { features, labels, n_classes })
    }

    pub fn unlabeled(features: Matrix) -> Self {
        LabeledDataset { features, labels: None, n_classes: 0 }
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn labels(&self) -> Result<&[usize]> {
        self.labels.as_deref().ok_or(Error::MissingLabels)
    }

    /// The first `n` rows (or all of them).
    pub fn head(&self, n: usize) -> LabeledDataset {
        let n = n.min(self.len());
        let idx: Vec<usize> = (0..n).collect();
        self.subset(&idx)
    }

    pub fn subset(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            features: self.features.select_rows(idx),
            labels: self.labels.as_ref().map(|l| idx.iter().map(|&i| l[i]).collect()),
            n_classes: self.n_classes,
        }
    }
}

/// `k` Gaussian blobs of `n_per` points in `[0,1]^dim`.
///
/// The features are split into `k` disjoint seeded-random blocks; center `c`
/// is 0.9 on block `c` and 0.1 elsewhere, so every pair of centers is well
/// separated in Euclidean distance and in direction. Points add isotropic
/// noise with standard deviation `spread` and are clipped to `[0,1]`. Rows
/// are grouped by cluster; labels are the cluster indices.
pub fn synth_clusters(k: usize, n_per: usize, dim: usize, spread: f64, seed: u64) -> Result<LabeledDataset> {
    if k == 0 || n_per == 0 {
        return Err(Error::InvalidArgument("synth_clusters needs k ≥ 1 and n_per ≥ 1"));
    }
    if dim < k {
        return Err(Error::InvalidArgument("synth_clusters needs dim ≥ k"));
    }
    if !(spread >= 0.0) || !spread.is_finite() {
        return Err(Error::InvalidValue { what: "spread", value: spread });
    }
    let mut r = rng::stream(seed, rng::DATA);
    let mut perm: Vec<usize> = (0..dim).collect();
    perm.shuffle(&mut r);
    let mut centers = Matrix::zeros(k, dim);
    for (pos, &feature) in perm.iter().enumerate() {
        let block = pos * k / dim;
        for c in 0..k {
            centers.set(c, feature, if c == block { 0.9 } else { 0.1 });
        }
    }
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut features = Matrix::zeros(k * n_per, dim);
    let mut labels = Vec::with_capacity(k * n_per);
    for c in 0..k {
        for s in 0..n_per {
            let row = features.row_mut(c * n_per + s);
            for (f, v) in row.iter_mut().enumerate() {
                let z: f64 = noise.sample(&mut r);
                *v = (centers.get(c, f) + spread * z).clamp(0.0, 1.0);
            }
            labels.push(c);
        }
    }
    LabeledDataset::new(features, Some(labels), k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_spread_points_sit_on_centers() {
        let d = synth_clusters(3, 4, 9, 0.0, 1).unwrap();
        for c in 0..3 {
            let first = d.row(c * 4).to_vec();
            for s in 1..4 {
                assert_eq!(d.row(c * 4 + s), first.as_slice());
            }
            assert_eq!(first.iter().filter(|&&v| v == 0.9).count(), 3);
        }
    }

    #[test]
    fn seeded_and_clipped() {
        let a = synth_clusters(3, 10, 12, 0.5, 9).unwrap();
        let b = synth_clusters(3, 10, 12, 0.5, 9).unwrap();
        let c = synth_clusters(3, 10, 12, 0.5, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.features.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn dataset_validation() {
        let f = Matrix::zeros(2, 3);
        assert!(LabeledDataset::new(f.clone(), Some(alloc::vec![0]), 2).is_err());
        assert!(LabeledDataset::new(f.clone(), Some(alloc::vec![0, 2]), 2).is_err());
        assert!(LabeledDataset::new(f.clone(), Some(alloc::vec![0, 1]), 2).is_ok());
        assert!(matches!(LabeledDataset::unlabeled(f).labels(), Err(Error::MissingLabels)));
        assert!(synth_clusters(0, 1, 1, 0.0, 0).is_err());
        assert!(synth_clusters(4, 1, 3, 0.0, 0).is_err());
    }
}
