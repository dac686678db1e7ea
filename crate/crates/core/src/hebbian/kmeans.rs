//! Clustering with the oscillator readout `y_j = w_j · x`.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;

use crate::data::LabeledDataset;
use crate::linalg::{dot4, Matrix};
use crate::math;
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Cosine,
    Euclidean,
}

/// Cluster centers, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    centers: Matrix,
    pub metric: Metric,
}

impl ClusterModel {
    pub fn new(centers: Matrix, metric: Metric) -> Result<Self> {
        if centers.rows() == 0 || centers.cols() == 0 {
            return Err(Error::InvalidArgument("cluster model needs at least one center"));
        }
        if !centers.is_finite() {
            return Err(Error::InvalidValue { what: "center", value: f64::NAN });
        }
        if metric == Metric::Cosine {
            if let Some(j) = (0..centers.rows()).find(|&j| centers.row(j).iter().all(|&v| v == 0.0)) {
                return Err(Error::ZeroVector { index: Some(j) });
            }
        }
        Ok(ClusterModel { centers, metric })
    }

    pub fn k(&self) -> usize {
        self.centers.rows()
    }

    pub fn dim(&self) -> usize {
        self.centers.cols()
    }

    pub fn centers(&self) -> &Matrix {
        &self.centers
    }

    pub fn center(&self, j: usize) -> &[f64] {
        self.centers.row(j)
    }

    /// Index of the closest center.
    pub fn assign(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { what: "feature vector", expected: self.dim(), found: x.len() });
        }
        match self.metric {
            Metric::Cosine => {
                let nx = math::norm(x);
                if nx == 0.0 {
                    return Err(Error::ZeroVector { index: None });
                }
                let sims: Vec<f64> = self.centers.row_iter().map(|c| dot4(c, x) / (math::norm(c) * nx)).collect();
                Ok(math::argmax(&sims).unwrap_or(0))
            }
            Metric::Euclidean => {
                let neg: Vec<f64> = self.centers.row_iter().map(|c| -sq_dist(c, x)).collect();
                Ok(math::argmax(&neg).unwrap_or(0))
            }
        }
    }

    pub fn assign_all(&self, features: &Matrix) -> Result<Vec<usize>> {
        features.row_iter().enumerate().map(|(i, x)| self.assign(x).map_err(|e| e.at_sample(i))).collect()
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Cosine assignment of `x` to `model`'s centers.
pub fn kmeans_assign(model: &ClusterModel, x: &[f64]) -> Result<usize> {
    model.assign(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub model: ClusterModel,
    pub assignments: Vec<usize>,
    /// Objective after each assignment pass: mean cosine similarity for
    /// [`Metric::Cosine`], inertia for [`Metric::Euclidean`].
    pub objective: Vec<f64>,
    pub iterations: usize,
}

fn unit(v: &mut [f64]) {
    let n = math::norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Spherical k-means: centers are the renormalized sums of their members'
/// unit vectors.
pub fn kmeans_fit(data: &LabeledDataset, k: usize, iters: usize, seed: u64) -> Result<KMeansFit> {
    let n = data.len();
    if k == 0 || n < k {
        return Err(Error::InvalidArgument("k-means needs 1 ≤ k ≤ rows"));
    }
    let dim = data.n_features();
    let mut xs = data.features.clone();
    for i in 0..n {
        let r = xs.row_mut(i);
        if r.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroVector { index: Some(i) });
        }
        unit(r);
    }

    let mut r = rng::stream(seed, rng::INIT);
    let mut centers = Matrix::zeros(k, dim);
    for (j, i) in index::sample(&mut r, n, k).iter().enumerate() {
        centers.row_mut(j).copy_from_slice(xs.row(i));
    }

    let mut assign = vec![usize::MAX; n];
    let mut sim = vec![0.0; n];
    let mut objective = Vec::new();
    let mut iterations = 0;
    for _ in 0..iters.max(1) {
        let mut changed = false;
        for (i, x) in xs.row_iter().enumerate() {
            let s: Vec<f64> = centers.row_iter().map(|c| dot4(c, x)).collect();
            let j = math::argmax(&s).unwrap_or(0);
            sim[i] = s[j];
            changed |= assign[i] != j;
            assign[i] = j;
        }
        objective.push(sim.iter().sum::<f64>() / n as f64);
        iterations += 1;
        if !changed {
            break;
        }

        let mut sums = Matrix::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for (i, x) in xs.row_iter().enumerate() {
            counts[assign[i]] += 1;
            sums.row_mut(assign[i]).iter_mut().zip(x).for_each(|(s, v)| *s += v);
        }
        let mut taken = vec![false; n];
        for j in 0..k {
            if counts[j] == 0 {
                let far = (0..n).filter(|&i| !taken[i]).min_by(|&a, &b| sim[a].total_cmp(&sim[b])).unwrap_or(0);
                taken[far] = true;
                sim[far] = 1.0;
                sums.row_mut(j).copy_from_slice(xs.row(far));
            }
            let c = sums.row_mut(j);
            unit(c);
            if c.iter().all(|&v| v == 0.0) {
                // members cancel exactly; keep the previous direction
                c.copy_from_slice(centers.row(j));
            }
        }
        centers = sums;
    }
    Ok(KMeansFit { model: ClusterModel::new(centers, Metric::Cosine)?, assignments: assign, objective, iterations })
}
