//! Supervised softmax head on top of hidden responses.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::LabeledDataset;
use crate::eval;
use crate::linalg::Matrix;
use crate::math;
use crate::{Error, Result};

use super::{responses, TrainState};

/// Full-batch gradient descent with heavy-ball momentum on standardized
/// features. `l2` is applied as a proximal shrink to weights and bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadConfig {
    pub iters: usize,
    pub lr: f64,
    pub momentum: f64,
    pub l2: f64,
}

impl Default for HeadConfig {
    fn default() -> Self {
        HeadConfig { iters: 1000, lr: 1.0, momentum: 0.9, l2: 1e-4 }
    }
}

/// `scores = h · weights + bias`, prediction by argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearHead {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl LinearHead {
    pub fn new(weights: Matrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weights.cols() {
            return Err(Error::DimensionMismatch { what: "head bias", expected: weights.cols(), found: bias.len() });
        }
        if !weights.is_finite() || bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidValue { what: "head parameter", value: f64::NAN });
        }
        Ok(LinearHead { weights, bias })
    }

    pub fn n_inputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn n_classes(&self) -> usize {
        self.weights.cols()
    }

    pub fn scores(&self, h: &[f64]) -> Result<Vec<f64>> {
        if h.len() != self.n_inputs() {
            return Err(Error::DimensionMismatch { what: "hidden vector", expected: self.n_inputs(), found: h.len() });
        }
        let mut s = self.bias.clone();
        for (hi, w) in h.iter().zip(self.weights.row_iter()) {
            s.iter_mut().zip(w).for_each(|(s, w)| *s += hi * w);
        }
        Ok(s)
    }

    pub fn predict(&self, h: &[f64]) -> Result<usize> {
        Ok(math::argmax(&self.scores(h)?).unwrap_or(0))
    }

    pub fn predict_all(&self, hidden: &Matrix) -> Result<Vec<usize>> {
        hidden.row_iter().map(|h| self.predict(h)).collect()
    }
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = math::exp(*v - max);
        sum += *v;
    }
    row.iter_mut().for_each(|v| *v /= sum);
}

/// Multinomial logistic regression from zero init.
pub fn fit_linear_head(features: &Matrix, labels: &[usize], n_classes: usize, cfg: &HeadConfig) -> Result<LinearHead> {
    let (n, m) = (features.rows(), features.cols());
    if labels.len() != n {
        return Err(Error::DimensionMismatch { what: "labels", expected: n, found: labels.len() });
    }
    if n == 0 || m == 0 || n_classes == 0 {
        return Err(Error::InvalidArgument("head needs samples, features and classes"));
    }
    if labels.iter().any(|&l| l >= n_classes) {
        return Err(Error::InvalidArgument("label out of range"));
    }
    if !(cfg.l2 >= 0.0) {
        return Err(Error::InvalidValue { what: "l2", value: cfg.l2 });
    }
    if !(cfg.lr > 0.0) || !cfg.lr.is_finite() {
        return Err(Error::InvalidValue { what: "learning rate", value: cfg.lr });
    }
    if !features.is_finite() {
        return Err(Error::InvalidValue { what: "hidden feature", value: f64::NAN });
    }

    let mut mean = vec![0.0; m];
    for r in features.row_iter() {
        mean.iter_mut().zip(r).for_each(|(a, v)| *a += v);
    }
    mean.iter_mut().for_each(|a| *a /= n as f64);
    let mut scale = vec![0.0; m];
    for r in features.row_iter() {
        for ((s, v), mu) in scale.iter_mut().zip(r).zip(&mean) {
            *s += (v - mu) * (v - mu);
        }
    }
    for s in scale.iter_mut() {
        *s = math::sqrt(*s / n as f64);
        if !(*s > 1e-12) {
            *s = 1.0;
        }
    }
    let mut z = features.clone();
    for i in 0..n {
        for ((v, mu), s) in z.row_mut(i).iter_mut().zip(&mean).zip(&scale) {
            *v = (*v - mu) / s;
        }
    }

    let shrink = 1.0 / (1.0 + cfg.lr * cfg.l2);
    let mut w = Matrix::zeros(m, n_classes);
    let mut b = vec![0.0; n_classes];
    let mut vw = Matrix::zeros(m, n_classes);
    let mut vb = vec![0.0; n_classes];
    for _ in 0..cfg.iters {
        let mut g = z.matmul(&w)?;
        for i in 0..n {
            let row = g.row_mut(i);
            row.iter_mut().zip(&b).for_each(|(v, b)| *v += b);
            softmax_in_place(row);
            row[labels[i]] -= 1.0;
            row.iter_mut().for_each(|v| *v /= n as f64);
        }
        let gw = z.t_matmul(&g)?;
        let mut gb = vec![0.0; n_classes];
        for r in g.row_iter() {
            gb.iter_mut().zip(r).for_each(|(a, v)| *a += v);
        }
        for ((p, v), gr) in w.as_mut_slice().iter_mut().zip(vw.as_mut_slice()).zip(gw.as_slice()) {
            *v = cfg.momentum * *v - cfg.lr * gr;
            *p = (*p + *v) * shrink;
        }
        for ((p, v), gr) in b.iter_mut().zip(vb.iter_mut()).zip(&gb) {
            *v = cfg.momentum * *v - cfg.lr * gr;
            *p = (*p + *v) * shrink;
        }
    }

    let mut bias = b;
    for f in 0..m {
        let wr = w.row_mut(f);
        for (c, v) in wr.iter_mut().enumerate() {
            *v /= scale[f];
            bias[c] -= *v * mean[f];
        }
    }
    LinearHead::new(w, bias)
}

/// Trains a head on the Hebbian responses of `data`.
pub fn finetune_head(state: &TrainState, data: &LabeledDataset, cfg: &HeadConfig) -> Result<LinearHead> {
    let labels = data.labels()?;
    let h = responses(state, &data.features)?;
    fit_linear_head(&h, labels, data.n_classes, cfg)
}

/// Accuracy of `head` over `data` through `state`'s responses.
pub fn head_accuracy(state: &TrainState, head: &LinearHead, data: &LabeledDataset) -> Result<f64> {
    let h = responses(state, &data.features)?;
    Ok(eval::accuracy(&head.predict_all(&h)?, data.labels()?))
}
