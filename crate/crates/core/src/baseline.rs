//! Backprop baselines: a dense ReLU autoencoder and Euclidean k-means.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::data::LabeledDataset;
use crate::hebbian::kmeans::sq_dist;
use crate::hebbian::{ClusterModel, KMeansFit, Metric};
use crate::linalg::Matrix;
use crate::math;
use crate::rng;
use crate::{Error, Result};

/// Dense autoencoder with ReLU hidden layers and a linear output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Autoencoder {
    dims: Vec<usize>,
    /// Layer `l` maps `dims[l]` to `dims[l + 1]`; stored `in × out`.
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch: usize,
}

impl Default for AeConfig {
    fn default() -> Self {
        AeConfig { epochs: 20, lr: 0.05, batch: 64 }
    }
}

/// Gradients laid out like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Autoencoder {
    /// Xavier-uniform weights, zero biases. `dims` must read the same
    /// forwards and backwards, e.g. `[784, 128, 10, 128, 784]`.
    pub fn new(dims: &[usize], seed: u64) -> Result<Self> {
        if dims.len() < 3 || dims.len() % 2 == 0 || dims.contains(&0) {
            return Err(Error::InvalidArgument("autoencoder dims need an odd count ≥ 3 of positive sizes"));
        }
        if dims.iter().ne(dims.iter().rev()) {
            return Err(Error::InvalidArgument("autoencoder dims must be symmetric"));
        }
        let mut r = rng::stream(seed, rng::INIT);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in dims.windows(2) {
            let a = math::sqrt(6.0 / (w[0] + w[1]) as f64);
            let mut m = Matrix::zeros(w[0], w[1]);
            m.as_mut_slice().iter_mut().for_each(|v| *v = r.random_range(-a..a));
            weights.push(m);
            biases.push(vec![0.0; w[1]]);
        }
        Ok(Autoencoder { dims: dims.to_vec(), weights, biases })
    }

    pub fn from_parts(dims: Vec<usize>, weights: Vec<Matrix>, biases: Vec<Vec<f64>>) -> Result<Self> {
        let check = Autoencoder::new(&dims, 0)?;
        let shapes_ok = weights.len() == check.weights.len()
            && weights.iter().zip(&check.weights).all(|(a, b)| a.rows() == b.rows() && a.cols() == b.cols())
            && biases.iter().map(Vec::len).eq(check.biases.iter().map(Vec::len));
        if !shapes_ok {
            return Err(Error::InvalidArgument("autoencoder parameter shapes do not match dims"));
        }
        if weights.iter().any(|w| !w.is_finite()) || biases.iter().flatten().any(|b| !b.is_finite()) {
            return Err(Error::InvalidValue { what: "autoencoder parameter", value: f64::NAN });
        }
        Ok(Autoencoder { dims, weights, biases })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    /// Width of the middle layer.
    pub fn code_size(&self) -> usize {
        self.dims[self.dims.len() / 2]
    }

    fn layer(&self, l: usize, h: &Matrix) -> Result<Matrix> {
        let mut z = h.matmul(&self.weights[l])?;
        let relu = l + 1 < self.n_layers();
        for i in 0..z.rows() {
            for (v, b) in z.row_mut(i).iter_mut().zip(&self.biases[l]) {
                *v += b;
                if relu && *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        Ok(z)
    }

    /// Activations of every layer, input first.
    pub fn forward(&self, x: &Matrix) -> Result<Vec<Matrix>> {
        let mut acts = vec![x.clone()];
        for l in 0..self.n_layers() {
            let next = self.layer(l, &acts[l])?;
            acts.push(next);
        }
        Ok(acts)
    }

    pub fn reconstruct(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.forward(x)?.pop().unwrap_or_else(|| x.clone()))
    }

    /// Middle-layer (post-ReLU) activations.
    pub fn encode(&self, x: &Matrix) -> Result<Matrix> {
        let mut h = x.clone();
        for l in 0..self.n_layers() / 2 {
            h = self.layer(l, &h)?;
        }
        Ok(h)
    }

    /// Reconstruction MSE averaged over every element.
    pub fn loss(&self, x: &Matrix) -> Result<f64> {
        let out = self.reconstruct(x)?;
        Ok(mse(&out, x))
    }

    pub fn loss_and_grad(&self, x: &Matrix) -> Result<(f64, Gradients)> {
        let acts = self.forward(x)?;
        let out = &acts[self.n_layers()];
        let loss = mse(out, x);
        let scale = 2.0 / (x.rows() * x.cols()) as f64;
        let mut g = out.clone();
        g.as_mut_slice().iter_mut().zip(x.as_slice()).for_each(|(o, t)| *o = (*o - t) * scale);
        let mut gw = vec![Matrix::zeros(0, 0); self.n_layers()];
        let mut gb = vec![Vec::new(); self.n_layers()];
        for l in (0..self.n_layers()).rev() {
            gw[l] = acts[l].t_matmul(&g)?;
            let mut b = vec![0.0; g.cols()];
            for r in g.row_iter() {
                b.iter_mut().zip(r).for_each(|(a, v)| *a += v);
            }
            gb[l] = b;
            if l > 0 {
                let mut prev = g.matmul_t(&self.weights[l])?;
                prev.as_mut_slice().iter_mut().zip(acts[l].as_slice()).for_each(|(p, a)| {
                    if *a <= 0.0 {
                        *p = 0.0;
                    }
                });
                g = prev;
            }
        }
        Ok((loss, Gradients { weights: gw, biases: gb }))
    }

    fn apply(&mut self, grads: &Gradients, lr: f64) -> Result<()> {
        for (l, (w, g)) in self.weights.iter_mut().zip(&grads.weights).enumerate() {
            for (p, d) in w.as_mut_slice().iter_mut().zip(g.as_slice()) {
                *p -= lr * d;
                if !p.is_finite() || p.abs() > crate::hebbian::OVERFLOW_LIMIT {
                    return Err(Error::NumericOverflow { context: "autoencoder weight", index: l });
                }
            }
        }
        for (b, g) in self.biases.iter_mut().zip(&grads.biases) {
            b.iter_mut().zip(g).for_each(|(p, d)| *p -= lr * d);
        }
        Ok(())
    }
}

fn mse(a: &Matrix, b: &Matrix) -> f64 {
    let n = a.as_slice().len() as f64;
    a.as_slice().iter().zip(b.as_slice()).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() / n
}

/// Minibatch SGD on reconstruction MSE, reshuffling every epoch.
pub fn train_autoencoder(x: &Matrix, dims: &[usize], cfg: &AeConfig, seed: u64) -> Result<Autoencoder> {
    let mut ae = Autoencoder::new(dims, seed)?;
    if x.cols() != dims[0] {
        return Err(Error::DimensionMismatch { what: "autoencoder input width", expected: dims[0], found: x.cols() });
    }
    if !(cfg.lr >= 0.0) || cfg.batch == 0 {
        return Err(Error::InvalidArgument("autoencoder needs lr ≥ 0 and a positive batch size"));
    }
    if cfg.lr == 0.0 {
        return Ok(ae);
    }
    let mut shuffle = rng::stream(seed, rng::SHUFFLE);
    let mut order: Vec<usize> = (0..x.rows()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut shuffle);
        for chunk in order.chunks(cfg.batch) {
            let batch = x.select_rows(chunk);
            let (_, g) = ae.loss_and_grad(&batch)?;
            ae.apply(&g, cfg.lr)?;
        }
    }
    Ok(ae)
}

/// Lloyd's algorithm with k-means++ seeding.
pub fn euclidean_kmeans(data: &LabeledDataset, k: usize, iters: usize, seed: u64) -> Result<KMeansFit> {
    let x = &data.features;
    let n = x.rows();
    if k == 0 || n < k {
        return Err(Error::InvalidArgument("k-means needs 1 ≤ k ≤ rows"));
    }
    let dim = x.cols();
    let mut r = rng::stream(seed, rng::INIT);
    let mut centers = Matrix::zeros(k, dim);
    let mut chosen = vec![false; n];
    let first = r.random_range(0..n);
    centers.row_mut(0).copy_from_slice(x.row(first));
    chosen[first] = true;
    let mut d2: Vec<f64> = x.row_iter().map(|p| sq_dist(p, centers.row(0))).collect();
    for j in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = r.random::<f64>() * total;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 {
                    pick = Some(i);
                    if u < d {
                        break;
                    }
                    u -= d;
                }
            }
            pick.unwrap_or(0)
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[r.random_range(0..free.len())]
        };
        chosen[pick] = true;
        centers.row_mut(j).copy_from_slice(x.row(pick));
        for (d, p) in d2.iter_mut().zip(x.row_iter()) {
            *d = d.min(sq_dist(p, centers.row(j)));
        }
    }

    let mut assign = vec![usize::MAX; n];
    let mut dist = vec![0.0; n];
    let mut objective = Vec::new();
    let mut iterations = 0;
    for _ in 0..iters.max(1) {
        let mut changed = false;
        for (i, p) in x.row_iter().enumerate() {
            let neg: Vec<f64> = centers.row_iter().map(|c| -sq_dist(p, c)).collect();
            let j = math::argmax(&neg).unwrap_or(0);
            dist[i] = -neg[j];
            changed |= assign[i] != j;
            assign[i] = j;
        }
        objective.push(dist.iter().sum());
        iterations += 1;
        if !changed {
            break;
        }
        let mut sums = Matrix::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for (i, p) in x.row_iter().enumerate() {
            counts[assign[i]] += 1;
            sums.row_mut(assign[i]).iter_mut().zip(p).for_each(|(s, v)| *s += v);
        }
        let mut taken = vec![false; n];
        for j in 0..k {
            let c = sums.row_mut(j);
            if counts[j] == 0 {
                let far = (0..n).filter(|&i| !taken[i]).max_by(|&a, &b| dist[a].total_cmp(&dist[b])).unwrap_or(0);
                taken[far] = true;
                dist[far] = 0.0;
                c.copy_from_slice(x.row(far));
            } else {
                let m = counts[j] as f64;
                c.iter_mut().for_each(|v| *v /= m);
            }
        }
        centers = sums;
    }
    Ok(KMeansFit { model: ClusterModel::new(centers, Metric::Euclidean)?, assignments: assign, objective, iterations })
}
