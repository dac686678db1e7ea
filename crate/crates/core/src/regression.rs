//! Linear regression through the Potts readout.
//!
//! Fitting `y ≈ k·x` in least squares gives `k = Σ x_i y_i / Σ x_i²`. The
//! same number is the decoded phase of one oscillator coupled to inputs at
//! `θ_i = arctan(y_i / x_i)` with strengths `J_i = |x_i| · √(x_i² + y_i²)`,
//! because then `J_i cos θ_i = x_i²` and `J_i sin θ_i = x_i y_i`.
//! Several features are fitted one coordinate at a time, each step being a
//! single-variable solve against the current partial residual.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::linalg::{dot4, Matrix};
use crate::math;
use crate::mimo::potts_output;
use crate::phase::{Coupling, EncodedInput, Phase};
use crate::rng;
use crate::{Error, Result};

/// Samples in rows, features in columns. With `fit_intercept` a constant
/// feature is prepended, so `θ_0` is the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionProblem {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub fit_intercept: bool,
}

impl RegressionProblem {
    pub fn new(x: Matrix, y: Vec<f64>, fit_intercept: bool) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::InvalidArgument("regression needs at least one sample"));
        }
        if y.len() != x.rows() {
            return Err(Error::DimensionMismatch { what: "target count", expected: x.rows(), found: y.len() });
        }
        if !x.is_finite() {
            return Err(Error::InvalidValue { what: "feature", value: f64::NAN });
        }
        if let Some(&v) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidValue { what: "target", value: v });
        }
        Ok(RegressionProblem { x, y, fit_intercept })
    }

    pub fn n_samples(&self) -> usize {
        self.x.rows()
    }

    /// Number of coefficients, intercept included.
    pub fn n_params(&self) -> usize {
        self.x.cols() + usize::from(self.fit_intercept)
    }

    /// Design columns in coefficient order.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        let mut cols = Vec::with_capacity(self.n_params());
        if self.fit_intercept {
            cols.push(vec![1.0; self.n_samples()]);
        }
        cols.extend((0..self.x.cols()).map(|c| self.x.column(c)));
        cols
    }

    /// Mean squared error of `theta`.
    pub fn loss(&self, theta: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for (row, y) in self.x.row_iter().zip(&self.y) {
            let r = y - predict(theta, row)?;
            s += r * r;
        }
        Ok(s / self.n_samples() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Order {
    #[default]
    Cyclic,
    /// A fresh seeded permutation of the coordinates every sweep.
    RandomPermutation(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateDescentConfig {
    pub max_sweeps: usize,
    /// Stop once a sweep moves no coefficient by this much or more.
    pub tol: f64,
    pub order: Order,
}

impl Default for CoordinateDescentConfig {
    fn default() -> Self {
        CoordinateDescentConfig { max_sweeps: 10_000, tol: 1e-10, order: Order::Cyclic }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateFit {
    pub theta: Vec<f64>,
    pub sweeps: usize,
    /// MSE before any update, then after every coordinate update.
    pub loss_history: Vec<f64>,
}

/// Least-squares slope through the origin.
pub fn solve_single(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { what: "target count", expected: x.len(), found: y.len() });
    }
    let xx = dot4(x, x);
    if !(xx > 0.0) {
        return Err(Error::DegenerateFeature { column: 0 });
    }
    Ok(dot4(x, y) / xx)
}

/// Oscillator inputs whose settled readout is the least-squares slope.
/// Samples with `x_i = 0` get `θ_i = 0`, `J_i = 0`.
pub fn potts_encoding(x: &[f64], y: &[f64]) -> Result<EncodedInput> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { what: "target count", expected: x.len(), found: y.len() });
    }
    let mut phases = Vec::with_capacity(x.len());
    let mut couplings = Vec::with_capacity(x.len());
    for (&xi, &yi) in x.iter().zip(y) {
        if xi == 0.0 {
            phases.push(Phase(0.0));
            couplings.push(Coupling(0.0));
        } else {
            phases.push(Phase(math::atan(yi / xi)));
            couplings.push(Coupling(xi.abs() * math::hypot(xi, yi)));
        }
    }
    Ok(EncodedInput { phases, couplings })
}

/// [`solve_single`] evaluated through the oscillator readout.
pub fn solve_single_potts(x: &[f64], y: &[f64]) -> Result<f64> {
    if !(dot4(x, x) > 0.0) {
        return Err(Error::DegenerateFeature { column: 0 });
    }
    let enc = potts_encoding(x, y)?;
    Ok(potts_output(&enc.phases, &enc.couplings)?.value)
}

/// `θ_0 + Σ θ_k x_k` when `theta` has one more entry than `x`, else `θ · x`.
pub fn predict(theta: &[f64], x: &[f64]) -> Result<f64> {
    if theta.len() == x.len() + 1 {
        Ok(theta[0] + dot4(&theta[1..], x))
    } else if theta.len() == x.len() {
        Ok(dot4(theta, x))
    } else {
        Err(Error::DimensionMismatch { what: "coefficient count", expected: x.len() + 1, found: theta.len() })
    }
}

/// Cyclic or shuffled coordinate descent from `θ = 0`.
///
/// Each update sets `θ_j = solve_single(x_j, h)` with `h` the residual of
/// every other coordinate, so the MSE never increases.
pub fn coordinate_descent(p: &RegressionProblem, cfg: &CoordinateDescentConfig) -> Result<CoordinateFit> {
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidValue { what: "tolerance", value: cfg.tol });
    }
    let cols = p.columns();
    let m = cols.len();
    let n = p.n_samples() as f64;
    let mut theta = vec![0.0; m];
    let mut resid = p.y.clone();
    let mut h = vec![0.0; resid.len()];
    let mut loss_history = vec![dot4(&resid, &resid) / n];
    let mut order: Vec<usize> = (0..m).collect();
    let mut shuffle = match cfg.order {
        Order::RandomPermutation(seed) => Some(rng::stream(seed, rng::SHUFFLE)),
        Order::Cyclic => None,
    };
    let mut max_change = f64::INFINITY;
    for sweep in 1..=cfg.max_sweeps {
        if let Some(r) = shuffle.as_mut() {
            order.shuffle(r);
        }
        max_change = 0.0f64;
        for &j in &order {
            let col = &cols[j];
            for ((hi, ri), xi) in h.iter_mut().zip(&resid).zip(col) {
                *hi = ri + theta[j] * xi;
            }
            let t = solve_single(col, &h).map_err(|_| Error::DegenerateFeature { column: j })?;
            for ((ri, hi), xi) in resid.iter_mut().zip(&h).zip(col) {
                *ri = hi - t * xi;
            }
            max_change = max_change.max((t - theta[j]).abs());
            theta[j] = t;
            loss_history.push(dot4(&resid, &resid) / n);
        }
        if max_change < cfg.tol {
            return Ok(CoordinateFit { theta, sweeps: sweep, loss_history });
        }
    }
    Err(Error::NotConverged { sweeps: cfg.max_sweeps, max_change, theta })
}

/// Each feature followed by its powers up to `degree` (no cross terms).
pub fn polynomial_features(x: &Matrix, degree: usize) -> Result<Matrix> {
    if degree == 0 {
        return Err(Error::InvalidArgument("polynomial degree must be at least 1"));
    }
    let mut out = Matrix::zeros(x.rows(), x.cols() * degree);
    for (r, row) in x.row_iter().enumerate() {
        let o = out.row_mut(r);
        for (c, &v) in row.iter().enumerate() {
            let mut p = 1.0;
            for d in 0..degree {
                p *= v;
                o[c * degree + d] = p;
            }
        }
    }
    Ok(out)
}
