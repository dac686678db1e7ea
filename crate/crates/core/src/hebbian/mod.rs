//! Forward-only learning on a MIMO oscillator network.
//!
//! Every output unit `j` reads the weighted average of the input under its
//! weight column, `y_j = Σ_i W_ij x_i / Σ_i W_ij` (the decoded settled phase
//! of output `j`). The unit with the largest response wins and its column is
//! pulled toward the input; the losing columns decay by the same residual
//! scaled by `λ`:
//!
//! ```text
//! winner:  W_j ← W_j + lr · y* · (x − y* · W_j)
//! loser:   W_j ← W_j − lr · λ · y* · (x − y* · W_j)
//! ```
//!
//! `lr` is a step-size knob on top of the bare rule, which is unstable on
//! high-dimensional inputs at unit rate.

mod head;
pub(crate) mod kmeans;

pub use head::{finetune_head, fit_linear_head, head_accuracy, HeadConfig, LinearHead};
pub use kmeans::{kmeans_assign, kmeans_fit, ClusterModel, KMeansFit, Metric};

use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::Rng as _;

use crate::data::LabeledDataset;
use crate::eval;
use crate::linalg::{dot4, Matrix};
use crate::math;
use crate::mimo::DEGENERACY_RATIO;
use crate::rng;
use crate::{Error, Result};

/// Responses this close (relative) to the best count as a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Any `|W_ij|` above this after an update is reported as divergence.
pub const OVERFLOW_LIMIT: f64 = 1e12;

/// Linear decay from `start` to `end` over a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule {
    pub start: f64,
    pub end: f64,
}

impl LrSchedule {
    pub const fn constant(lr: f64) -> Self {
        LrSchedule { start: lr, end: lr }
    }

    /// Rate for step `step` of `total`.
    pub fn at(&self, step: usize, total: usize) -> f64 {
        if total <= 1 {
            return self.start;
        }
        let f = step as f64 / (total - 1) as f64;
        self.start + (self.end - self.start) * f.min(1.0)
    }
}

impl Default for LrSchedule {
    fn default() -> Self {
        LrSchedule { start: 0.01, end: 1e-4 }
    }
}

/// Which response the loser update uses inside its residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoserResidual {
    /// `x − y*·W_j` with the winner's response, as the rule is written.
    #[default]
    WinnerResponse,
    /// `x − y_j·W_j` with the loser's own response.
    OwnResponse,
}

/// What happens to a column after it is updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnNorm {
    /// Clip negative weights to 0 and rescale the column to unit sum.
    /// Responses are scale-invariant, so this only fixes the step size
    /// relative to the column.
    #[default]
    Simplex,
    /// Leave the column as updated.
    None,
}

/// How `W` is initialized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// Each column is a distinct random training sample plus `floor · U(0,1)`,
    /// rescaled to unit sum.
    Samples { floor: f64 },
    /// Each column is drawn from `U(0,1)` and rescaled to unit sum.
    Uniform,
}

impl Default for Init {
    fn default() -> Self {
        Init::Samples { floor: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HebbianConfig {
    pub lr: LrSchedule,
    pub lambda: f64,
    pub loser_residual: LoserResidual,
    pub column_norm: ColumnNorm,
    pub init: Init,
}

impl Default for HebbianConfig {
    fn default() -> Self {
        HebbianConfig {
            lr: LrSchedule::default(),
            lambda: 0.01,
            loser_residual: LoserResidual::default(),
            column_norm: ColumnNorm::default(),
            init: Init::default(),
        }
    }
}

/// Hebbian weights plus the settings the update rule needs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    /// Unit-major: row `j` holds column `j` of the `N × M` matrix `W`.
    units: Matrix,
    pub lambda: f64,
    pub epoch: usize,
    pub rng_seed: u64,
    pub loser_residual: LoserResidual,
    pub column_norm: ColumnNorm,
}

impl TrainState {
    /// Wraps an `N × M` weight matrix.
    pub fn from_weights(weights: &Matrix, lambda: f64, rng_seed: u64) -> Result<Self> {
        Self::from_units(weights.transpose(), lambda, rng_seed)
    }

    /// Wraps an `M × N` unit-major matrix.
    pub fn from_units(units: Matrix, lambda: f64, rng_seed: u64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidValue { what: "lambda", value: lambda });
        }
        if !units.is_finite() {
            return Err(Error::InvalidValue { what: "weight", value: f64::NAN });
        }
        if let Some(j) = (0..units.rows()).find(|&j| units.row(j).iter().all(|&v| v == 0.0)) {
            return Err(Error::ZeroVector { index: Some(j) });
        }
        Ok(TrainState {
            units,
            lambda,
            epoch: 0,
            rng_seed,
            loser_residual: LoserResidual::default(),
            column_norm: ColumnNorm::default(),
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.units.cols()
    }

    pub fn n_units(&self) -> usize {
        self.units.rows()
    }

    /// `W` as `N × M`.
    pub fn weights(&self) -> Matrix {
        self.units.transpose()
    }

    /// `W` unit-major (`M × N`).
    pub fn units(&self) -> &Matrix {
        &self.units
    }

    pub fn unit(&self, j: usize) -> &[f64] {
        self.units.row(j)
    }

    fn column_sums(&self) -> Vec<(f64, f64)> {
        self.units.row_iter().map(|r| (r.iter().sum::<f64>(), r.iter().map(|v| v.abs()).sum::<f64>())).collect()
    }
}

fn check_sum(j: usize, sum: f64, abs_sum: f64) -> Result<()> {
    if !(sum.abs() >= DEGENERACY_RATIO * abs_sum) || abs_sum == 0.0 {
        return Err(Error::DegenerateNormalization { column: Some(j), sum, abs_sum });
    }
    Ok(())
}

/// Decoded output of every unit for input `x`, and the winning unit.
///
/// Each response is the settled readout `Σ W_ij x_i / Σ W_ij`, evaluated
/// algebraically; [`crate::mimo::forward_single`] gives the same number via
/// the oscillator encoding.
pub fn hebbian_response(state: &TrainState, x: &[f64]) -> Result<(Vec<f64>, usize)> {
    if x.len() != state.n_inputs() {
        return Err(Error::DimensionMismatch { what: "feature vector", expected: state.n_inputs(), found: x.len() });
    }
    let mut responses = Vec::with_capacity(state.n_units());
    for (j, w) in state.units.row_iter().enumerate() {
        let sum: f64 = w.iter().sum();
        let abs_sum: f64 = w.iter().map(|v| v.abs()).sum();
        check_sum(j, sum, abs_sum)?;
        responses.push(dot4(w, x) / sum);
    }
    let winner = math::argmax_tol(&responses, TIE_TOLERANCE).unwrap_or(0);
    Ok((responses, winner))
}

/// Responses of every unit for every row of `data` (`rows × M`).
pub fn responses(state: &TrainState, features: &Matrix) -> Result<Matrix> {
    if features.cols() != state.n_inputs() {
        return Err(Error::DimensionMismatch {
            what: "feature vector",
            expected: state.n_inputs(),
            found: features.cols(),
        });
    }
    let sums = state.column_sums();
    for (j, &(s, a)) in sums.iter().enumerate() {
        check_sum(j, s, a)?;
    }
    let mut out = Matrix::zeros(features.rows(), state.n_units());
    for (r, x) in features.row_iter().enumerate() {
        let o = out.row_mut(r);
        for (j, w) in state.units.row_iter().enumerate() {
            o[j] = dot4(w, x) / sums[j].0;
        }
    }
    Ok(out)
}

/// Winning unit per row.
pub fn winners(state: &TrainState, features: &Matrix) -> Result<Vec<usize>> {
    Ok(winners_of(&responses(state, features)?))
}

/// Winning unit per row of a response matrix.
pub fn winners_of(responses: &Matrix) -> Vec<usize> {
    responses.row_iter().map(|row| math::argmax_tol(row, TIE_TOLERANCE).unwrap_or(0)).collect()
}

fn normalize_column(w: &mut [f64], norm: ColumnNorm) {
    if norm == ColumnNorm::None {
        return;
    }
    let mut sum = 0.0;
    for v in w.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
        sum += *v;
    }
    if sum > 0.0 {
        w.iter_mut().for_each(|v| *v /= sum);
    } else {
        let u = 1.0 / w.len() as f64;
        w.iter_mut().for_each(|v| *v = u);
    }
}

/// `w ← w + rate · (x − y · w)`.
#[inline]
fn pull(w: &mut [f64], x: &[f64], rate: f64, y: f64) {
    for (wi, &xi) in w.iter_mut().zip(x) {
        *wi += rate * (xi - y * *wi);
    }
}

fn check_column(w: &[f64], j: usize) -> Result<()> {
    if w.iter().any(|v| !v.is_finite() || v.abs() > OVERFLOW_LIMIT) {
        return Err(Error::NumericOverflow { context: "hebbian update", index: j });
    }
    Ok(())
}

/// One winner-takes-all update with learning rate `lr`. Returns the winner.
///
/// With `λ = 0` the losing columns are not touched at all.
pub fn hebbian_step(state: &mut TrainState, x: &[f64], lr: f64) -> Result<usize> {
    if !(lr > 0.0) || !lr.is_finite() {
        return Err(Error::InvalidValue { what: "learning rate", value: lr });
    }
    let (resp, winner) = hebbian_response(state, x)?;
    update_units(state, x, lr, &resp, winner, None)?;
    Ok(winner)
}

/// Applies the winner/loser update given precomputed responses. When
/// `candidates` is set, only those units take part (the winner must be one
/// of them).
pub(crate) fn update_units(
    state: &mut TrainState,
    x: &[f64],
    lr: f64,
    resp: &[f64],
    winner: usize,
    candidates: Option<&[usize]>,
) -> Result<()> {
    let y = resp[winner];
    let norm = state.column_norm;
    {
        let w = state.units.row_mut(winner);
        pull(w, x, lr * y, y);
        normalize_column(w, norm);
        check_column(w, winner)?;
    }
    if state.lambda > 0.0 {
        let lambda = state.lambda;
        let rule = state.loser_residual;
        let touch = |j: usize, state: &mut TrainState| -> Result<()> {
            let yj = match rule {
                LoserResidual::WinnerResponse => y,
                LoserResidual::OwnResponse => resp[j],
            };
            let w = state.units.row_mut(j);
            pull(w, x, -lr * lambda * y, yj);
            normalize_column(w, norm);
            check_column(w, j)
        };
        match candidates {
            Some(c) => {
                for &j in c.iter().filter(|&&j| j != winner) {
                    touch(j, state)?;
                }
            }
            None => {
                for j in (0..state.n_units()).filter(|&j| j != winner) {
                    touch(j, state)?;
                }
            }
        }
    }
    Ok(())
}

/// Fresh weights for `m` units over `data`'s features.
pub fn init_state(data: &LabeledDataset, m: usize, cfg: &HebbianConfig, seed: u64) -> Result<TrainState> {
    let n = data.n_features();
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("need at least one unit and one feature"));
    }
    let mut r = rng::stream(seed, rng::INIT);
    let mut units = Matrix::zeros(m, n);
    match cfg.init {
        Init::Uniform => {
            for j in 0..m {
                let w = units.row_mut(j);
                w.iter_mut().for_each(|v| *v = r.random_range(f64::MIN_POSITIVE..1.0));
            }
        }
        Init::Samples { floor } => {
            if data.len() < m {
                return Err(Error::InvalidArgument("sample initialization needs at least m rows"));
            }
            let picks = index::sample(&mut r, data.len(), m);
            for (j, row) in picks.iter().enumerate() {
                let x = data.row(row);
                let w = units.row_mut(j);
                for (wi, &xi) in w.iter_mut().zip(x) {
                    *wi = xi + floor * r.random::<f64>();
                }
            }
        }
    }
    for j in 0..m {
        normalize_column(units.row_mut(j), ColumnNorm::Simplex);
    }
    let mut state = TrainState::from_units(units, cfg.lambda, seed)?;
    state.loser_residual = cfg.loser_residual;
    state.column_norm = cfg.column_norm;
    Ok(state)
}

/// Unsupervised WTA pretraining: `epochs` passes over a seeded shuffle of
/// the rows, one [`hebbian_step`] per sample.
pub fn pretrain(
    data: &LabeledDataset,
    m_hidden: usize,
    epochs: usize,
    cfg: &HebbianConfig,
    seed: u64,
) -> Result<TrainState> {
    if epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be at least 1"));
    }
    let mut state = init_state(data, m_hidden, cfg, seed)?;
    continue_training(&mut state, data, epochs, cfg.lr)?;
    Ok(state)
}

/// Runs `epochs` more passes over `data` on an existing state.
pub fn continue_training(state: &mut TrainState, data: &LabeledDataset, epochs: usize, lr: LrSchedule) -> Result<()> {
    let n = data.len();
    let total = epochs * n;
    let mut shuffle = rng::stream(state.rng_seed, rng::SHUFFLE);
    let mut order: Vec<usize> = (0..n).collect();
    let mut step = 0;
    for _ in 0..epochs {
        order.shuffle(&mut shuffle);
        for &i in &order {
            let rate = lr.at(step, total);
            hebbian_step(state, data.row(i), rate).map_err(|e| e.at_sample(i))?;
            step += 1;
        }
        state.epoch += 1;
    }
    Ok(())
}

/// Maps every unit to the majority training label among the samples it
/// wins (class 0 for units that win nothing).
pub fn assign_labels_by_majority(state: &TrainState, data: &LabeledDataset) -> Result<Vec<usize>> {
    let labels = data.labels()?;
    let w = winners(state, &data.features)?;
    Ok(eval::majority_label_map(&w, labels, state.n_units(), data.n_classes))
}

/// Unsupervised accuracy: winner → majority label, fitted on `train`.
pub fn unsupervised_accuracy(state: &TrainState, train: &LabeledDataset, test: &LabeledDataset) -> Result<f64> {
    let map = assign_labels_by_majority(state, train)?;
    let pred: Vec<usize> = winners(state, &test.features)?.into_iter().map(|w| map[w]).collect();
    Ok(eval::accuracy(&pred, test.labels()?))
}

/// Same weights seen as a plain `vec` of columns; used by tests and IO.
pub fn columns(state: &TrainState) -> Vec<Vec<f64>> {
    state.units.row_iter().map(|r| r.to_vec()).collect()
}
