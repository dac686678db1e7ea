//! Time-domain phase dynamics of coupled oscillators.
//!
//! Each free oscillator follows Kuramoto's equation
//!
//! ```text
//! dθ_i/dt = Σ_j K_ij sin(θ_i − θ_j) + K_p sin(N θ_i)
//! ```
//!
//! and the network descends the Lyapunov energy
//!
//! ```text
//! E = (N/2) Σ_(i,j) K_ij cos(θ_i − θ_j) + Σ_i K_p cos(N θ_i).
//! ```
//!
//! With an infinite pump order the pump terms vanish and the `N/2`
//! prefactor is replaced by 1; that only rescales time and energy. Pinned
//! oscillators are constants: their derivative is zero and their phase is
//! never rewritten, so it stays bit-identical through a run.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::math::{self, PI};
use crate::mimo::MimoNetwork;
use crate::phase::{self, normalize_radians, Coupling};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PumpOrder {
    Finite(u32),
    /// Continuous phases; the pump term is dropped.
    #[default]
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub coupling: Coupling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    n: usize,
    edges: Vec<Edge>,
    pairs: BTreeSet<(usize, usize)>,
    pinned: Vec<bool>,
    pump_strength: f64,
    pump_order: PumpOrder,
}

impl NetworkGraph {
    pub fn new(n_oscillators: usize) -> Self {
        NetworkGraph {
            n: n_oscillators,
            edges: Vec::new(),
            pairs: BTreeSet::new(),
            pinned: vec![false; n_oscillators],
            pump_strength: 0.0,
            pump_order: PumpOrder::Infinite,
        }
    }

    pub fn add_edge(&mut self, i: usize, j: usize, coupling: f64) -> Result<&mut Self> {
        if i == j {
            return Err(Error::InvalidArgument("self-edges are not allowed"));
        }
        if i >= self.n || j >= self.n {
            return Err(Error::DimensionMismatch { what: "edge endpoint", expected: self.n, found: i.max(j) });
        }
        if !coupling.is_finite() {
            return Err(Error::InvalidValue { what: "coupling", value: coupling });
        }
        if !self.pairs.insert((i.min(j), i.max(j))) {
            return Err(Error::InvalidArgument("duplicate edge"));
        }
        self.edges.push(Edge { i, j, coupling: Coupling(coupling) });
        Ok(self)
    }

    pub fn pin(&mut self, i: usize) -> Result<&mut Self> {
        if i >= self.n {
            return Err(Error::DimensionMismatch { what: "pinned index", expected: self.n, found: i });
        }
        self.pinned[i] = true;
        Ok(self)
    }

    pub fn with_pump(mut self, strength: f64, order: PumpOrder) -> Self {
        self.pump_strength = strength;
        self.pump_order = order;
        self
    }

    pub fn n_oscillators(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_pinned(&self, i: usize) -> bool {
        self.pinned[i]
    }

    pub fn pump(&self) -> (f64, PumpOrder) {
        (self.pump_strength, self.pump_order)
    }

    /// Upper bound on the Lipschitz constant of the phase flow.
    pub fn max_rate(&self) -> f64 {
        let mut row = vec![0.0; self.n];
        for e in &self.edges {
            row[e.i] += e.coupling.0.abs();
            row[e.j] += e.coupling.0.abs();
        }
        let pump = match self.pump_order {
            PumpOrder::Finite(n) => self.pump_strength.abs() * f64::from(n),
            PumpOrder::Infinite => 0.0,
        };
        row.iter().enumerate().filter(|(i, _)| !self.pinned[*i]).map(|(_, r)| r + pump).fold(0.0, f64::max)
    }

    /// The default step (0.01) capped so that `rate · dt ≤ 1`, well inside
    /// the RK4 stability region.
    pub fn suggested_dt(&self) -> f64 {
        let rate = self.max_rate();
        if rate > 100.0 {
            1.0 / rate
        } else {
            DEFAULT_DT
        }
    }

    fn check_state(&self, s: &PhaseVector) -> Result<()> {
        if s.0.len() != self.n {
            return Err(Error::DimensionMismatch { what: "phase vector length", expected: self.n, found: s.0.len() });
        }
        Ok(())
    }
}

/// Phases in radians, one per oscillator.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhaseVector(pub Vec<f64>);

impl PhaseVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Keeps pinned phases from `base` and draws every free phase uniformly
    /// from `[-π, π)`.
    pub fn randomize_free(g: &NetworkGraph, base: &PhaseVector, seed: u64) -> Result<PhaseVector> {
        g.check_state(base)?;
        let mut r = rng::stream(seed, rng::INIT);
        let mut out = base.clone();
        for (i, p) in out.0.iter_mut().enumerate() {
            if !g.pinned[i] {
                *p = r.random_range(-PI..PI);
            }
        }
        Ok(out)
    }
}

/// `dθ/dt` for every oscillator; exactly zero for pinned ones.
pub fn phase_derivative(g: &NetworkGraph, s: &PhaseVector) -> Result<Vec<f64>> {
    g.check_state(s)?;
    let mut d = vec![0.0; g.n];
    derivative_into(g, &s.0, &mut d);
    Ok(d)
}

fn derivative_into(g: &NetworkGraph, theta: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for e in &g.edges {
        let s = e.coupling.0 * math::sin(theta[e.i] - theta[e.j]);
        out[e.i] += s;
        out[e.j] -= s;
    }
    if let PumpOrder::Finite(n) = g.pump_order {
        let n = f64::from(n);
        for (o, &t) in out.iter_mut().zip(theta) {
            *o += g.pump_strength * math::sin(n * t);
        }
    }
    for (o, &p) in out.iter_mut().zip(&g.pinned) {
        if p {
            *o = 0.0;
        }
    }
}

fn residual(g: &NetworkGraph, d: &[f64]) -> f64 {
    d.iter().zip(&g.pinned).filter(|(_, &p)| !p).map(|(v, _)| v.abs()).fold(0.0, f64::max)
}

/// `Σ_edges K cos(θ_i − θ_j)` without a pump; with a pump of order `N`,
/// `N·Σ_edges K cos(θ_i − θ_j) + Σ_i K_p cos(Nθ_i)`. Non-increasing along
/// the flow of [`phase_derivative`].
pub fn lyapunov_energy(g: &NetworkGraph, s: &PhaseVector) -> Result<f64> {
    g.check_state(s)?;
    Ok(energy(g, &s.0))
}

fn energy(g: &NetworkGraph, theta: &[f64]) -> f64 {
    let pair: f64 = g.edges.iter().map(|e| e.coupling.0 * math::cos(theta[e.i] - theta[e.j])).sum();
    match g.pump_order {
        PumpOrder::Infinite => pair,
        PumpOrder::Finite(n) => {
            let nf = f64::from(n);
            let pump: f64 = theta.iter().map(|&t| g.pump_strength * math::cos(nf * t)).sum();
            // (N/2) over ordered neighbor pairs: every edge counts twice
            nf * pair + pump
        }
    }
}

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_SETTLE_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_STEPS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub dt: f64,
    pub max_steps: usize,
    /// Stop once every free `|dθ/dt|` is below this (rad/s).
    pub settle_tol: f64,
    /// Record every `record_stride`-th step (the first and last states are
    /// always recorded).
    pub record_stride: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            dt: DEFAULT_DT,
            max_steps: DEFAULT_MAX_STEPS,
            settle_tol: DEFAULT_SETTLE_TOL,
            record_stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseVector>,
    pub energies: Vec<f64>,
    /// RK4 steps actually taken.
    pub steps: usize,
    /// max free `|dθ/dt|` at the last state.
    pub residual: f64,
}

impl Trajectory {
    fn push(&mut self, t: f64, theta: &[f64], e: f64) {
        self.times.push(t);
        self.states.push(PhaseVector(theta.to_vec()));
        self.energies.push(e);
    }

    pub fn final_state(&self) -> Option<&PhaseVector> {
        self.states.last()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Fixed-step RK4 from `s0` until the free phases settle.
pub fn integrate(g: &NetworkGraph, s0: &PhaseVector, opts: &IntegrateOptions) -> Result<Trajectory> {
    g.check_state(s0)?;
    if !(opts.dt > 0.0) || !opts.dt.is_finite() {
        return Err(Error::InvalidValue { what: "dt", value: opts.dt });
    }
    if !(opts.settle_tol > 0.0) {
        return Err(Error::InvalidValue { what: "settle_tol", value: opts.settle_tol });
    }
    let stride = opts.record_stride.max(1);
    let n = g.n;
    let dt = opts.dt;
    let mut theta = s0.0.clone();
    let mut traj = Trajectory::default();
    traj.push(0.0, &theta, energy(g, &theta));

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    derivative_into(g, &theta, &mut k1);
    let mut res = residual(g, &k1);
    let mut step = 0usize;
    while res >= opts.settle_tol && step < opts.max_steps {
        for i in 0..n {
            tmp[i] = theta[i] + 0.5 * dt * k1[i];
        }
        derivative_into(g, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = theta[i] + 0.5 * dt * k2[i];
        }
        derivative_into(g, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = theta[i] + dt * k3[i];
        }
        derivative_into(g, &tmp, &mut k4);
        for i in 0..n {
            if !g.pinned[i] {
                let next = theta[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                theta[i] = normalize_radians(next);
            }
        }
        step += 1;
        derivative_into(g, &theta, &mut k1);
        res = residual(g, &k1);
        if step % stride == 0 {
            traj.push(step as f64 * dt, &theta, energy(g, &theta));
        }
    }
    if step % stride != 0 {
        traj.push(step as f64 * dt, &theta, energy(g, &theta));
    }
    traj.steps = step;
    traj.residual = res;
    if res >= opts.settle_tol {
        return Err(Error::NotSettled { residual: res, steps: step, trajectory: alloc::boxed::Box::new(traj) });
    }
    Ok(traj)
}

/// A MIMO network laid out as an oscillator graph: inputs `0..N` pinned at
/// `arctan x_i`, outputs `N..N+M` free, and one edge per weight carrying the
/// coupling `w_ij √(x_i² + 1)`. Output phases in the returned state are 0.
pub fn mimo_graph(net: &MimoNetwork, inputs: &[f64]) -> Result<(NetworkGraph, PhaseVector)> {
    let (n, m) = (net.n_inputs(), net.n_outputs());
    if inputs.len() != n {
        return Err(Error::DimensionMismatch { what: "network inputs", expected: n, found: inputs.len() });
    }
    let mut g = NetworkGraph::new(n + m);
    let mut s = vec![0.0; n + m];
    for (i, &x) in inputs.iter().enumerate() {
        g.pin(i)?;
        s[i] = phase::encode_value(x)?.0;
    }
    for i in 0..n {
        for j in 0..m {
            let (_, coupling) = phase::encode_coupling(net.weights().get(i, j), inputs[i])?;
            g.add_edge(i, n + j, coupling.0)?;
        }
    }
    Ok((g, PhaseVector(s)))
}

/// Decoded values (`tan θ`) of the oscillators `first..`.
pub fn decode_outputs(state: &PhaseVector, first: usize) -> Result<Vec<f64>> {
    state.0[first..].iter().map(|&p| phase::decode_value(phase::Phase(p))).collect()
}

/// Settles a MIMO network by simulation: free outputs start from seeded
/// random phases, the ODE runs to rest, and the outputs are decoded.
pub fn settle_mimo(
    net: &MimoNetwork,
    inputs: &[f64],
    opts: &IntegrateOptions,
    seed: u64,
) -> Result<(Vec<f64>, Trajectory)> {
    let (g, s) = mimo_graph(net, inputs)?;
    let s0 = PhaseVector::randomize_free(&g, &s, seed)?;
    let traj = integrate(&g, &s0, opts)?;
    let out = decode_outputs(traj.final_state().expect("trajectory has a state"), net.n_inputs())?;
    Ok((out, traj))
}
