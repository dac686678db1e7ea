//! Randomized checks shared by the core integration tests and the
//! acceptance run. Each check drives a deterministic proptest runner and
//! returns the first counterexample as an error string.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use oscnet_core::baseline::{euclidean_kmeans, Autoencoder};
use oscnet_core::data::LabeledDataset;
use oscnet_core::dynamics::{
    integrate, lyapunov_energy, settle_mimo, IntegrateOptions, NetworkGraph, PhaseVector, PumpOrder,
};
use oscnet_core::hebbian::{hebbian_response, hebbian_step, kmeans_fit, LoserResidual, TrainState};
use oscnet_core::linalg::Matrix;
use oscnet_core::mimo::{forward_single, MimoNetwork};
use oscnet_core::phase::{decode_value, encode_value, Phase};
use oscnet_core::regression::{coordinate_descent, solve_single_potts, CoordinateDescentConfig, RegressionProblem};
use oscnet_core::Error;
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub fn runner(cases: u32) -> TestRunner {
    let cfg = Config { cases, failure_persistence: None, max_global_rejects: 100_000, ..Config::default() };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S: Strategy,
    S::Value: core::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

fn core_err(e: Error) -> TestCaseError {
    fail(format!("{e}"))
}

fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Matrix {
    Matrix::from_vec(rows, cols, data).expect("shape")
}

fn signed_magnitude() -> impl Strategy<Value = f64> {
    (0.5..5.0f64, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m })
}

/// The single-output readout equals `Σ w x / Σ w` to 1e-12 relative to the
/// rounding scale of the sums.
pub fn weighted_average(cases: u32) -> Result<(), String> {
    let s = (1usize..=12).prop_flat_map(|n| (vec(-10.0..10.0f64, n), vec(-50.0..50.0f64, n)));
    run(cases, s, |(w, x)| {
        let sw: f64 = w.iter().sum();
        let aw: f64 = w.iter().map(|v| v.abs()).sum();
        prop_assume!(sw.abs() >= 0.1 * aw);
        let swx: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
        let awx: f64 = w.iter().zip(&x).map(|(a, b)| (a * b).abs()).sum();
        let expect = swx / sw;
        let got = forward_single(&w, &x).map_err(core_err)?;
        let scale = (awx + expect.abs() * aw) / sw.abs();
        prop_assert!((got - expect).abs() <= 1e-12 * scale, "{got} vs {expect}");
        Ok(())
    })
}

/// Recorded energies never increase along RK4 trajectories.
pub fn lyapunov_monotone(cases: u32) -> Result<(), String> {
    let s = (2usize..=6).prop_flat_map(|n| {
        (
            Just(n),
            vec(prop_oneof![Just(0.0), -2.0..2.0f64], n * (n - 1) / 2),
            vec(any::<bool>(), n),
            prop_oneof![Just(None), (0.0..1.0f64, 1u32..=4).prop_map(Some)],
            any::<u64>(),
        )
    });
    run(cases, s, |(n, k, pinned, pump, seed)| {
        let mut g = NetworkGraph::new(n);
        let mut e = 0;
        for i in 0..n {
            for j in i + 1..n {
                if k[e] != 0.0 {
                    g.add_edge(i, j, k[e]).map_err(core_err)?;
                }
                e += 1;
            }
        }
        for (i, &p) in pinned.iter().enumerate().skip(1) {
            if p {
                g.pin(i).map_err(core_err)?;
            }
        }
        if let Some((strength, order)) = pump {
            g = g.with_pump(strength, PumpOrder::Finite(order));
        }
        let s0 = PhaseVector::randomize_free(&g, &PhaseVector(vec![0.3; n]), seed).map_err(core_err)?;
        let opts = IntegrateOptions { dt: g.suggested_dt(), max_steps: 3000, settle_tol: 1e-9, record_stride: 1 };
        let traj = match integrate(&g, &s0, &opts) {
            Ok(t) => t,
            Err(Error::NotSettled { trajectory, .. }) => *trajectory,
            Err(e) => return Err(core_err(e)),
        };
        for (t, w) in traj.energies.windows(2).enumerate() {
            prop_assert!(w[1] <= w[0] + 1e-10 * (1.0 + w[0].abs()), "energy rose at record {t}: {} -> {}", w[0], w[1]);
        }
        let last = traj.final_state().unwrap();
        let e_last = lyapunov_energy(&g, last).map_err(core_err)?;
        prop_assert!((e_last - traj.energies.last().unwrap()).abs() <= 1e-9 * (1.0 + e_last.abs()));
        Ok(())
    })
}

/// Simulated MIMO outputs agree with the closed form to 1e-3 relative to
/// `max(|y|, 1)` on well-conditioned instances.
pub fn ode_matches_analytic(cases: u32) -> Result<(), String> {
    let s = (1usize..=5, 1usize..=3)
        .prop_flat_map(|(n, m)| (Just(n), Just(m), vec(signed_magnitude(), n * m), vec(-5.0..5.0f64, n), any::<u64>()));
    run(cases, s, |(n, m, w, x, seed)| {
        let net = MimoNetwork::new(matrix(n, m, w.clone())).map_err(core_err)?;
        for j in 0..m {
            let col: Vec<f64> = (0..n).map(|i| w[i * m + j]).collect();
            let c: f64 = col.iter().sum();
            let aj: f64 = col.iter().zip(&x).map(|(a, b)| a.abs() * (b * b + 1.0).sqrt()).sum();
            prop_assume!(c.abs() >= 0.2 * aj);
        }
        let analytic = net.forward(&x).map_err(core_err)?;
        let (ode, _) = settle_mimo(&net, &x, &IntegrateOptions::default(), seed).map_err(core_err)?;
        for (a, o) in analytic.iter().zip(&ode) {
            prop_assert!((a - o).abs() <= 1e-3 * a.abs().max(1.0), "analytic {a} vs ode {o}");
        }
        Ok(())
    })
}

/// `decode ∘ encode` and `encode ∘ decode` are identities up to the
/// conditioning of `tan`.
pub fn encode_round_trip(cases: u32) -> Result<(), String> {
    let limit = core::f64::consts::FRAC_PI_2 - 1e-3;
    run(cases, (-1e6..1e6f64, -limit..limit), |(x, theta)| {
        let back = decode_value(encode_value(x).map_err(core_err)?).map_err(core_err)?;
        prop_assert!((back - x).abs() <= 8.0 * f64::EPSILON * (1.0 + x * x), "{x} -> {back}");
        let y = decode_value(Phase(theta)).map_err(core_err)?;
        let p = encode_value(y).map_err(core_err)?.0;
        prop_assert!((p - theta).abs() <= 8.0 * f64::EPSILON, "{theta} -> {p}");
        Ok(())
    })
}

fn ae_dims() -> impl Strategy<Value = Vec<usize>> {
    (2usize..=5, 1usize..=4, prop::option::of(1usize..=3)).prop_map(|(d, h, inner)| match inner {
        Some(c) => vec![d, h, c, h, d],
        None => vec![d, h, d],
    })
}

/// Backprop gradients match central finite differences within 1e-4.
pub fn ae_gradient(cases: u32) -> Result<(), String> {
    let s = (ae_dims(), 1usize..=6, any::<u64>()).prop_flat_map(|(dims, b, seed)| {
        (Just(dims.clone()), vec(0.0..1.0f64, b * dims[0]), vec(-0.5..0.5f64, 2 * dims[0] + 8), Just(seed))
    });
    run(cases, s, |(dims, xs, offsets, seed)| {
        let x = matrix(xs.len() / dims[0], dims[0], xs);
        let mut ae = Autoencoder::new(&dims, seed).map_err(core_err)?;
        // zero biases put dead units exactly on the ReLU kink
        for (b, o) in ae.biases.iter_mut().flatten().zip(&offsets) {
            *b = *o;
        }
        let (_, grad) = ae.loss_and_grad(&x).map_err(core_err)?;
        let h = 1e-6;
        let loss_at = |ae: &Autoencoder| ae.loss(&x).map_err(core_err);
        for l in 0..ae.n_layers() {
            for k in 0..ae.weights[l].as_slice().len() {
                let mut p = ae.clone();
                p.weights[l].as_mut_slice()[k] += h;
                let mut q = ae.clone();
                q.weights[l].as_mut_slice()[k] -= h;
                let num = (loss_at(&p)? - loss_at(&q)?) / (2.0 * h);
                let ana = grad.weights[l].as_slice()[k];
                prop_assert!((num - ana).abs() < 1e-4, "layer {l} weight {k}: {ana} vs {num}");
            }
            for k in 0..ae.biases[l].len() {
                let mut p = ae.clone();
                p.biases[l][k] += h;
                let mut q = ae.clone();
                q.biases[l][k] -= h;
                let num = (loss_at(&p)? - loss_at(&q)?) / (2.0 * h);
                let ana = grad.biases[l][k];
                prop_assert!((num - ana).abs() < 1e-4, "layer {l} bias {k}: {ana} vs {num}");
            }
        }
        Ok(())
    })
}

fn cluster_data() -> impl Strategy<Value = (usize, usize, Vec<f64>, usize, u64)> {
    (4usize..=60, 2usize..=5)
        .prop_flat_map(|(n, d)| (Just(n), Just(d), vec(0.05..1.0f64, n * d), 1usize..=5, any::<u64>()))
        .prop_map(|(n, d, v, k, seed)| (n, d, v, k.min(n), seed))
}

/// Lloyd inertia never rises; mean cosine similarity never falls.
pub fn kmeans_monotone(cases: u32) -> Result<(), String> {
    run(cases, cluster_data(), |(n, d, v, k, seed)| {
        let data = LabeledDataset::unlabeled(matrix(n, d, v));
        let euc = euclidean_kmeans(&data, k, 50, seed).map_err(core_err)?;
        for w in euc.objective.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15, "inertia rose: {w:?}");
        }
        let cos = kmeans_fit(&data, k, 50, seed).map_err(core_err)?;
        for w in cos.objective.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "similarity fell: {w:?}");
        }
        Ok(())
    })
}

/// Cosine assignments ignore positive rescaling of the samples.
pub fn kmeans_scale_invariant(cases: u32) -> Result<(), String> {
    let s = (cluster_data(), vec(0.01..100.0f64, 60));
    run(cases, s, |((n, d, v, k, seed), scales)| {
        let fit = kmeans_fit(&LabeledDataset::unlabeled(matrix(n, d, v.clone())), k, 50, seed).map_err(core_err)?;
        let scaled: Vec<f64> = v.iter().enumerate().map(|(i, x)| x * scales[i / d]).collect();
        let again = fit.model.assign_all(&matrix(n, d, scaled)).map_err(core_err)?;
        for (i, (a, b)) in fit.assignments.iter().zip(&again).enumerate() {
            if a != b {
                let x = &v[i * d..(i + 1) * d];
                let sim = |j: usize| {
                    let c = fit.model.center(j);
                    x.iter().zip(c).map(|(p, q)| p * q).sum::<f64>() / x.iter().map(|p| p * p).sum::<f64>().sqrt()
                };
                prop_assert!((sim(*a) - sim(*b)).abs() < 1e-12, "sample {i}: {a} vs {b}");
            }
        }
        Ok(())
    })
}

/// With `λ = 0` a step leaves every losing unit bit-identical.
pub fn loser_freeze(cases: u32) -> Result<(), String> {
    let s = (1usize..=8, 2usize..=6).prop_flat_map(|(n, m)| {
        (Just(n), Just(m), vec(0.01..1.0f64, n * m), vec(0.0..1.0f64, n), 0.0..0.5f64, any::<bool>())
    });
    run(cases, s, |(n, m, units, x, lr, own)| {
        let mut state = TrainState::from_units(matrix(m, n, units), 0.0, 0).map_err(core_err)?;
        if own {
            state.loser_residual = LoserResidual::OwnResponse;
        }
        let before = state.units().clone();
        let (_, expected) = hebbian_response(&state, &x).map_err(core_err)?;
        let winner = hebbian_step(&mut state, &x, lr).map_err(core_err)?;
        prop_assert_eq!(winner, expected);
        for j in (0..m).filter(|&j| j != winner) {
            let same = before.row(j).iter().zip(state.unit(j)).all(|(a, b)| a.to_bits() == b.to_bits());
            prop_assert!(same, "loser {} moved", j);
        }
        Ok(())
    })
}

/// Coordinate descent converges to the least-squares solution computed by
/// an SVD; returns the worst ∞-norm gap.
pub fn normal_equations(cases: u32) -> Result<f64, String> {
    let worst = core::cell::Cell::new(0.0f64);
    let s = (1usize..=10, any::<bool>()).prop_flat_map(|(m, intercept)| {
        let p = m + usize::from(intercept);
        (2 * p + 2..=200).prop_flat_map(move |n| {
            (
                Just(n),
                Just(m),
                Just(intercept),
                vec(-3.0..3.0f64, n * m),
                vec(-5.0..5.0f64, m + 1),
                vec(-0.5..0.5f64, n),
            )
        })
    });
    run(cases, s, |(n, m, intercept, xs, truth, noise)| {
        let y: Vec<f64> =
            (0..n).map(|i| truth[0] + (0..m).map(|j| xs[i * m + j] * truth[j + 1]).sum::<f64>() + noise[i]).collect();
        let p = m + usize::from(intercept);
        let design = DMatrix::from_fn(n, p, |i, j| match (intercept, j) {
            (true, 0) => 1.0,
            (true, j) => xs[i * m + j - 1],
            (false, j) => xs[i * m + j],
        });
        let svd = design.clone().svd(true, true);
        let sv = &svd.singular_values;
        prop_assume!(sv.min() > 0.2 * sv.max());
        let oracle = svd.solve(&DVector::from_vec(y.clone()), 1e-12).map_err(|e| fail(e.into()))?;
        let problem = RegressionProblem::new(matrix(n, m, xs), y, intercept).map_err(core_err)?;
        let cfg = CoordinateDescentConfig { tol: 1e-12, max_sweeps: 100_000, ..CoordinateDescentConfig::default() };
        let fit = coordinate_descent(&problem, &cfg).map_err(core_err)?;
        let gap = fit.theta.iter().zip(oracle.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst.set(worst.get().max(gap));
        prop_assert!(gap <= 1e-6, "gap {gap}");
        Ok(())
    })?;
    Ok(worst.get())
}

/// The oscillator single-variable solve equals `Σxy / Σx²` to 1e-9
/// relative; returns the worst relative gap.
pub fn potts_single(cases: u32) -> Result<f64, String> {
    let worst = core::cell::Cell::new(0.0f64);
    let s = (1usize..=50)
        .prop_flat_map(|n| (vec(prop_oneof![1 => Just(0.0), 9 => -10.0..10.0f64], n), vec(-10.0..10.0f64, n)));
    run(cases, s, |(x, y)| {
        let xx: f64 = x.iter().map(|v| v * v).sum();
        prop_assume!(xx > 1e-6);
        let expect = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / xx;
        let scale = x.iter().zip(&y).map(|(a, b)| (a * b).abs()).sum::<f64>() / xx;
        let got = solve_single_potts(&x, &y).map_err(core_err)?;
        let gap = (got - expect).abs() / scale.max(f64::MIN_POSITIVE);
        worst.set(worst.get().max(gap));
        prop_assert!(gap <= 1e-9, "{got} vs {expect}");
        Ok(())
    })?;
    Ok(worst.get())
}
