mod support;

use support::props;

#[test]
fn forward_single_is_weighted_average() {
    props::weighted_average(1000).unwrap();
}

#[test]
fn lyapunov_energy_never_increases() {
    props::lyapunov_monotone(100).unwrap();
}

#[test]
fn ode_settles_to_closed_form() {
    props::ode_matches_analytic(100).unwrap();
}

#[test]
fn encode_decode_round_trip() {
    props::encode_round_trip(2000).unwrap();
}

#[test]
fn autoencoder_gradient_matches_finite_differences() {
    props::ae_gradient(50).unwrap();
}

#[test]
fn kmeans_objectives_are_monotone() {
    props::kmeans_monotone(50).unwrap();
}

#[test]
fn cosine_kmeans_ignores_sample_scale() {
    props::kmeans_scale_invariant(50).unwrap();
}

#[test]
fn zero_lambda_freezes_losers() {
    props::loser_freeze(200).unwrap();
}

#[test]
fn coordinate_descent_matches_least_squares() {
    props::normal_equations(100).unwrap();
}

#[test]
fn potts_single_variable_matches_closed_form() {
    props::potts_single(1000).unwrap();
}
