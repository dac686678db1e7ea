//! One PASS/FAIL line per acceptance criterion.
//!
//! Runs without the libtest harness so every line reaches the output.
//! Seeds 0, 1, 2 on the vendored MNIST subset.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;
#[path = "../../core/tests/support/props.rs"]
mod props;

use std::time::{Duration, Instant};

use oscnet::cli::render_outputs;
use oscnet::core::baseline::AeConfig;
use oscnet::core::data::LabeledDataset;
use oscnet::core::dynamics::{settle_mimo, IntegrateOptions};
use oscnet::core::hebbian::{HeadConfig, HebbianConfig};
use oscnet::core::linalg::Matrix;
use oscnet::core::mimo::{input_phases_in_pi, MimoNetwork};
use oscnet::core::retina::{build_world, develop, evaluate_straight_line, DevelopConfig};
use oscnet::experiments::{self, KMeansVariant};
use oscnet::mnist::{self, Split};

const SEEDS: [u64; 3] = [0, 1, 2];

type Suite = (&'static str, fn(u32) -> Result<(), String>, u32);

/// Criteria that cannot pass as written; see the README.
const KNOWN_RED: [u32; 1] = [2];

struct Report {
    failed: Vec<u32>,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        println!("{} {id} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id);
        }
    }
}

fn median(v: &[f64]) -> f64 {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn fig3() -> (MimoNetwork, [f64; 4]) {
    let w = Matrix::from_rows(&[[-3.0, -9.0, 0.0], [8.0, 2.0, -6.0], [-1.0, 7.0, 10.0], [7.0, 5.0, -1.0]]).unwrap();
    (MimoNetwork::new(w).unwrap(), [3.0, -7.0, 4.0, -2.0])
}

fn criterion_1(r: &mut Report) {
    let t = Instant::now();
    let (net, x) = fig3();
    let out = net.forward(&x).unwrap();
    let (ode, _) = settle_mimo(&net, &x, &IntegrateOptions::default(), 0).unwrap();
    let elapsed = t.elapsed();
    let printed = [-7.545, -4.600, 28.000];
    let exact = [-83.0 / 11.0, -23.0 / 5.0, 84.0 / 3.0];
    let abs_err = out.iter().zip(printed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let exact_err = out.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let ode_rel = out.iter().zip(&ode).map(|(a, b)| (a - b).abs() / a.abs()).fold(0.0, f64::max);
    let pass = abs_err <= 1e-3 && exact_err <= 1e-12 && ode_rel <= 1e-2 && elapsed < Duration::from_secs(1);
    r.line(
        1,
        "reference network forward",
        pass,
        format!(
            "{} (vs printed {abs_err:.1e}, vs fractions {exact_err:.1e}), ode {} rel {ode_rel:.1e}, {}",
            render_outputs(&out),
            fmt(&ode),
            secs(elapsed)
        ),
    );
}

fn criterion_2(r: &mut Report) {
    let (_, x) = fig3();
    let phases = input_phases_in_pi(&x).unwrap();
    let rendered: Vec<String> = phases.iter().map(|p| format!("{p:.3}")).collect();
    let published = ["0.397", "-0.455", "0.422", "-0.352"];
    let pass = rendered.iter().zip(published).all(|(a, b)| a == b);
    r.line(
        2,
        "input phase encoding",
        pass,
        format!("rendered [{}]π, published [{}]π, exact {}π", rendered.join(", "), published.join(", "), fmt(&phases)),
    );
}

struct Mnist {
    train: LabeledDataset,
    test: LabeledDataset,
}

fn load() -> Mnist {
    let dir = mnist::default_data_dir();
    Mnist { train: mnist::load_split(&dir, Split::Train).unwrap(), test: mnist::load_split(&dir, Split::Test).unwrap() }
}

/// Per seed: Hebbian states for each width, autoencoders [10], [16], [128, 10].
struct Models {
    hebbian: Vec<(usize, Vec<oscnet::core::hebbian::TrainState>)>,
    ae10: Vec<oscnet::core::baseline::Autoencoder>,
    ae16: Vec<oscnet::core::baseline::Autoencoder>,
    ae128_10: Vec<oscnet::core::baseline::Autoencoder>,
}

fn criteria_3_4(r: &mut Report, d: &Mnist) {
    let t = Instant::now();
    let cfg = HebbianConfig::default();
    let ae_cfg = AeConfig::default();
    let mut models = Models { hebbian: Vec::new(), ae10: Vec::new(), ae16: Vec::new(), ae128_10: Vec::new() };
    for m in [10, 16, 64, 128] {
        let states = SEEDS
            .iter()
            .map(|&s| experiments::train_hebbian(&d.train, m, experiments::DEFAULT_EPOCHS, &cfg, s).unwrap())
            .collect();
        models.hebbian.push((m, states));
    }
    for &s in &SEEDS {
        models.ae10.push(experiments::train_ae(&d.train, &[10], &ae_cfg, s).unwrap());
        models.ae128_10.push(experiments::train_ae(&d.train, &[128, 10], &ae_cfg, s).unwrap());
        models.ae16.push(experiments::train_ae(&d.train, &[16], &ae_cfg, s).unwrap());
    }

    let heb10: Vec<f64> = models.hebbian[0]
        .1
        .iter()
        .map(|st| experiments::hebbian_unsupervised(st, &d.train, &d.test).unwrap())
        .collect();
    let ae1: Vec<f64> =
        models.ae10.iter().map(|ae| experiments::ae_unsupervised(ae, &d.train, &d.test).unwrap()).collect();
    let ae2: Vec<f64> =
        models.ae128_10.iter().map(|ae| experiments::ae_unsupervised(ae, &d.train, &d.test).unwrap()).collect();
    let table1_time = t.elapsed();
    let beats = (0..SEEDS.len()).all(|i| heb10[i] > ae1[i] && heb10[i] > ae2[i]);
    let pass = median(&heb10) >= 0.50
        && median(&ae1) <= 0.25
        && median(&ae2) <= 0.40
        && beats
        && table1_time < Duration::from_secs(15 * 60);
    r.line(
        3,
        "unsupervised accuracy",
        pass,
        format!(
            "hebbian@10 {} (≥0.50), ae[10] {} (≤0.25), ae[128,10] {} (≤0.40), hebbian beats both every seed: {beats}, {}",
            fmt(&heb10),
            fmt(&ae1),
            fmt(&ae2),
            secs(table1_time)
        ),
    );

    let head = HeadConfig::default();
    let bars = [(10, 0.725), (16, 0.806), (64, 0.856), (128, 0.863)];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut heb_median = Vec::new();
    for ((m, states), (_, bar)) in models.hebbian.iter().zip(bars) {
        let acc: Vec<f64> =
            states.iter().map(|st| experiments::hebbian_finetune(st, &d.train, &d.test, &head).unwrap().1).collect();
        let med = median(&acc);
        pass &= med >= bar;
        heb_median.push(med);
        parts.push(format!("@{m} {} med {med:.4} (≥{bar})", fmt(&acc)));
    }
    for (label, aes, i) in [("ae@10", &models.ae10, 0), ("ae@16", &models.ae16, 1)] {
        let acc: Vec<f64> =
            aes.iter().map(|ae| experiments::ae_finetune(ae, &d.train, &d.test, &head).unwrap().1).collect();
        let med = median(&acc);
        pass &= heb_median[i] >= med;
        parts.push(format!("{label} med {med:.4}"));
    }
    r.line(4, "fine-tuned accuracy", pass, format!("{}, {}", parts.join(", "), secs(t.elapsed())));
}

fn criterion_5(r: &mut Report, d: &Mnist) {
    let t = Instant::now();
    let acc = |v| -> Vec<f64> {
        SEEDS
            .iter()
            .map(|&s| {
                let fit = experiments::fit_kmeans(&d.train, v, 10, experiments::KMEANS_ITERS, s).unwrap();
                experiments::kmeans_accuracy(&fit, &d.train, &d.test).unwrap()
            })
            .collect()
    };
    let osc = acc(KMeansVariant::Oscnet);
    let euc = acc(KMeansVariant::Euclidean);
    let pass = median(&osc) >= 0.558 && median(&euc) >= 0.545;
    r.line(
        5,
        "k-means accuracy",
        pass,
        format!(
            "cosine {} med {:.4} (≥0.558), euclidean {} med {:.4} (≥0.545), {}",
            fmt(&osc),
            median(&osc),
            fmt(&euc),
            median(&euc),
            secs(t.elapsed())
        ),
    );
}

fn criterion_6(r: &mut Report) {
    let ne = props::normal_equations(100);
    let potts = props::potts_single(1000);
    let pass = ne.is_ok() && potts.is_ok();
    let show = |x: &Result<f64, String>| match x {
        Ok(v) => format!("{v:.1e}"),
        Err(e) => e.clone(),
    };
    r.line(
        6,
        "regression oracles",
        pass,
        format!("coordinate descent vs SVD worst ∞-gap {} (≤1e-6, 100 cases), potts vs closed form worst {} (≤1e-9, 1000 cases)", show(&ne), show(&potts)),
    );
}

fn criterion_7(r: &mut Report) {
    let t = Instant::now();
    let suites: [Suite; 8] = [
        ("weighted-average", props::weighted_average, 1000),
        ("lyapunov", props::lyapunov_monotone, 100),
        ("ode-vs-analytic", props::ode_matches_analytic, 100),
        ("round-trip", props::encode_round_trip, 2000),
        ("ae-gradient", props::ae_gradient, 50),
        ("kmeans-monotone", props::kmeans_monotone, 50),
        ("kmeans-scale", props::kmeans_scale_invariant, 50),
        ("loser-freeze", props::loser_freeze, 200),
    ];
    let mut failed = Vec::new();
    for (name, check, cases) in suites {
        if let Err(e) = check(cases) {
            failed.push(format!("{name}: {e}"));
        }
    }
    let elapsed = t.elapsed();
    let pass = failed.is_empty() && elapsed < Duration::from_secs(120);
    let detail = if failed.is_empty() { "8 suites green".to_owned() } else { failed.join("; ") };
    r.line(7, "property suites", pass, format!("{detail}, {}", secs(elapsed)));
}

fn criterion_8(r: &mut Report) {
    let t = Instant::now();
    let (mut before, mut after, mut ceiling) = (Vec::new(), Vec::new(), Vec::new());
    for &s in &SEEDS {
        let mut world = build_world((16, 16), 256, 0.03, s).unwrap();
        before.push(evaluate_straight_line(&world).unwrap().correlation);
        ceiling.push(oracle::pinv_ceiling(&world).correlation);
        develop(&mut world, 2000, &DevelopConfig::default(), s, &[]).unwrap();
        after.push(evaluate_straight_line(&world).unwrap().correlation);
    }
    let (b, a, c) = (median(&before), median(&after), median(&ceiling));
    let elapsed = t.elapsed();
    let pass = a >= b + 0.3 && a >= 0.6 * c && elapsed < Duration::from_secs(600);
    r.line(
        8,
        "retina straight lines",
        pass,
        format!(
            "trained {} med {a:.4}, untrained med {b:.4} (gain ≥0.3), ceiling med {c:.4} (≥60%: {:.4}), {}",
            fmt(&after),
            0.6 * c,
            secs(elapsed)
        ),
    );
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut r = Report { failed: Vec::new() };
    criterion_1(&mut r);
    criterion_2(&mut r);
    let d = load();
    criteria_3_4(&mut r, &d);
    criterion_5(&mut r, &d);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    let unexpected: Vec<u32> = r.failed.iter().copied().filter(|id| !KNOWN_RED.contains(id)).collect();
    println!("acceptance: {} of 8 pass; failing {:?}, of which known {:?}", 8 - r.failed.len(), r.failed, KNOWN_RED);
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
