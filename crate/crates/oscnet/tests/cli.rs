use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use oscnet::core::mimo::{convolve_image, gaussian_kernel, BorderRule};
use oscnet::pgm;
use serde_json::Value;

fn oscnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oscnet")).args(args).output().expect("spawn oscnet")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn write_net(dir: &Path, name: &str, n: usize, m: usize, w: &[f64]) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::json!({ "n_inputs": n, "n_outputs": m, "weights": w }).to_string()).unwrap();
    p.to_str().unwrap().to_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_renders_reference_network() {
    let net = repo("data/nets/four_by_three.json");
    for mode in ["analytic", "ode", "both"] {
        let o = oscnet(&["simulate", "--net", s(&net), "--inputs", "3,-7,4,-2", "--mode", mode]);
        assert_eq!(code(&o), 0, "{mode}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o), "[-7.545, -4.600, 28.000]\n", "{mode}");
    }
}

#[test]
fn simulate_identity_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let id = write_net(dir.path(), "id.json", 1, 1, &[1.0]);
    let o = oscnet(&["simulate", "--net", &id, "--inputs", "5"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "[5.000]\n"));

    let degenerate = write_net(dir.path(), "deg.json", 2, 1, &[1.0, -1.0]);
    assert_eq!(code(&oscnet(&["simulate", "--net", &degenerate, "--inputs", "1,2"])), 2);

    let net = s(&repo("data/nets/four_by_three.json")).to_owned();
    let o = oscnet(&["simulate", "--net", &net, "--inputs", "3,-7,4,-2", "--mode", "ode", "--max-steps", "5"]);
    assert_eq!(code(&o), 3);

    assert_eq!(code(&oscnet(&["simulate", "--net", &net])), 1);
    assert_eq!(code(&oscnet(&["simulate", "--net", "/nonexistent.json", "--inputs", "1"])), 1);
    assert_eq!(code(&oscnet(&["bogus"])), 1);
    assert_eq!(code(&oscnet(&["--help"])), 0);
}

#[test]
fn simulate_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let net = repo("data/nets/four_by_three.json");
    let o = oscnet(&["--out", s(dir.path()), "simulate", "--net", s(&net), "--inputs", "3,-7,4,-2", "--mode", "ode"]);
    assert_eq!(code(&o), 0);
    let traj = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = traj.lines();
    assert_eq!(lines.next().unwrap(), "t,theta_0,theta_1,theta_2,theta_3,theta_4,theta_5,theta_6,energy");
    let energies: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(energies.len() > 2);
    assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-9 * w[0].abs()));
}

#[test]
fn convolve_matches_independent_oracle() {
    let oracle: Vec<f64> = std::fs::read_to_string(fixture("checker_blur_sigma1.txt"))
        .unwrap()
        .split_whitespace()
        .map(|v| v.parse().unwrap())
        .collect();
    let img = pgm::read(&fixture("checker.pgm")).unwrap();
    let exact = convolve_image(&img.pixels, &gaussian_kernel(3, 1.0).unwrap(), BorderRule::Renormalize).unwrap();
    for (a, b) in exact.as_slice().iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    let dir = tempfile::tempdir().unwrap();
    let o = oscnet(&[
        "--out",
        s(dir.path()),
        "convolve",
        "--image",
        s(&fixture("checker.pgm")),
        "--size",
        "3",
        "--sigma",
        "1",
    ]);
    assert_eq!(code(&o), 0);
    let out = pgm::read(&dir.path().join("convolved.pgm")).unwrap();
    assert_eq!((out.pixels.rows(), out.pixels.cols(), out.maxval), (10, 12, 255));
    for (a, b) in out.pixels.as_slice().iter().zip(&oracle) {
        assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12, "{a} vs {b}");
    }
}

#[test]
fn convolve_identity_and_degenerate_kernels() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.json");
    std::fs::write(&one, r#"{"taps": [[2.5]]}"#).unwrap();
    let o = oscnet(&["convolve", "--image", s(&fixture("checker.pgm")), "--kernel", s(&one)]);
    assert_eq!(code(&o), 0);
    let src = pgm::read(&fixture("checker.pgm")).unwrap();
    assert_eq!(pgm::parse(&o.stdout).unwrap(), src);

    let zero = dir.path().join("zero.json");
    std::fs::write(&zero, r#"{"taps": [[1.0, -1.0]], "anchor": [0, 0]}"#).unwrap();
    assert_eq!(code(&oscnet(&["convolve", "--image", s(&fixture("checker.pgm")), "--kernel", s(&zero)])), 2);
}

fn json_out(o: &Output) -> Value {
    assert_eq!(code(o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn train_eval_cycle_on_synthetic_clusters() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    let data = "4,60,16,0.03";
    let report =
        json_out(&oscnet(&["--out", out, "--seed", "3", "train", "hebbian", "--synthetic", data, "--hidden", "8"]));
    assert!(report["train_purity"].as_f64().unwrap() >= 0.95);
    let ckpt = dir.path().join("checkpoint.json");
    for protocol in ["unsupervised", "finetune"] {
        let r = json_out(&oscnet(&[
            "eval",
            "--checkpoint",
            s(&ckpt),
            "--synthetic",
            data,
            "--seed",
            "3",
            "--protocol",
            protocol,
        ]));
        assert!(r["accuracy"].as_f64().unwrap() >= 0.95, "{protocol}: {r}");
    }
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["params"]["hidden"], serde_json::json!([8]));
    let ledger = std::fs::read_to_string(dir.path().join("results.jsonl")).unwrap();
    assert_eq!(ledger.lines().count(), 1);

    assert_eq!(code(&oscnet(&["train", "hebbian", "--synthetic", data, "--epochs", "0"])), 1);
    let ae = json_out(&oscnet(&["train", "autoencoder", "--synthetic", data, "--hidden", "4", "--epochs", "2"]));
    assert_eq!(ae["dims"], serde_json::json!([16, 4, 16]));
}

#[test]
fn perfect_checkpoint_scores_full_accuracy() {
    // noiseless clusters: every unit is a copy of one center
    let dir = tempfile::tempdir().unwrap();
    let data = "3,30,6,0.0";
    let ckpt = dir.path().join("perfect.json");
    let mut w = vec![0.0; 6 * 3];
    let text = std::fs::read_to_string({
        let o = oscnet(&["--out", s(dir.path()), "kmeans", "oscnet", "--k", "3", "--synthetic", data]);
        assert_eq!(json_out(&o)["accuracy"], 1.0);
        dir.path().join("clusters.json")
    })
    .unwrap();
    let clusters: Value = serde_json::from_str(&text).unwrap();
    let centers: Vec<f64> = serde_json::from_value(clusters["centers"].clone()).unwrap();
    for j in 0..3 {
        for i in 0..6 {
            w[i * 3 + j] = centers[j * 6 + i];
        }
    }
    let state = oscnet::core::hebbian::TrainState::from_weights(
        &oscnet::core::linalg::Matrix::from_vec(6, 3, w).unwrap(),
        0.0,
        0,
    )
    .unwrap();
    oscnet::artifact::save(&ckpt, &oscnet::artifact::TrainStateFile::from(&state)).unwrap();
    let r = json_out(&oscnet(&["eval", "--checkpoint", s(&ckpt), "--synthetic", data]));
    assert_eq!(r["accuracy"], 1.0);
}

#[test]
fn same_seed_same_bytes() {
    let run = |dir: &Path| {
        let o = oscnet(&[
            "--out",
            s(dir),
            "--seed",
            "11",
            "--format",
            "csv",
            "retina",
            "--grid",
            "6",
            "--cells",
            "36",
            "--waves",
            "40",
        ]);
        assert_eq!(code(&o), 0);
        (o.stdout, std::fs::read(dir.join("world.json")).unwrap(), std::fs::read(dir.join("retina.csv")).unwrap())
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run(a.path()), run(b.path()));
}

#[test]
fn retina_without_waves_leaves_world_untrained() {
    let r = json_out(&oscnet(&["retina", "--grid", "5", "--cells", "25", "--waves", "0"]));
    assert_eq!(r["trained"], r["untrained"]);
    let r = json_out(&oscnet(&["retina", "--grid", "6", "--cells", "36", "--waves", "150", "--checkpoints"]));
    let (before, after) =
        (r["untrained"]["correlation"].as_f64().unwrap(), r["trained"]["correlation"].as_f64().unwrap());
    assert!(after > before + 0.3, "{before} -> {after}");
    assert_eq!(r["checkpoints"].as_array().unwrap().len(), 4);
}

#[test]
fn regress_closed_and_coordinate() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    std::fs::write(&csv, "x1,x2,y\n1,0,3.5\n0,1,-1\n1,1,2.5\n2,1,6\n").unwrap();
    let r = json_out(&oscnet(&["regress", "--data", s(&csv), "--tol", "1e-13"]));
    let theta: Vec<f64> = serde_json::from_value(r["theta"].clone()).unwrap();
    // exact fit y = 3.5 x1 - x2
    assert!((theta[0] - 3.5).abs() < 1e-9 && (theta[1] + 1.0).abs() < 1e-9, "{theta:?}");

    let one = dir.path().join("one.csv");
    std::fs::write(&one, "x,y\n1,2\n2,4\n3,6.3\n").unwrap();
    let r = json_out(&oscnet(&["regress", "--data", s(&one), "--method", "closed"]));
    let expect = (2.0 + 8.0 + 18.9) / 14.0;
    assert!((r["theta"][0].as_f64().unwrap() - expect).abs() < 1e-12);
    assert!((r["potts_theta"][0].as_f64().unwrap() - expect).abs() < 1e-12);
    assert_eq!(code(&oscnet(&["regress", "--data", s(&csv), "--method", "closed"])), 1);

    let o = oscnet(&["regress", "--data", s(&csv), "--max-sweeps", "1"]);
    assert_eq!(code(&o), 3);
    let zero = dir.path().join("zero.csv");
    std::fs::write(&zero, "x,y\n0,1\n0,2\n").unwrap();
    assert_eq!(code(&oscnet(&["regress", "--data", s(&zero), "--method", "closed"])), 2);
}

#[test]
fn csv_format_is_a_header_and_a_row() {
    let o = oscnet(&["--format", "csv", "kmeans", "euclidean", "--k", "2", "--synthetic", "2,10,4,0.02"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("accuracy,"));
}
