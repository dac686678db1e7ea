//! The `oscnet` command line.
//!
//! Exit status: 0 success, 1 usage or IO error, 2 numeric degeneracy,
//! 3 a simulation that did not settle or a fit that did not converge.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use oscnet_core::baseline::AeConfig;
use oscnet_core::data::{synth_clusters, LabeledDataset};
use oscnet_core::dynamics::{settle_mimo, IntegrateOptions, DEFAULT_DT, DEFAULT_MAX_STEPS, DEFAULT_SETTLE_TOL};
use oscnet_core::hebbian::{ColumnNorm, HeadConfig, HebbianConfig, Init, LoserResidual, LrSchedule, TrainState};
use oscnet_core::mimo::{convolve_image, input_phases_in_pi, BorderRule};
use oscnet_core::regression::{
    coordinate_descent, solve_single, solve_single_potts, CoordinateDescentConfig, Order, RegressionProblem,
};
use oscnet_core::retina::{self, DevelopConfig, UpdateMode, WaveParams};
use oscnet_core::{eval, Error as CoreError};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::artifact::{
    self, Artifact, AutoencoderFile, ClusterFile, HeadFile, KernelSpec, NetSpec, RetinaFile, TrainStateFile,
};
use crate::error::{Error, Result};
use crate::experiments::{self, KMeansVariant};
use crate::manifest::{append_jsonl, RunManifest};
use crate::mnist::{self, Split};
use crate::{csvio, parallel, pgm};

#[derive(Debug, Parser)]
#[command(name = "oscnet", version, about = "Oscillator-network experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Global {
    /// Root seed; every random stream derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for artifacts, the run manifest and `results.jsonl`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Worker threads for evaluation (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Forward-propagate a MIMO network analytically or by integrating the phase ODE.
    Simulate(SimulateArgs),
    /// Blur or convolve a PGM image through single-output networks.
    Convolve(ConvolveArgs),
    /// Train a Hebbian network or an autoencoder baseline.
    Train(TrainArgs),
    /// Evaluate a checkpoint (majority-label or fine-tuned head).
    Eval(EvalArgs),
    /// Cluster with cosine (oscillator) or Euclidean k-means.
    Kmeans(KmeansArgs),
    /// Linear regression from a CSV (last column is the target).
    Regress(RegressArgs),
    /// Develop retina-to-LGN weights from retinal waves.
    Retina(RetinaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    Analytic,
    Ode,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// JSON `{n_inputs, n_outputs, weights}` with weights row-major.
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub inputs: Vec<f64>,
    #[arg(long, value_enum, default_value_t = SimMode::Analytic)]
    pub mode: SimMode,
    #[arg(long, default_value_t = DEFAULT_DT)]
    pub dt: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
    #[arg(long, default_value_t = DEFAULT_SETTLE_TOL)]
    pub settle_tol: f64,
    /// Record every n-th integration step in the trajectory.
    #[arg(long, default_value_t = 10)]
    pub record_stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Border {
    Renormalize,
    Reflect,
    Zero,
}

#[derive(Debug, Args, Serialize)]
pub struct ConvolveArgs {
    #[arg(long)]
    pub image: PathBuf,
    /// Kernel JSON: `{size, sigma}` or `{taps, anchor}`.
    #[arg(long, conflicts_with_all = ["size", "sigma"])]
    pub kernel: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub size: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value_t = Border::Renormalize)]
    pub border: Border,
    /// Write plain-text P2 instead of binary P5.
    #[arg(long)]
    pub ascii: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct DataArgs {
    /// MNIST directory (default: $OSCNET_DATA_DIR, then the vendored subset).
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Synthetic clusters `K,N_PER,DIM,SPREAD` instead of MNIST; test rows
    /// come from the same clusters.
    #[arg(long, conflicts_with = "data_dir")]
    pub synthetic: Option<String>,
    /// Use only the first N training rows.
    #[arg(long)]
    pub limit: Option<usize>,
    /// Use only the first N test rows.
    #[arg(long)]
    pub test_limit: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Hebbian,
    Autoencoder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LoserArg {
    Winner,
    Own,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitArg {
    Samples,
    Uniform,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(value_enum)]
    pub variant: Variant,
    #[command(flatten)]
    pub data: DataArgs,
    /// Hidden units (Hebbian) or encoder widths, comma separated (autoencoder).
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub hidden: Vec<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value_t = LrSchedule::default().start)]
    pub lr_start: f64,
    #[arg(long, default_value_t = LrSchedule::default().end)]
    pub lr_end: f64,
    #[arg(long, default_value_t = HebbianConfig::default().lambda)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = LoserArg::Winner)]
    pub loser: LoserArg,
    #[arg(long, value_enum, default_value_t = InitArg::Samples)]
    pub init: InitArg,
    /// Leave columns unnormalized after each update.
    #[arg(long)]
    pub no_column_norm: bool,
    /// Autoencoder SGD learning rate.
    #[arg(long, default_value_t = AeConfig::default().lr)]
    pub lr: f64,
    #[arg(long, default_value_t = AeConfig::default().batch)]
    pub batch: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Unsupervised,
    Finetune,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, value_enum, default_value_t = Protocol::Unsupervised)]
    pub protocol: Protocol,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = HeadConfig::default().l2)]
    pub l2: f64,
    #[arg(long, default_value_t = HeadConfig::default().iters)]
    pub iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KmeansArg {
    Oscnet,
    Euclidean,
}

#[derive(Debug, Args, Serialize)]
pub struct KmeansArgs {
    #[arg(value_enum)]
    pub variant: KmeansArg,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = experiments::KMEANS_ITERS)]
    pub iters: usize,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressMethod {
    /// Single feature through the origin: `y ≈ k·x`.
    Closed,
    Coord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderArg {
    Cyclic,
    Random,
}

#[derive(Debug, Args, Serialize)]
pub struct RegressArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = RegressMethod::Coord)]
    pub method: RegressMethod,
    #[arg(long)]
    pub intercept: bool,
    #[arg(long, default_value_t = CoordinateDescentConfig::default().max_sweeps)]
    pub max_sweeps: usize,
    #[arg(long, default_value_t = CoordinateDescentConfig::default().tol)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = OrderArg::Cyclic)]
    pub order: OrderArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateArg {
    Frame,
    Wave,
}

#[derive(Debug, Args, Serialize)]
pub struct RetinaArgs {
    /// Grid side length (square world).
    #[arg(long, default_value_t = 16)]
    pub grid: usize,
    #[arg(long, default_value_t = 256)]
    pub cells: usize,
    #[arg(long, default_value_t = 2000)]
    pub waves: usize,
    /// Lens blur in unit-square coordinates.
    #[arg(long, default_value_t = 0.03)]
    pub blur: f64,
    #[arg(long, default_value_t = DevelopConfig::default().candidates)]
    pub candidates: usize,
    #[arg(long, value_enum, default_value_t = UpdateArg::Frame)]
    pub update: UpdateArg,
    /// Blob width in pixels.
    #[arg(long, default_value_t = WaveParams::default().sigma)]
    pub wave_sigma: f64,
    /// Blob speed in pixels per frame.
    #[arg(long, default_value_t = WaveParams::default().speed)]
    pub speed: f64,
    #[arg(long, default_value_t = DevelopConfig::default().lr.start)]
    pub lr_start: f64,
    #[arg(long, default_value_t = DevelopConfig::default().lr.end)]
    pub lr_end: f64,
    #[arg(long, default_value_t = DevelopConfig::default().lambda)]
    pub lambda: f64,
    /// Evaluate after each quarter of the waves.
    #[arg(long)]
    pub checkpoints: bool,
    /// Export the frames of the first N waves as PGM into `<out>/frames`.
    #[arg(long, default_value_t = 0)]
    pub export_waves: usize,
}

/// Parses `args` (program name first) and runs the command, writing the
/// primary result to `stdout`. Returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            if code == 0 {
                let _ = write!(stdout, "{e}");
            } else {
                let _ = e.print();
            }
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    parallel::configure_threads(cli.global.threads);
    if let Some(out) = &cli.global.out {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    }
    let ctx = Ctx { g: &cli.global };
    match &cli.command {
        Command::Simulate(a) => simulate(&ctx, a, stdout),
        Command::Convolve(a) => convolve(&ctx, a, stdout),
        Command::Train(a) => train(&ctx, a, stdout),
        Command::Eval(a) => evaluate(&ctx, a, stdout),
        Command::Kmeans(a) => kmeans(&ctx, a, stdout),
        Command::Regress(a) => regress(&ctx, a, stdout),
        Command::Retina(a) => retina_cmd(&ctx, a, stdout),
    }
}

struct Ctx<'a> {
    g: &'a Global,
}

impl Ctx<'_> {
    fn log(&self, msg: impl AsRef<str>) {
        if self.g.verbose > 0 {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn out_path(&self, name: &str) -> Option<PathBuf> {
        self.g.out.as_ref().map(|d| d.join(name))
    }

    /// Prints `report`, stores it as `<command>.{json,csv}`, appends it to
    /// the results ledger and writes the manifest.
    fn finish(&self, command: &str, report: Value, mut manifest: RunManifest, stdout: &mut dyn Write) -> Result<()> {
        let text = render(&report, self.g.format)?;
        stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))?;
        if let Some(dir) = &self.g.out {
            let ext = match self.g.format {
                Format::Json => "json",
                Format::Csv => "csv",
            };
            let p = dir.join(format!("{command}.{ext}"));
            std::fs::write(&p, &text).map_err(|e| Error::io(&p, e))?;
            manifest.finish(report.clone());
            manifest.save(&dir.join("manifest.json"))?;
            append_jsonl(
                &dir.join("results.jsonl"),
                &json!({ "command": command, "seed": self.g.seed, "results": report }),
            )?;
        }
        Ok(())
    }
}

fn render(report: &Value, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        Format::Csv => {
            let mut flat = Map::new();
            flatten("", report, &mut flat);
            let header: Vec<&str> = flat.keys().map(String::as_str).collect();
            let row: Vec<String> = flat
                .values()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header)?;
            w.write_record(&row)?;
            let bytes = w.into_inner().map_err(|e| Error::io("<csv>", e.into_error()))?;
            Ok(String::from_utf8_lossy(&bytes).into_owned())
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let joined: Vec<String> = a.iter().map(Value::to_string).collect();
            out.insert(prefix.to_owned(), Value::String(joined.join(";")));
        }
        Value::Array(a) => {
            for (i, v) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, out);
            }
        }
        other => {
            out.insert(prefix.to_owned(), other.clone());
        }
    }
}

/// `[a, b, c]` with three decimals.
pub fn render_outputs(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{:.3}", v + 0.0)).collect();
    format!("[{}]", parts.join(", "))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn simulate(ctx: &Ctx<'_>, a: &SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let net = NetSpec::parse(&read_text(&a.net)?)?.network()?;
    let analytic = match a.mode {
        SimMode::Analytic | SimMode::Both => Some(net.forward(&a.inputs)?),
        SimMode::Ode => None,
    };
    let mut report = json!({
        "mode": format!("{:?}", a.mode).to_lowercase(),
        "inputs": a.inputs,
        "input_phases_in_pi": input_phases_in_pi(&a.inputs)?,
    });
    let mut ode_outputs = None;
    if a.mode != SimMode::Analytic {
        let opts = IntegrateOptions {
            dt: a.dt,
            max_steps: a.max_steps,
            settle_tol: a.settle_tol,
            record_stride: a.record_stride,
        };
        let settled = settle_mimo(&net, &a.inputs, &opts, ctx.g.seed);
        let (outputs, traj) = match settled {
            Ok(v) => v,
            Err(e) => {
                if let (CoreError::NotSettled { trajectory, .. }, Some(p)) = (e.root(), ctx.out_path("trajectory.csv"))
                {
                    write_trajectory(&p, trajectory)?;
                }
                return Err(e.into());
            }
        };
        if let Some(p) = ctx.out_path("trajectory.csv") {
            write_trajectory(&p, &traj)?;
        }
        report["ode_outputs"] = json!(outputs);
        report["steps"] = json!(traj.steps);
        report["residual"] = json!(traj.residual);
        ode_outputs = Some(outputs);
    }
    if let Some(o) = &analytic {
        report["analytic_outputs"] = json!(o);
    }
    let shown = analytic.clone().or_else(|| ode_outputs.clone()).unwrap_or_default();
    report["rendered"] = json!(render_outputs(&shown));
    if let Some(p) = ctx.out_path(match ctx.g.format {
        Format::Json => "simulate.json",
        Format::Csv => "simulate.csv",
    }) {
        std::fs::write(&p, render(&report, ctx.g.format)?).map_err(|e| Error::io(&p, e))?;
    }
    writeln!(stdout, "{}", render_outputs(&shown)).map_err(|e| Error::io("<stdout>", e))?;
    if let (Some(an), Some(od)) = (&analytic, &ode_outputs) {
        for (j, (x, y)) in an.iter().zip(od).enumerate() {
            if (x - y).abs() > 1e-3 * x.abs().max(1.0) {
                return Err(Error::Disagreement(format!("output {j}: analytic {x}, ode {y}")));
            }
        }
    }
    Ok(())
}

fn write_trajectory(path: &Path, traj: &oscnet_core::dynamics::Trajectory) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    csvio::write_trajectory(std::io::BufWriter::new(f), traj)
}

fn convolve(ctx: &Ctx<'_>, a: &ConvolveArgs, stdout: &mut dyn Write) -> Result<()> {
    let img = pgm::read(&a.image)?;
    let kernel = match &a.kernel {
        Some(p) => KernelSpec::parse(&read_text(p)?)?,
        None => KernelSpec::Gaussian { size: a.size, sigma: a.sigma },
    }
    .kernel()?;
    let border = match a.border {
        Border::Renormalize => BorderRule::Renormalize,
        Border::Reflect => BorderRule::Reflect,
        Border::Zero => BorderRule::ZeroPad,
    };
    let out = pgm::Greymap { pixels: convolve_image(&img.pixels, &kernel, border)?, maxval: img.maxval };
    let bytes = pgm::encode(&out, !a.ascii);
    match ctx.out_path("convolved.pgm") {
        Some(p) => {
            std::fs::write(&p, &bytes).map_err(|e| Error::io(&p, e))?;
            ctx.log(format!("wrote {}", p.display()));
        }
        None => stdout.write_all(&bytes).map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(())
}

struct Loaded {
    train: LabeledDataset,
    test: LabeledDataset,
    source: Value,
    manifest_files: Option<(PathBuf, Vec<PathBuf>)>,
}

fn parse_synthetic(spec: &str) -> Result<(usize, usize, usize, f64)> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let bad = || Error::Usage(format!("--synthetic expects K,N_PER,DIM,SPREAD, got {spec:?}"));
    if parts.len() != 4 {
        return Err(bad());
    }
    Ok((
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
        parts[2].parse().map_err(|_| bad())?,
        parts[3].parse().map_err(|_| bad())?,
    ))
}

fn load_data(ctx: &Ctx<'_>, d: &DataArgs) -> Result<Loaded> {
    let seed = ctx.g.seed;
    let mut loaded = if let Some(spec) = &d.synthetic {
        let (k, n, dim, spread) = parse_synthetic(spec)?;
        let all = synth_clusters(k, 2 * n, dim, spread, seed)?;
        let (even, odd): (Vec<usize>, Vec<usize>) = (0..all.len()).partition(|i| i % 2 == 0);
        Loaded {
            train: all.subset(&even),
            test: all.subset(&odd),
            source: json!({ "synthetic": spec }),
            manifest_files: None,
        }
    } else {
        let dir = d.data_dir.clone().unwrap_or_else(mnist::default_data_dir);
        ctx.log(format!("loading MNIST from {}", dir.display()));
        let (ti, tl) = mnist::split_paths(&dir, Split::Train)?;
        let (si, sl) = mnist::split_paths(&dir, Split::Test)?;
        Loaded {
            train: mnist::load_mnist(&ti, &tl)?,
            test: mnist::load_mnist(&si, &sl)?,
            source: json!({ "mnist": dir.display().to_string() }),
            manifest_files: Some((dir, vec![ti, tl, si, sl])),
        }
    };
    if let Some(n) = d.limit {
        loaded.train = loaded.train.head(n);
    }
    if let Some(n) = d.test_limit {
        loaded.test = loaded.test.head(n);
    }
    Ok(loaded)
}

fn manifest_for(command: &str, ctx: &Ctx<'_>, params: Value, data: Option<&Loaded>) -> Result<RunManifest> {
    let m = RunManifest::new(command, ctx.g.seed, params);
    match data.and_then(|d| d.manifest_files.as_ref()) {
        Some((dir, files)) if ctx.g.out.is_some() => m.with_dataset(dir, files),
        _ => Ok(m),
    }
}

fn hebbian_config(a: &TrainArgs) -> HebbianConfig {
    HebbianConfig {
        lr: LrSchedule { start: a.lr_start, end: a.lr_end },
        lambda: a.lambda,
        loser_residual: match a.loser {
            LoserArg::Winner => LoserResidual::WinnerResponse,
            LoserArg::Own => LoserResidual::OwnResponse,
        },
        column_norm: if a.no_column_norm { ColumnNorm::None } else { ColumnNorm::Simplex },
        init: match a.init {
            InitArg::Samples => Init::default(),
            InitArg::Uniform => Init::Uniform,
        },
    }
}

fn train(ctx: &Ctx<'_>, a: &TrainArgs, stdout: &mut dyn Write) -> Result<()> {
    let data = load_data(ctx, &a.data)?;
    let seed = ctx.g.seed;
    let labels = data.train.labels()?;
    let report = match a.variant {
        Variant::Hebbian => {
            let m = *a.hidden.first().ok_or_else(|| Error::Usage("--hidden needs a value".into()))?;
            let epochs = a.epochs.unwrap_or(experiments::DEFAULT_EPOCHS);
            let cfg = hebbian_config(a);
            ctx.log(format!("hebbian: m={m}, epochs={epochs}, rows={}", data.train.len()));
            let state = experiments::train_hebbian(&data.train, m, epochs, &cfg, seed)?;
            let winners = parallel::hebbian_winners(&state, &data.train.features)?;
            if let Some(p) = ctx.out_path("checkpoint.json") {
                artifact::save(&p, &TrainStateFile::from(&state))?;
            }
            json!({
                "variant": "hebbian",
                "data": data.source,
                "hidden": m,
                "epochs": epochs,
                "lambda": a.lambda,
                "lr": [a.lr_start, a.lr_end],
                "train_rows": data.train.len(),
                "train_purity": eval::purity(&winners, labels, m, data.train.n_classes),
            })
        }
        Variant::Autoencoder => {
            let cfg = AeConfig { epochs: a.epochs.unwrap_or(AeConfig::default().epochs), lr: a.lr, batch: a.batch };
            ctx.log(format!("autoencoder: hidden={:?}, epochs={}", a.hidden, cfg.epochs));
            let ae = experiments::train_ae(&data.train, &a.hidden, &cfg, seed)?;
            let codes = parallel::ae_codes(&ae, &data.train.features)?;
            let winners = oscnet_core::hebbian::winners_of(&codes);
            if let Some(p) = ctx.out_path("checkpoint.json") {
                artifact::save(&p, &AutoencoderFile::new(&ae, seed))?;
            }
            json!({
                "variant": "autoencoder",
                "data": data.source,
                "dims": ae.dims(),
                "epochs": cfg.epochs,
                "lr": cfg.lr,
                "batch": cfg.batch,
                "train_rows": data.train.len(),
                "train_loss": ae.loss(&data.train.features)?,
                "train_purity": eval::purity(&winners, labels, ae.code_size(), data.train.n_classes),
            })
        }
    };
    let manifest = manifest_for("train", ctx, serde_json::to_value(a)?, Some(&data))?;
    ctx.finish("train", report, manifest, stdout)
}

fn evaluate(ctx: &Ctx<'_>, a: &EvalArgs, stdout: &mut dyn Write) -> Result<()> {
    let text = read_text(&a.checkpoint)?;
    let kind = artifact::peek_kind(&text)?;
    let data = load_data(ctx, &a.data)?;
    let head_cfg = HeadConfig { l2: a.l2, iters: a.iters, ..HeadConfig::default() };
    let (train_act, test_act) = if kind == TrainStateFile::KIND {
        let state = TrainState::try_from(artifact::from_json::<TrainStateFile>(&text)?)?;
        (
            parallel::hebbian_responses(&state, &data.train.features)?,
            parallel::hebbian_responses(&state, &data.test.features)?,
        )
    } else if kind == AutoencoderFile::KIND {
        let ae = oscnet_core::baseline::Autoencoder::try_from(artifact::from_json::<AutoencoderFile>(&text)?)?;
        (parallel::ae_codes(&ae, &data.train.features)?, parallel::ae_codes(&ae, &data.test.features)?)
    } else {
        return Err(Error::format("artifact", format!("cannot evaluate a {kind:?} artifact")));
    };
    let accuracy = match a.protocol {
        Protocol::Unsupervised => experiments::activation_accuracy(&train_act, &data.train, &test_act, &data.test)?,
        Protocol::Finetune => {
            let (head, acc) = experiments::head_accuracy(&train_act, &data.train, &test_act, &data.test, &head_cfg)?;
            if let Some(p) = ctx.out_path("head.json") {
                artifact::save(&p, &HeadFile::from(&head))?;
            }
            acc
        }
    };
    let report = json!({
        "checkpoint_kind": kind,
        "protocol": format!("{:?}", a.protocol).to_lowercase(),
        "data": data.source,
        "train_rows": data.train.len(),
        "test_rows": data.test.len(),
        "accuracy": accuracy,
    });
    let manifest = manifest_for("eval", ctx, serde_json::to_value(a)?, Some(&data))?;
    ctx.finish("eval", report, manifest, stdout)
}

fn kmeans(ctx: &Ctx<'_>, a: &KmeansArgs, stdout: &mut dyn Write) -> Result<()> {
    let data = load_data(ctx, &a.data)?;
    let variant = match a.variant {
        KmeansArg::Oscnet => KMeansVariant::Oscnet,
        KmeansArg::Euclidean => KMeansVariant::Euclidean,
    };
    let fit = experiments::fit_kmeans(&data.train, variant, a.k, a.iters, ctx.g.seed)?;
    let accuracy = experiments::kmeans_accuracy(&fit, &data.train, &data.test)?;
    if let Some(p) = ctx.out_path("clusters.json") {
        artifact::save(&p, &ClusterFile::new(&fit.model, ctx.g.seed))?;
    }
    let report = json!({
        "variant": format!("{:?}", a.variant).to_lowercase(),
        "data": data.source,
        "k": a.k,
        "iterations": fit.iterations,
        "objective": fit.objective.last(),
        "accuracy": accuracy,
    });
    let manifest = manifest_for("kmeans", ctx, serde_json::to_value(a)?, Some(&data))?;
    ctx.finish("kmeans", report, manifest, stdout)
}

fn regress(ctx: &Ctx<'_>, a: &RegressArgs, stdout: &mut dyn Write) -> Result<()> {
    let table = csvio::read_table(&a.data)?;
    let (x, y) = csvio::features_and_target(&table)?;
    let report = match a.method {
        RegressMethod::Closed => {
            if x.cols() != 1 || a.intercept {
                return Err(Error::Usage("--method closed fits y = k·x: one feature column, no intercept".into()));
            }
            let col = x.column(0);
            let k = solve_single(&col, &y)?;
            let potts = solve_single_potts(&col, &y)?;
            json!({ "method": "closed", "features": &table.header[..1], "theta": [k], "potts_theta": [potts] })
        }
        RegressMethod::Coord => {
            let p = RegressionProblem::new(x, y, a.intercept)?;
            let order = match a.order {
                OrderArg::Cyclic => Order::Cyclic,
                OrderArg::Random => Order::RandomPermutation(ctx.g.seed),
            };
            let cfg = CoordinateDescentConfig { max_sweeps: a.max_sweeps, tol: a.tol, order };
            let fit = coordinate_descent(&p, &cfg)?;
            let mut names: Vec<String> = Vec::new();
            if a.intercept {
                names.push("intercept".into());
            }
            names.extend(table.header[..table.header.len() - 1].iter().cloned());
            json!({
                "method": "coord",
                "features": names,
                "theta": fit.theta,
                "sweeps": fit.sweeps,
                "mse": fit.loss_history.last(),
            })
        }
    };
    if let Some(p) = ctx.out_path("theta.json") {
        std::fs::write(&p, serde_json::to_string_pretty(&report)? + "\n").map_err(|e| Error::io(&p, e))?;
    }
    let manifest = manifest_for("regress", ctx, serde_json::to_value(a)?, None)?;
    ctx.finish("regress", report, manifest, stdout)
}

fn retina_cmd(ctx: &Ctx<'_>, a: &RetinaArgs, stdout: &mut dyn Write) -> Result<()> {
    let seed = ctx.g.seed;
    let grid = (a.grid, a.grid);
    if a.cells < a.grid * a.grid {
        ctx.log(format!("warning: {} cells for {} pixels", a.cells, a.grid * a.grid));
    }
    let mut world = retina::build_world(grid, a.cells, a.blur, seed)?;
    let untrained = retina::evaluate_straight_line(&world)?;
    let cfg = DevelopConfig {
        lr: LrSchedule { start: a.lr_start, end: a.lr_end },
        lambda: a.lambda,
        candidates: a.candidates,
        mode: match a.update {
            UpdateArg::Frame => UpdateMode::PerFrame,
            UpdateArg::Wave => UpdateMode::PerWave,
        },
        wave: WaveParams { sigma: a.wave_sigma, speed: a.speed, ..WaveParams::default() },
    };
    if a.export_waves > 0 {
        if let Some(dir) = ctx.out_path("frames") {
            export_waves(&dir, grid, &cfg.wave, seed, a.export_waves)?;
        }
    }
    let marks: Vec<usize> =
        if a.checkpoints { (1..=4).map(|q| a.waves * q / 4).filter(|&w| w > 0).collect() } else { Vec::new() };
    ctx.log(format!("developing {} waves", a.waves));
    let cps = retina::develop(&mut world, a.waves, &cfg, seed, &marks)?;
    let trained = retina::evaluate_straight_line(&world)?;
    if let Some(p) = ctx.out_path("world.json") {
        artifact::save(&p, &RetinaFile::from(&world))?;
    }
    let report = json!({
        "grid": a.grid,
        "cells": a.cells,
        "n_waves": a.waves,
        "candidates": a.candidates,
        "untrained": { "mse": untrained.mse, "correlation": untrained.correlation },
        "trained": { "mse": trained.mse, "correlation": trained.correlation },
        "checkpoints": cps.iter().map(|c| json!({ "waves": c.waves, "mse": c.score.mse, "correlation": c.score.correlation })).collect::<Vec<_>>(),
    });
    let manifest = manifest_for("retina", ctx, serde_json::to_value(a)?, None)?;
    ctx.finish("retina", report, manifest, stdout)
}

/// Same wave stream as training.
fn export_waves(dir: &Path, grid: (usize, usize), params: &WaveParams, seed: u64, n: usize) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut r = oscnet_core::rng::stream(seed, oscnet_core::rng::WAVES);
    for w in 0..n {
        let wave = retina::generate_wave(grid, params, &mut r)?;
        for (f, frame) in wave.frames.iter().enumerate() {
            let img =
                pgm::Greymap { pixels: oscnet_core::Matrix::from_vec(grid.0, grid.1, frame.clone())?, maxval: 255 };
            pgm::write(&dir.join(format!("wave{w:04}_frame{f:03}.pgm")), &img, true)?;
        }
    }
    Ok(())
}
