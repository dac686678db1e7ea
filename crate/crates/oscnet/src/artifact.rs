//! Versioned JSON artifacts. Every file carries `kind` and `version`;
//! loading fails on a mismatch of either. Matrices are stored row-major.

use std::path::Path;

use oscnet_core::baseline::Autoencoder;
use oscnet_core::hebbian::{ClusterModel, ColumnNorm, LinearHead, LoserResidual, Metric, TrainState};
use oscnet_core::mimo::{gaussian_kernel, ConvolutionKernel, MimoNetwork};
use oscnet_core::retina::RetinaWorld;
use oscnet_core::Matrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const VERSION: u32 = 1;

pub trait Artifact: Serialize + DeserializeOwned {
    const KIND: &'static str;
}

pub fn to_json<T: Artifact>(a: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(a)? + "\n")
}

pub fn from_json<T: Artifact>(text: &str) -> Result<T> {
    let v: Value = serde_json::from_str(text)?;
    check_header(&v, T::KIND)?;
    Ok(serde_json::from_value(v)?)
}

fn check_header(v: &Value, kind: &'static str) -> Result<()> {
    let found_kind = v.get("kind").and_then(Value::as_str).unwrap_or("<missing>");
    if found_kind != kind {
        return Err(Error::format("artifact", format!("expected kind {kind:?}, found {found_kind:?}")));
    }
    let version = v.get("version").and_then(Value::as_u64).unwrap_or(0) as u32;
    if version != VERSION {
        return Err(Error::UnsupportedVersion { kind, found: version, supported: VERSION });
    }
    Ok(())
}

/// The `kind` field of an artifact file, if any.
pub fn peek_kind(text: &str) -> Result<String> {
    let v: Value = serde_json::from_str(text)?;
    Ok(v.get("kind").and_then(Value::as_str).unwrap_or_default().to_owned())
}

pub fn save<T: Artifact>(path: &Path, a: &T) -> Result<()> {
    std::fs::write(path, to_json(a)?).map_err(|e| Error::io(path, e))
}

pub fn load<T: Artifact>(path: &Path) -> Result<T> {
    from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Matrix> {
    Ok(Matrix::from_vec(rows, cols, data)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoserResidualRepr {
    Winner,
    Own,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnNormRepr {
    Simplex,
    None,
}

/// Hebbian weights `W` (`n × m`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainStateFile {
    pub kind: String,
    pub version: u32,
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    pub seed: u64,
    pub epoch: usize,
    pub loser_residual: LoserResidualRepr,
    pub column_norm: ColumnNormRepr,
    pub weights: Vec<f64>,
}

impl Artifact for TrainStateFile {
    const KIND: &'static str = "hebbian";
}

impl From<&TrainState> for TrainStateFile {
    fn from(s: &TrainState) -> Self {
        TrainStateFile {
            kind: Self::KIND.into(),
            version: VERSION,
            n: s.n_inputs(),
            m: s.n_units(),
            lambda: s.lambda,
            seed: s.rng_seed,
            epoch: s.epoch,
            loser_residual: match s.loser_residual {
                LoserResidual::WinnerResponse => LoserResidualRepr::Winner,
                LoserResidual::OwnResponse => LoserResidualRepr::Own,
            },
            column_norm: match s.column_norm {
                ColumnNorm::Simplex => ColumnNormRepr::Simplex,
                ColumnNorm::None => ColumnNormRepr::None,
            },
            weights: s.weights().into_vec(),
        }
    }
}

impl TryFrom<TrainStateFile> for TrainState {
    type Error = Error;
    fn try_from(f: TrainStateFile) -> Result<Self> {
        let mut s = TrainState::from_weights(&matrix(f.n, f.m, f.weights)?, f.lambda, f.seed)?;
        s.epoch = f.epoch;
        s.loser_residual = match f.loser_residual {
            LoserResidualRepr::Winner => LoserResidual::WinnerResponse,
            LoserResidualRepr::Own => LoserResidual::OwnResponse,
        };
        s.column_norm = match f.column_norm {
            ColumnNormRepr::Simplex => ColumnNorm::Simplex,
            ColumnNormRepr::None => ColumnNorm::None,
        };
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadFile {
    pub kind: String,
    pub version: u32,
    pub inputs: usize,
    pub classes: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Artifact for HeadFile {
    const KIND: &'static str = "linear_head";
}

impl From<&LinearHead> for HeadFile {
    fn from(h: &LinearHead) -> Self {
        HeadFile {
            kind: Self::KIND.into(),
            version: VERSION,
            inputs: h.n_inputs(),
            classes: h.n_classes(),
            weights: h.weights.as_slice().to_vec(),
            bias: h.bias.clone(),
        }
    }
}

impl TryFrom<HeadFile> for LinearHead {
    type Error = Error;
    fn try_from(f: HeadFile) -> Result<Self> {
        Ok(LinearHead::new(matrix(f.inputs, f.classes, f.weights)?, f.bias)?)
    }
}

/// Layer `l` is stored `dims[l] × dims[l+1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderFile {
    pub kind: String,
    pub version: u32,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Artifact for AutoencoderFile {
    const KIND: &'static str = "autoencoder";
}

impl AutoencoderFile {
    pub fn new(ae: &Autoencoder, seed: u64) -> Self {
        AutoencoderFile {
            kind: Self::KIND.into(),
            version: VERSION,
            seed,
            dims: ae.dims().to_vec(),
            weights: ae.weights.iter().map(|w| w.as_slice().to_vec()).collect(),
            biases: ae.biases.clone(),
        }
    }
}

impl TryFrom<AutoencoderFile> for Autoencoder {
    type Error = Error;
    fn try_from(f: AutoencoderFile) -> Result<Self> {
        if f.weights.len() + 1 != f.dims.len() {
            return Err(Error::format("artifact", "autoencoder layer count does not match dims"));
        }
        let weights =
            f.dims.windows(2).zip(f.weights).map(|(d, w)| matrix(d[0], d[1], w)).collect::<Result<Vec<_>>>()?;
        Ok(Autoencoder::from_parts(f.dims, weights, f.biases)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricRepr {
    Cosine,
    Euclidean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterFile {
    pub kind: String,
    pub version: u32,
    pub seed: u64,
    pub metric: MetricRepr,
    pub k: usize,
    pub dim: usize,
    pub centers: Vec<f64>,
}

impl Artifact for ClusterFile {
    const KIND: &'static str = "clusters";
}

impl ClusterFile {
    pub fn new(m: &ClusterModel, seed: u64) -> Self {
        ClusterFile {
            kind: Self::KIND.into(),
            version: VERSION,
            seed,
            metric: match m.metric {
                Metric::Cosine => MetricRepr::Cosine,
                Metric::Euclidean => MetricRepr::Euclidean,
            },
            k: m.k(),
            dim: m.dim(),
            centers: m.centers().as_slice().to_vec(),
        }
    }
}

impl TryFrom<ClusterFile> for ClusterModel {
    type Error = Error;
    fn try_from(f: ClusterFile) -> Result<Self> {
        let metric = match f.metric {
            MetricRepr::Cosine => Metric::Cosine,
            MetricRepr::Euclidean => Metric::Euclidean,
        };
        Ok(ClusterModel::new(matrix(f.k, f.dim, f.centers)?, metric)?)
    }
}

/// Transmission is not stored; it is rebuilt from positions and blur.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetinaFile {
    pub kind: String,
    pub version: u32,
    pub grid: [usize; 2],
    pub blur_sigma: f64,
    pub seed: u64,
    pub positions: Vec<[f64; 2]>,
    pub lgn: TrainStateFile,
}

impl Artifact for RetinaFile {
    const KIND: &'static str = "retina_world";
}

impl From<&RetinaWorld> for RetinaFile {
    fn from(w: &RetinaWorld) -> Self {
        RetinaFile {
            kind: Self::KIND.into(),
            version: VERSION,
            grid: [w.grid.0, w.grid.1],
            blur_sigma: w.blur_sigma,
            seed: w.seed,
            positions: w.positions.clone(),
            lgn: w.lgn_state().into(),
        }
    }
}

impl TryFrom<RetinaFile> for RetinaWorld {
    type Error = Error;
    fn try_from(f: RetinaFile) -> Result<Self> {
        check_header(&serde_json::to_value(&f.lgn)?, TrainStateFile::KIND)?;
        let lgn = TrainState::try_from(f.lgn)?;
        Ok(RetinaWorld::from_parts((f.grid[0], f.grid[1]), f.positions, f.blur_sigma, f.seed, lgn)?)
    }
}

/// MIMO network: `weights` is `n_inputs × n_outputs`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub weights: Vec<f64>,
}

impl NetSpec {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn network(&self) -> Result<MimoNetwork> {
        Ok(MimoNetwork::new(matrix(self.n_inputs, self.n_outputs, self.weights.clone())?)?)
    }
}

impl From<&MimoNetwork> for NetSpec {
    fn from(n: &MimoNetwork) -> Self {
        NetSpec { n_inputs: n.n_inputs(), n_outputs: n.n_outputs(), weights: n.weights().as_slice().to_vec() }
    }
}

/// Either a Gaussian `{size, sigma}` or explicit `{taps, anchor?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelSpec {
    Gaussian { size: usize, sigma: f64 },
    Taps { taps: Vec<Vec<f64>>, anchor: Option<[usize; 2]> },
}

impl KernelSpec {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn kernel(&self) -> Result<ConvolutionKernel> {
        match self {
            KernelSpec::Gaussian { size, sigma } => Ok(gaussian_kernel(*size, *sigma)?),
            KernelSpec::Taps { taps, anchor } => {
                let m = Matrix::from_rows(taps)?;
                Ok(match anchor {
                    Some([r, c]) => ConvolutionKernel::new(m, (*r, *c))?,
                    None => ConvolutionKernel::centered(m)?,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_and_kind_are_enforced() {
        let w = Matrix::from_rows(&[[0.5, 0.1], [0.5, 0.9]]).unwrap();
        let s = TrainState::from_weights(&w, 0.01, 7).unwrap();
        let text = to_json(&TrainStateFile::from(&s)).unwrap();
        assert_eq!(peek_kind(&text).unwrap(), "hebbian");
        let back: TrainStateFile = from_json(&text).unwrap();
        assert_eq!(TrainState::try_from(back).unwrap(), s);
        let bumped = text.replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(from_json::<TrainStateFile>(&bumped), Err(Error::UnsupportedVersion { found: 2, .. })));
        assert!(from_json::<HeadFile>(&text).is_err());
    }

    #[test]
    fn kernel_specs() {
        let g = KernelSpec::parse(r#"{"size": 3, "sigma": 1.0}"#).unwrap();
        assert_eq!(g.kernel().unwrap(), gaussian_kernel(3, 1.0).unwrap());
        let t = KernelSpec::parse(r#"{"taps": [[1.0]]}"#).unwrap();
        assert_eq!(t.kernel().unwrap().anchor(), (0, 0));
        assert!(KernelSpec::parse(r#"{"taps": [[1.0, -1.0]]}"#).unwrap().kernel().is_err());
    }
}
