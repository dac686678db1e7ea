//! Closed-form forward propagation through a multi-input multi-output
//! oscillator network.
//!
//! An output oscillator coupled to pinned inputs with strengths `J_i` settles
//! where `Σ J_i sin(θ − θ_i)` vanishes, i.e. at
//! `θ = atan2(Σ J_i sin θ_i, Σ J_i cos θ_i)` (or its antipode). With the
//! value/coupling encoding of [`crate::phase`], `tan θ` of that phase is the
//! weighted average `Σ w_i x_i / Σ w_i`. Outputs do not couple to each other,
//! so an `N × M` network is `M` independent single-output solves.

use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::math;
use crate::phase::{self, Coupling, EncodedInput, Phase};
use crate::{Error, Result};

/// `|Σ w| ≥ DEGENERACY_RATIO · Σ|w|` is required for a weighted average.
pub const DEGENERACY_RATIO: f64 = 1e-9;

/// A settled output oscillator: its phase and the value it decodes to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PottsOutput {
    pub phase: Phase,
    pub value: f64,
}

/// Minimizer of the single-output Potts energy for pinned input phases and
/// couplings.
///
/// The phase is taken with the two-argument arctangent. The value is
/// `tan θ`, evaluated as the ratio of the sine and cosine components so that
/// no precision is lost near `±π/2`.
pub fn potts_output(phases: &[Phase], couplings: &[Coupling]) -> Result<PottsOutput> {
    if phases.len() != couplings.len() {
        return Err(Error::DimensionMismatch {
            what: "phases vs couplings",
            expected: phases.len(),
            found: couplings.len(),
        });
    }
    let mut s = 0.0;
    let mut c = 0.0;
    let mut c_abs = 0.0;
    for (p, j) in phases.iter().zip(couplings) {
        let jc = j.0 * math::cos(p.0);
        s += j.0 * math::sin(p.0);
        c += jc;
        c_abs += jc.abs();
    }
    if !(c.abs() >= DEGENERACY_RATIO * c_abs) || c_abs == 0.0 {
        return Err(Error::DegenerateNormalization { column: None, sum: c, abs_sum: c_abs });
    }
    Ok(PottsOutput { phase: Phase(math::atan2(s, c)), value: s / c })
}

/// One output oscillator driven by inputs `x` through abstract weights `w`.
/// Numerically `Σ w_i x_i / Σ w_i`.
pub fn forward_single(weights: &[f64], inputs: &[f64]) -> Result<f64> {
    forward_single_output(weights, inputs).map(|o| o.value)
}

/// Like [`forward_single`] but also returns the settled phase.
pub fn forward_single_output(weights: &[f64], inputs: &[f64]) -> Result<PottsOutput> {
    let enc = EncodedInput::new(weights, inputs)?;
    potts_output(&enc.phases, &enc.couplings)
}

/// `N` inputs fully connected to `M` free outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoNetwork {
    /// `N × M`: entry `(i, j)` is the abstract weight from input `i` to output `j`.
    weights: Matrix,
}

impl MimoNetwork {
    pub fn new(weights: Matrix) -> Result<Self> {
        if let Some(&v) = weights.as_slice().iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidValue { what: "network weight", value: v });
        }
        Ok(MimoNetwork { weights })
    }

    pub fn n_inputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn n_outputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.weights.column(j)
    }

    /// Settled output phases and decoded values, one per output column.
    pub fn forward_outputs(&self, inputs: &[f64]) -> Result<Vec<PottsOutput>> {
        if inputs.len() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                what: "network inputs",
                expected: self.n_inputs(),
                found: inputs.len(),
            });
        }
        (0..self.n_outputs())
            .map(|j| {
                forward_single_output(&self.column(j), inputs).map_err(|e| match e {
                    Error::DegenerateNormalization { sum, abs_sum, .. } => {
                        Error::DegenerateNormalization { column: Some(j), sum, abs_sum }
                    }
                    other => other,
                })
            })
            .collect()
    }

    pub fn forward(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_outputs(inputs)?.into_iter().map(|o| o.value).collect())
    }
}

/// Convenience wrapper for [`MimoNetwork::forward`].
pub fn forward(net: &MimoNetwork, inputs: &[f64]) -> Result<Vec<f64>> {
    net.forward(inputs)
}

/// How windows that hang over the image edge are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BorderRule {
    /// Drop out-of-image taps; the weighted average renormalizes over the rest.
    #[default]
    Renormalize,
    /// Mirror indices about the edge pixel (`-1 → 1`).
    Reflect,
    /// Out-of-image pixels read as 0 but keep their tap weight.
    ZeroPad,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionKernel {
    taps: Matrix,
    anchor: (usize, usize),
}

impl ConvolutionKernel {
    pub fn new(taps: Matrix, anchor: (usize, usize)) -> Result<Self> {
        if taps.rows() == 0 || taps.cols() == 0 {
            return Err(Error::InvalidArgument("kernel must have at least one tap"));
        }
        if anchor.0 >= taps.rows() || anchor.1 >= taps.cols() {
            return Err(Error::InvalidArgument("kernel anchor outside the tap grid"));
        }
        if !taps.is_finite() {
            return Err(Error::InvalidValue { what: "kernel tap", value: f64::NAN });
        }
        let sum: f64 = taps.as_slice().iter().sum();
        let abs_sum: f64 = taps.as_slice().iter().map(|t| t.abs()).sum();
        if !(sum.abs() >= DEGENERACY_RATIO * abs_sum) || abs_sum == 0.0 {
            return Err(Error::DegenerateNormalization { column: None, sum, abs_sum });
        }
        Ok(ConvolutionKernel { taps, anchor })
    }

    /// Anchored at the center tap (`rows/2`, `cols/2`).
    pub fn centered(taps: Matrix) -> Result<Self> {
        let anchor = (taps.rows() / 2, taps.cols() / 2);
        Self::new(taps, anchor)
    }

    pub fn taps(&self) -> &Matrix {
        &self.taps
    }

    pub fn anchor(&self) -> (usize, usize) {
        self.anchor
    }
}

/// Square Gaussian kernel, not pre-normalized:
/// `exp(−((r−a)² + (c−a)²) / 2σ²)` with `a = size/2`.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<ConvolutionKernel> {
    if size % 2 == 0 {
        return Err(Error::InvalidArgument("gaussian kernel size must be odd"));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidValue { what: "gaussian sigma", value: sigma });
    }
    let a = (size / 2) as f64;
    let mut taps = Matrix::zeros(size, size);
    for r in 0..size {
        for c in 0..size {
            let d2 = (r as f64 - a) * (r as f64 - a) + (c as f64 - a) * (c as f64 - a);
            taps.set(r, c, math::exp(-d2 / (2.0 * sigma * sigma)));
        }
    }
    ConvolutionKernel::centered(taps)
}

fn reflect(mut i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    i = i.rem_euclid(period);
    if i >= n {
        i = period - i;
    }
    i as usize
}

/// Each output pixel is the oscillator readout of the taps overlapping its
/// window, i.e. the normalized correlation `Σ w I / Σ w`.
pub fn convolve_image(image: &Matrix, kernel: &ConvolutionKernel, border: BorderRule) -> Result<Matrix> {
    let (h, w) = (image.rows(), image.cols());
    if h == 0 || w == 0 {
        return Err(Error::InvalidArgument("image must be non-empty"));
    }
    let (kh, kw) = (kernel.taps.rows(), kernel.taps.cols());
    let (ar, ac) = (kernel.anchor.0 as isize, kernel.anchor.1 as isize);
    let mut out = Matrix::zeros(h, w);
    let mut weights = Vec::with_capacity(kh * kw);
    let mut pixels = Vec::with_capacity(kh * kw);
    for r in 0..h {
        for c in 0..w {
            weights.clear();
            pixels.clear();
            for kr in 0..kh {
                for kc in 0..kw {
                    let tap = kernel.taps.get(kr, kc);
                    let ir = r as isize + kr as isize - ar;
                    let ic = c as isize + kc as isize - ac;
                    let inside = ir >= 0 && ic >= 0 && (ir as usize) < h && (ic as usize) < w;
                    let px = match (inside, border) {
                        (true, _) => image.get(ir as usize, ic as usize),
                        (false, BorderRule::Renormalize) => continue,
                        (false, BorderRule::ZeroPad) => 0.0,
                        (false, BorderRule::Reflect) => image.get(reflect(ir, h), reflect(ic, w)),
                    };
                    weights.push(tap);
                    pixels.push(px);
                }
            }
            let v = forward_single(&weights, &pixels).map_err(|e| match e {
                Error::DegenerateNormalization { sum, abs_sum, .. } => {
                    Error::DegenerateNormalization { column: Some(r * w + c), sum, abs_sum }
                }
                other => other,
            })?;
            out.set(r, c, v);
        }
    }
    Ok(out)
}

/// Input encoding phases in units of π.
pub fn input_phases_in_pi(inputs: &[f64]) -> Result<Vec<f64>> {
    inputs.iter().map(|&x| phase::encode_value(x).map(|p| p.in_pi())).collect()
}

/// An `n × n` network whose column `j` has a single unit tap on input `j`.
pub fn identity_network(n: usize) -> MimoNetwork {
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        w.set(i, i, 1.0);
    }
    MimoNetwork { weights: w }
}
