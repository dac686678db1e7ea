//! Value ↔ phase and weight ↔ coupling encodings.
//!
//! A real value `x` rides on an oscillator as `θ = arctan x` and is read
//! back as `tan θ`. Because `tan` has period π, a phase and its antipode
//! decode to the same value; the readout never needs to know which of the
//! two stationary points a network settled in.

use alloc::vec::Vec;

use crate::math::{self, FRAC_PI_2, PI, TAU};
use crate::{Error, Result};

/// Distance from ±π/2 (mod π) below which [`decode_value`] refuses to
/// evaluate `tan`.
pub const SINGULAR_EPS: f64 = 1e-9;

/// An oscillator phase in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Phase(pub f64);

impl Phase {
    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    /// The phase in units of π (`0.5` is a quarter turn).
    pub fn in_pi(self) -> f64 {
        self.0 / PI
    }

    /// Wraps into `[-π, π)`. Phases already in range are returned untouched,
    /// which makes the operation exactly idempotent.
    pub fn normalized(self) -> Phase {
        Phase(normalize_radians(self.0))
    }
}

pub fn normalize_radians(p: f64) -> f64 {
    if (-PI..PI).contains(&p) || !p.is_finite() {
        return p;
    }
    let mut r = math::fmod(p + PI, TAU);
    if r < 0.0 {
        r += TAU;
    }
    let out = r - PI;
    if out >= PI {
        -PI
    } else {
        out
    }
}

/// A signed, dimensionless coupling strength between two oscillators.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Coupling(pub f64);

impl Coupling {
    #[inline]
    pub fn strength(self) -> f64 {
        self.0
    }
}

/// Input oscillators ready to drive one output: phases plus the couplings
/// into that output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EncodedInput {
    pub phases: Vec<Phase>,
    pub couplings: Vec<Coupling>,
}

impl EncodedInput {
    /// Encodes inputs `x` with abstract weights `w` (one coupling per input).
    pub fn new(weights: &[f64], inputs: &[f64]) -> Result<Self> {
        if weights.len() != inputs.len() {
            return Err(Error::DimensionMismatch {
                what: "weights vs inputs",
                expected: inputs.len(),
                found: weights.len(),
            });
        }
        let mut phases = Vec::with_capacity(inputs.len());
        let mut couplings = Vec::with_capacity(inputs.len());
        for (&w, &x) in weights.iter().zip(inputs) {
            let (p, j) = encode_coupling(w, x)?;
            phases.push(p);
            couplings.push(j);
        }
        Ok(EncodedInput { phases, couplings })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

fn check_finite(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidValue { what, value })
    }
}

/// `θ = arctan x`, strictly inside `(-π/2, π/2)`.
pub fn encode_value(x: f64) -> Result<Phase> {
    check_finite("value", x)?;
    Ok(Phase(math::atan(x)))
}

/// `tan θ`. Works for any phase (π-periodic), but refuses phases within
/// [`SINGULAR_EPS`] of `±π/2 + kπ`.
pub fn decode_value(p: Phase) -> Result<f64> {
    let r = p.0;
    check_finite("phase", r)?;
    // distance to the nearest pole of tan
    let mut off = math::fmod(r - FRAC_PI_2, PI);
    if off < 0.0 {
        off += PI;
    }
    if off < SINGULAR_EPS || PI - off < SINGULAR_EPS {
        return Err(Error::NearSingularPhase { radians: r });
    }
    Ok(math::tan(r))
}

/// Encodes input `x` with abstract weight `w`: returns `(arctan x, w·√(x²+1))`,
/// so that `J·cos θ = w` and `J·sin θ = w·x`.
pub fn encode_coupling(w: f64, x: f64) -> Result<(Phase, Coupling)> {
    check_finite("weight", w)?;
    let theta = encode_value(x)?;
    Ok((theta, Coupling(w * math::hypot(x, 1.0))))
}
