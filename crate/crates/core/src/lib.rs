//! Oscillator-network (OscNet) numerics.
//!
//! Real values are carried as oscillator phases (`θ = arctan x`, read back as
//! `tan θ`), abstract weights become couplings (`J = w·√(x²+1)`), and a free
//! output oscillator coupled to pinned inputs settles to the phase whose
//! tangent is the weighted average of the inputs. Everything else in this
//! crate is built on that identity:
//!
//! * [`phase`]: value/phase and weight/coupling encodings.
//! * [`dynamics`]: Kuramoto phase flow, Lyapunov energy and an RK4 integrator.
//! * [`mimo`]: the closed-form output phase of a multi-input multi-output net
//!   and image convolution built on it.
//! * [`hebbian`]: winner-takes-all Hebbian training, cosine k-means and a
//!   supervised linear head.
//! * [`regression`]: single-variable Potts solve and coordinate descent.
//! * [`retina`]: retina to LGN development driven by retinal waves.
//! * [`baseline`]: backprop autoencoders and Euclidean k-means.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, IO and the
//! command line live in the `oscnet` crate.
#![no_std]
#![deny(rust_2018_idioms)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod baseline;
pub mod data;
pub mod dynamics;
mod error;
pub mod eval;
pub mod hebbian;
pub mod linalg;
pub mod math;
pub mod mimo;
pub mod phase;
pub mod regression;
pub mod retina;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use phase::{Coupling, EncodedInput, Phase};
