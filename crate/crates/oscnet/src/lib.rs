//! File formats, MNIST loading, parallel evaluation and the `oscnet`
//! command line on top of [`oscnet_core`].

pub mod artifact;
pub mod cli;
pub mod csvio;
mod error;
pub mod experiments;
pub mod idx;
pub mod manifest;
pub mod mnist;
pub mod parallel;
pub mod pgm;

pub use error::{Error, Result};
pub use oscnet_core as core;
