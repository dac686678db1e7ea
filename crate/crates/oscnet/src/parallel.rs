//! Row-parallel evaluation. Rows are processed in fixed chunks and
//! reassembled in order, so results do not depend on the thread count.

use oscnet_core::baseline::Autoencoder;
use oscnet_core::hebbian::{self, TrainState};
use oscnet_core::Matrix;
use rayon::prelude::*;

use crate::error::Result;

const CHUNK: usize = 512;

/// Caps the global pool. Later calls are ignored.
pub fn configure_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

pub fn map_rows<F>(m: &Matrix, f: F) -> Result<Matrix>
where
    F: Fn(&Matrix) -> oscnet_core::Result<Matrix> + Sync,
{
    let starts: Vec<usize> = (0..m.rows()).step_by(CHUNK).collect();
    let parts = starts
        .par_iter()
        .map(|&s| {
            let idx: Vec<usize> = (s..(s + CHUNK).min(m.rows())).collect();
            f(&m.select_rows(&idx))
        })
        .collect::<oscnet_core::Result<Vec<Matrix>>>()?;
    let cols = parts.first().map_or(0, Matrix::cols);
    let mut data = Vec::with_capacity(m.rows() * cols);
    for p in parts {
        data.extend(p.into_vec());
    }
    Ok(Matrix::from_vec(m.rows(), cols, data)?)
}

pub fn hebbian_responses(state: &TrainState, features: &Matrix) -> Result<Matrix> {
    map_rows(features, |b| hebbian::responses(state, b))
}

pub fn hebbian_winners(state: &TrainState, features: &Matrix) -> Result<Vec<usize>> {
    Ok(hebbian::winners_of(&hebbian_responses(state, features)?))
}

pub fn ae_codes(ae: &Autoencoder, features: &Matrix) -> Result<Matrix> {
    map_rows(features, |b| ae.encode(b))
}
