//! Independent reference computations built on nalgebra.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use oscnet_core::linalg::Matrix;
use oscnet_core::retina::{pearson, straight_lines, LineScore, RetinaWorld};

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// Straight-line score of the least-squares linear decoder `P⁺`, with
/// singular values below `1e-12·σ_max` treated as zero. `P` is rank
/// deficient whenever a pixel has no cell within reach of the blur.
pub fn pinv_ceiling(world: &RetinaWorld) -> LineScore {
    let p = to_na(&world.transmission);
    let sigma_max = p.clone().svd(false, false).singular_values.max();
    let pinv = p.clone().pseudo_inverse(1e-12 * sigma_max).expect("svd");
    let decoder = pinv * &p;
    let lines = straight_lines(world.grid);
    let (mut mse, mut corr) = (0.0, 0.0);
    for l in &lines {
        let rec = &decoder * DVector::from_column_slice(l);
        mse += rec.iter().zip(l).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / l.len() as f64;
        corr += pearson(rec.as_slice(), l);
    }
    let n = lines.len() as f64;
    LineScore { mse: mse / n, correlation: corr / n }
}
