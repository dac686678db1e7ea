//! CSV tables: regression data, plain matrices and trajectories.

use std::io::Write;
use std::path::Path;

use oscnet_core::dynamics::Trajectory;
use oscnet_core::Matrix;

use crate::error::{Error, Result};

/// Header plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Matrix,
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_table_from(file)
}

pub fn read_table_from<R: std::io::Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let mut data = Vec::new();
    let mut n = 0;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (col, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::format("csv", format!("row {}, column {}: {field:?} is not a number", line + 1, col + 1))
            })?;
            data.push(v);
        }
        n += 1;
    }
    Ok(Table { rows: Matrix::from_vec(n, header.len(), data)?, header })
}

/// Splits a table into features (all but the last column) and the target.
pub fn features_and_target(t: &Table) -> Result<(Matrix, Vec<f64>)> {
    let cols = t.rows.cols();
    if cols < 2 {
        return Err(Error::format("csv", "need at least one feature column and a target column"));
    }
    let mut x = Matrix::zeros(t.rows.rows(), cols - 1);
    let mut y = Vec::with_capacity(t.rows.rows());
    for (i, r) in t.rows.row_iter().enumerate() {
        x.row_mut(i).copy_from_slice(&r[..cols - 1]);
        y.push(r[cols - 1]);
    }
    Ok((x, y))
}

pub fn write_table<W: Write>(w: W, header: &[String], rows: &Matrix) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header)?;
    for r in rows.row_iter() {
        wr.write_record(r.iter().map(|v| v.to_string()))?;
    }
    wr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// `t,theta_0,…,theta_{n-1},energy`, one line per recorded state.
pub fn write_trajectory<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    let n = traj.states.first().map_or(0, |s| s.0.len());
    let mut header = vec!["t".to_owned()];
    header.extend((0..n).map(|i| format!("theta_{i}")));
    header.push("energy".to_owned());
    let mut data = Vec::with_capacity(traj.states.len() * (n + 2));
    for ((t, s), e) in traj.times.iter().zip(&traj.states).zip(&traj.energies) {
        data.push(*t);
        data.extend_from_slice(&s.0);
        data.push(*e);
    }
    write_table(w, &header, &Matrix::from_vec(traj.states.len(), n + 2, data)?)
}
