//! Controller output shared by the optimal solver and the baselines.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("trajectory csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("trajectory csv: row {row} has t = {found}, expected {row}")]
    NonMonotoneTime { row: usize, found: usize },
}

/// Per-step powers and post-step stored energies.
///
/// `x[t]` and `y[t]` are the energies after applying `u[t]` and `v[t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub d: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub b: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    t: usize,
    #[serde(rename = "d_W")]
    d: f64,
    #[serde(rename = "u_W")]
    u: f64,
    #[serde(rename = "v_W")]
    v: f64,
    #[serde(rename = "b_W")]
    b: f64,
    #[serde(rename = "x_J")]
    x: f64,
    #[serde(rename = "y_J")]
    y: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Writes `t,d_W,u_W,v_W,b_W,x_J,y_J` rows. Floats use shortest
    /// round-trip formatting, so reading back is lossless.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), TrajectoryError> {
        let mut wtr = csv::Writer::from_writer(writer);
        for t in 0..self.len() {
            wtr.serialize(Row {
                t,
                d: self.d[t],
                u: self.u[t],
                v: self.v[t],
                b: self.b[t],
                x: self.x[t],
                y: self.y[t],
            })?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, TrajectoryError> {
        let mut out = Trajectory {
            d: Vec::new(),
            u: Vec::new(),
            v: Vec::new(),
            b: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
        };
        for (i, row) in csv::Reader::from_reader(reader).deserialize::<Row>().enumerate() {
            let row = row?;
            if row.t != i {
                return Err(TrajectoryError::NonMonotoneTime { row: i, found: row.t });
            }
            out.d.push(row.d);
            out.u.push(row.u);
            out.v.push(row.v);
            out.b.push(row.b);
            out.x.push(row.x);
            out.y.push(row.y);
        }
        Ok(out)
    }
}
