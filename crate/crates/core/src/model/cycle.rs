use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::ModelError;

/// A uniformly sampled journey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveCycle {
    /// Sample period (s).
    pub dt: f64,
    /// m/s
    pub velocity: Vec<f64>,
    /// Road gradient (rad).
    pub gradient: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CycleRow {
    time_s: f64,
    velocity_mps: f64,
    gradient_rad: f64,
}

impl DriveCycle {
    pub fn new(dt: f64, velocity: Vec<f64>, gradient: Vec<f64>) -> Result<Self, ModelError> {
        if !(dt > 0.0) {
            return Err(ModelError::InvalidParameter { name: "sample period", value: dt });
        }
        if velocity.len() != gradient.len() {
            return Err(ModelError::LengthMismatch {
                expected: velocity.len(),
                found: gradient.len(),
            });
        }
        if velocity.len() < 3 {
            return Err(ModelError::SeriesTooShort { len: velocity.len(), min: 3 });
        }
        if let Some(&v) = velocity.iter().find(|v| !(**v >= 0.0)) {
            return Err(ModelError::InvalidParameter { name: "velocity", value: v });
        }
        Ok(DriveCycle { dt, velocity, gradient })
    }

    pub fn len(&self) -> usize {
        self.velocity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.velocity.is_empty()
    }

    /// First `n` samples.
    pub fn truncated(&self, n: usize) -> Result<Self, ModelError> {
        let n = n.min(self.len());
        Self::new(self.dt, self.velocity[..n].to_vec(), self.gradient[..n].to_vec())
    }

    /// Parses `time_s,velocity_mps,gradient_rad` rows at a fixed period.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, ModelError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let rows = rdr
            .deserialize::<CycleRow>()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ModelError::Csv(e.to_string()))?;
        if rows.len() < 3 {
            return Err(ModelError::SeriesTooShort { len: rows.len(), min: 3 });
        }
        let dt = rows[1].time_s - rows[0].time_s;
        if !(dt > 0.0) {
            return Err(ModelError::Csv("time column must be increasing".into()));
        }
        for (i, w) in rows.windows(2).enumerate() {
            let step = w[1].time_s - w[0].time_s;
            if (step - dt).abs() > 1e-9 * dt.max(1.0) {
                return Err(ModelError::Csv(format!(
                    "non-uniform time step at row {}: {step} s (expected {dt} s)",
                    i + 2
                )));
            }
        }
        let (velocity, gradient) = rows.iter().map(|r| (r.velocity_mps, r.gradient_rad)).unzip();
        Self::new(dt, velocity, gradient)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ModelError> {
        let mut wtr = csv::Writer::from_writer(writer);
        for (i, (&v, &g)) in self.velocity.iter().zip(&self.gradient).enumerate() {
            wtr.serialize(CycleRow {
                time_s: i as f64 * self.dt,
                velocity_mps: v,
                gradient_rad: g,
            })
            .map_err(|e| ModelError::Csv(e.to_string()))?;
        }
        wtr.flush().map_err(|e| ModelError::Csv(e.to_string()))?;
        Ok(())
    }
}
