//! Motor/powertrain loss model.
//!
//! Motor input power is a speed-dependent quadratic in output power:
//! `h⁻¹(m) = β₂m² + β₁m + β₀`. The forward map `h` is the increasing branch
//! of its inverse.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Loss-map coefficients `(β₀, β₁, β₂)` at one motor speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossCoefficients {
    /// W
    pub beta0: f64,
    pub beta1: f64,
    /// 1/W
    pub beta2: f64,
}

impl LossCoefficients {
    pub const IDENTITY: LossCoefficients = LossCoefficients {
        beta0: 0.0,
        beta1: 1.0,
        beta2: 0.0,
    };

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.beta1 > 0.0) || !(self.beta2 >= 0.0) || !self.beta0.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "loss map coefficients",
                value: self.beta2,
            });
        }
        Ok(())
    }

    /// Lower edge of the invertible domain of `h⁻¹`, `-β₁/(2β₂)`.
    pub fn domain_min(&self) -> f64 {
        if self.beta2 == 0.0 {
            f64::NEG_INFINITY
        } else {
            -self.beta1 / (2.0 * self.beta2)
        }
    }

    /// Vertex value `β₀ - β₁²/(4β₂)`: the smallest electrical power the
    /// powertrain can accept.
    pub fn range_min(&self) -> f64 {
        if self.beta2 == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.beta0 - self.beta1 * self.beta1 / (4.0 * self.beta2)
        }
    }
}

/// Electrical power drawn to deliver mechanical power `m`.
pub fn inverse_powertrain_loss(m: f64, beta: &LossCoefficients) -> Result<f64, ModelError> {
    let lo = beta.domain_min();
    if m < lo {
        return Err(ModelError::Domain {
            what: "inverse_powertrain_loss",
            value: m,
            limit: lo,
        });
    }
    Ok((beta.beta2 * m + beta.beta1) * m + beta.beta0)
}

/// Mechanical power delivered for electrical input `x`.
pub fn powertrain_loss(x: f64, beta: &LossCoefficients) -> Result<f64, ModelError> {
    let lo = beta.range_min();
    if x < lo {
        return Err(ModelError::Range {
            what: "powertrain_loss",
            value: x,
            limit: lo,
        });
    }
    let q = x - beta.beta0;
    // β₂ → 0 limit of the quadratic formula is the affine map (x - β₀)/β₁.
    // Otherwise use the rationalized root 2q / (β₁ + √(β₁² + 4β₂q)), which
    // reduces to that limit smoothly.
    let disc = (beta.beta1 * beta.beta1 + 4.0 * beta.beta2 * q).max(0.0);
    let denom = beta.beta1 + disc.sqrt();
    if denom == 0.0 {
        // only reachable at the vertex itself
        return Ok(beta.domain_min());
    }
    Ok(2.0 * q / denom)
}

/// Electrical power limits `(e̲, ē)` imposed by the motor at speed `omega`.
pub fn powertrain_bounds(
    omega: f64,
    beta: &LossCoefficients,
    torque_min: f64,
    torque_max: f64,
) -> (f64, f64) {
    let lower = beta.range_min().max(torque_min * omega);
    let upper = torque_max * omega;
    (lower, upper)
}

/// Speed-dependent loss map `ω ↦ (β₀, β₁, β₂)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MotorMap {
    /// `β₂ = a₂/(1 + ω/ω₀)`, `β₁ = 1 + a₁ω`, `β₀ = a₀ω`.
    Synthetic {
        a2: f64,
        omega0: f64,
        a1: f64,
        a0: f64,
    },
    /// Rows sorted by speed, linearly interpolated and clamped at the ends.
    Table(Vec<MotorMapRow>),
}

impl Default for MotorMap {
    fn default() -> Self {
        MotorMap::Synthetic {
            a2: 2e-6,
            omega0: 100.0,
            a1: 2e-4,
            a0: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorMapRow {
    #[serde(rename = "omega_radps")]
    pub omega: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl MotorMap {
    pub fn from_rows(mut rows: Vec<MotorMapRow>) -> Result<Self, ModelError> {
        if rows.is_empty() {
            return Err(ModelError::MotorMap("motor map has no rows".into()));
        }
        rows.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        for w in rows.windows(2) {
            if w[0].omega == w[1].omega {
                return Err(ModelError::MotorMap(format!(
                    "duplicate speed {} in motor map",
                    w[0].omega
                )));
            }
        }
        for r in &rows {
            let c = LossCoefficients {
                beta0: r.beta0,
                beta1: r.beta1,
                beta2: r.beta2,
            };
            if !(c.beta2 > 0.0 && c.beta1 > 0.0) {
                return Err(ModelError::MotorMap(format!(
                    "row at omega={} needs beta1 > 0 and beta2 > 0",
                    r.omega
                )));
            }
        }
        Ok(MotorMap::Table(rows))
    }

    /// Reads `omega_radps,beta0,beta1,beta2` rows.
    pub fn from_csv_path(path: &Path) -> Result<Self, ModelError> {
        let mut rdr = csv::Reader::from_path(path)
            .map_err(|e| ModelError::MotorMap(format!("{}: {e}", path.display())))?;
        let rows = rdr
            .deserialize::<MotorMapRow>()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ModelError::MotorMap(format!("{}: {e}", path.display())))?;
        Self::from_rows(rows)
    }

    pub fn coefficients(&self, omega: f64) -> LossCoefficients {
        match self {
            MotorMap::Synthetic { a2, omega0, a1, a0 } => LossCoefficients {
                beta0: a0 * omega,
                beta1: 1.0 + a1 * omega,
                beta2: a2 / (1.0 + omega / omega0),
            },
            MotorMap::Table(rows) => {
                let first = rows[0];
                let last = rows[rows.len() - 1];
                let pick = |r: MotorMapRow| LossCoefficients {
                    beta0: r.beta0,
                    beta1: r.beta1,
                    beta2: r.beta2,
                };
                if omega <= first.omega {
                    return pick(first);
                }
                if omega >= last.omega {
                    return pick(last);
                }
                let i = rows.partition_point(|r| r.omega <= omega);
                let (lo, hi) = (rows[i - 1], rows[i]);
                let s = (omega - lo.omega) / (hi.omega - lo.omega);
                let lerp = |a: f64, b: f64| a + s * (b - a);
                LossCoefficients {
                    beta0: lerp(lo.beta0, hi.beta0),
                    beta1: lerp(lo.beta1, hi.beta1),
                    beta2: lerp(lo.beta2, hi.beta2),
                }
            }
        }
    }
}

/// Motor torque limits together with its loss map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorParams {
    /// Nm
    pub torque_min: f64,
    /// Nm
    pub torque_max: f64,
    pub map: MotorMap,
}

impl Default for MotorParams {
    fn default() -> Self {
        MotorParams {
            torque_min: -250.0,
            torque_max: 250.0,
            map: MotorMap::default(),
        }
    }
}
