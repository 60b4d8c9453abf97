//! Battery-stress metrics and controller comparison tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("metrics need a non-empty trajectory")]
    Empty,
    #[error("u and v lengths differ ({u} vs {v})")]
    LengthMismatch { u: usize, v: usize },
    #[error("invalid sample period {0}")]
    InvalidSamplePeriod(f64),
    #[error("baseline {metric} is zero, improvement undefined")]
    ZeroBaseline { metric: &'static str },
    #[error("unknown controller {0}")]
    UnknownController(String),
}

/// Summary of one controller on one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// RMS battery power (W).
    pub rms_u: f64,
    /// Peak `|u|` (W).
    pub peak_u: f64,
    /// `Σ|u|·Δt` (J).
    pub throughput_u: f64,
    /// `Σ(u+v)·Δt` (J).
    pub energy: f64,
}

impl Metrics {
    pub const NAMES: [&'static str; 4] = ["rms_u", "peak_u", "throughput_u", "energy"];

    pub fn values(&self) -> [f64; 4] {
        [self.rms_u, self.peak_u, self.throughput_u, self.energy]
    }

    /// Component-wise mean.
    pub fn mean(items: &[Metrics]) -> Result<Metrics, MetricsError> {
        if items.is_empty() {
            return Err(MetricsError::Empty);
        }
        let n = items.len() as f64;
        let sum = |f: fn(&Metrics) -> f64| items.iter().map(f).sum::<f64>() / n;
        Ok(Metrics {
            rms_u: sum(|m| m.rms_u),
            peak_u: sum(|m| m.peak_u),
            throughput_u: sum(|m| m.throughput_u),
            energy: sum(|m| m.energy),
        })
    }
}

pub fn compute_metrics(u: &[f64], v: &[f64], dt: f64) -> Result<Metrics, MetricsError> {
    if u.len() != v.len() {
        return Err(MetricsError::LengthMismatch { u: u.len(), v: v.len() });
    }
    if u.is_empty() {
        return Err(MetricsError::Empty);
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(MetricsError::InvalidSamplePeriod(dt));
    }
    let n = u.len() as f64;
    Ok(Metrics {
        rms_u: (u.iter().map(|x| x * x).sum::<f64>() / n).sqrt(),
        peak_u: u.iter().fold(0.0, |m, x| m.max(x.abs())),
        throughput_u: u.iter().map(|x| x.abs()).sum::<f64>() * dt,
        energy: u.iter().zip(v).map(|(a, b)| a + b).sum::<f64>() * dt,
    })
}

/// Signed percentage change `100·(candidate − baseline)/baseline`.
pub fn improvement(baseline: f64, candidate: f64) -> Result<f64, MetricsError> {
    if baseline == 0.0 {
        return Err(MetricsError::ZeroBaseline { metric: "value" });
    }
    Ok(100.0 * (candidate - baseline) / baseline)
}

/// Metrics for several controllers, compared against the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rows: Vec<(String, Metrics)>,
}

impl MetricsReport {
    pub fn new() -> Self {
        MetricsReport { rows: Vec::new() }
    }

    pub fn push(&mut self, controller: impl Into<String>, metrics: Metrics) {
        self.rows.push((controller.into(), metrics));
    }

    pub fn get(&self, controller: &str) -> Option<&Metrics> {
        self.rows.iter().find(|(name, _)| name == controller).map(|(_, m)| m)
    }

    /// Per-metric percentage change of `controller` relative to `baseline`.
    pub fn improvements(&self, baseline: &str, controller: &str) -> Result<[f64; 4], MetricsError> {
        let base = self
            .get(baseline)
            .ok_or_else(|| MetricsError::UnknownController(baseline.to_string()))?;
        let cand = self
            .get(controller)
            .ok_or_else(|| MetricsError::UnknownController(controller.to_string()))?;
        let (b, c) = (base.values(), cand.values());
        let mut out = [0.0; 4];
        for i in 0..4 {
            if b[i] == 0.0 {
                return Err(MetricsError::ZeroBaseline { metric: Metrics::NAMES[i] });
            }
            out[i] = 100.0 * (c[i] - b[i]) / b[i];
        }
        Ok(out)
    }

    /// Component-wise mean over reports that list the same controllers.
    pub fn mean(reports: &[MetricsReport]) -> Result<MetricsReport, MetricsError> {
        let first = reports.first().ok_or(MetricsError::Empty)?;
        let mut out = MetricsReport::new();
        for (name, _) in &first.rows {
            let items = reports
                .iter()
                .map(|r| r.get(name).copied().ok_or_else(|| MetricsError::UnknownController(name.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            out.push(name.clone(), Metrics::mean(&items)?);
        }
        Ok(out)
    }

    /// Fixed-width table in kW and MJ. Rows after the first also show the
    /// percentage change relative to the first row, to one decimal.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14}{:>22}{:>22}{:>22}{:>22}",
            "controller", "rms(u) kW", "peak(u) kW", "sum|u| MJ", "sum(u+v) MJ"
        );
        let base = self.rows.first().map(|(_, m)| m.values());
        for (row, (name, m)) in self.rows.iter().enumerate() {
            let _ = write!(out, "{name:<14}");
            for (i, (val, scale)) in m.values().iter().zip([1e3, 1e3, 1e6, 1e6]).enumerate() {
                let pct = match base {
                    Some(b) if row > 0 && b[i] != 0.0 => {
                        format!(" ({:+.1}%)", 100.0 * (val - b[i]) / b[i])
                    }
                    _ => String::new(),
                };
                let _ = write!(out, "{:>22}", format!("{:.1}{pct}", val / scale));
            }
            out.push('\n');
        }
        out
    }

    /// JSON object keyed by controller name, in row order.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (name, m) in &self.rows {
            map.insert(name.clone(), serde_json::to_value(m).expect("metrics serialize"));
        }
        serde_json::Value::Object(map)
    }
}

impl Default for MetricsReport {
    fn default() -> Self {
        Self::new()
    }
}
