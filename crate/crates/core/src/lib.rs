//! Energy-optimal power allocation between a battery and a supercapacitor
//! over a known demand horizon.
//!
//! The optimal controller solves a convex program over the whole journey with
//! an ADMM scheme whose per-iteration cost is linear in the horizon length.
//! Two rule-based controllers (all-battery and low-pass split) are provided
//! for comparison, along with battery-usage metrics.
//!
//! Typical flow:
//!
//! ```no_run
//! use powersplit::{admm, model, problem};
//!
//! let cycle = model::generate_cycle(model::CycleKind::Mixed, 900, 1);
//! let instance = problem::build_problem(
//!     &cycle,
//!     &model::VehicleParams::default(),
//!     &model::BatteryParams::default(),
//!     &model::SupercapParams::default(),
//!     &model::MotorParams::default(),
//! )
//! .unwrap();
//! let solution = admm::solve(&instance, &admm::AdmmSettings::default()).unwrap();
//! println!("{} iterations, J = {:.0} J", solution.iterations, solution.objective);
//! ```

pub mod admm;
pub mod banded;
pub mod baselines;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod problem;
pub mod roots;
pub mod trajectory;

pub use trajectory::Trajectory;
