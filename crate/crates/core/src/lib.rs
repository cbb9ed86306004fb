//! Age-of-information (AoI) optimal scheduling of a single UAV that collects
//! data from sensor nodes (SNs) and delivers it to a base station (BS), with
//! a limited, rechargeable battery.
//!
//! The crate is organised around one slotted timeline shared by every solver:
//!
//! * [`model`] holds the problem instance, cost functions and schedules.
//! * [`aoi`] does AoI bookkeeping and is the single cost evaluator
//!   ([`aoi::replay`]) that every solver's output is judged by.
//! * [`labeling`] and [`dominance`] implement the label-setting search over
//!   the time-expanded graph, with a per-cell label capacity `K`.
//! * [`greedy`] is the baseline heuristic.
//! * [`symmetric`] solves the equidistant, common-cost special case.
//! * [`oracle`] enumerates every slotted schedule on small instances.
//! * [`instances`] builds random and Hamiltonian-path-reduction instances.

pub mod aoi;
pub mod dominance;
mod error;
pub mod greedy;
pub mod instances;
pub mod labeling;
pub mod model;
pub mod oracle;
pub mod symmetric;

pub use error::{Error, Result};
pub use model::{Action, CostFn, CostKind, Instance, RechargeSpec, Schedule, Violation, BASE};

/// A schedule together with the report produced by replaying it.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct Solution {
    pub schedule: Schedule,
    pub report: aoi::RunReport,
}

impl Solution {
    pub fn cost(&self) -> f64 {
        self.report.cumulative_cost
    }
}
