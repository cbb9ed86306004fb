//! Problem instance, cost functions, recharge model and schedules.
//!
//! Locations are indexed `0..=S`; index [`BASE`] is the base station and
//! `1..=S` are sensor nodes. Per-SN vectors (AoI, timestamps, cost
//! functions) are indexed `0..S`, so SN `s` lives at position `s - 1`.

mod cost;
mod schedule;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use cost::{CostFn, CostKind};
pub use schedule::{compare_actions, Action, Schedule};

use crate::{Error, Result};

/// Location index of the base station.
pub const BASE: usize = 0;

/// Linear charging, capped at the battery capacity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RechargeSpec {
    /// Energy units credited per slot spent at the base station.
    pub rate_per_slot: f64,
    /// Shortest stay that charges at all.
    #[serde(default = "default_min_slots")]
    pub min_slots: u32,
}

fn default_min_slots() -> u32 {
    1
}

impl RechargeSpec {
    pub fn new(rate_per_slot: f64) -> Self {
        Self {
            rate_per_slot,
            min_slots: 1,
        }
    }

    /// `g(w)`: energy gained by staying `slots` slots starting from `current`.
    pub fn credit(&self, current: f64, capacity: f64, slots: u32) -> f64 {
        self.charged(current, capacity, slots) - current
    }

    /// Battery level after staying `slots` slots. Stays shorter than
    /// `min_slots` do not charge.
    pub fn charged(&self, current: f64, capacity: f64, slots: u32) -> f64 {
        if slots < self.min_slots {
            return current;
        }
        (current + self.rate_per_slot * f64::from(slots))
            .min(capacity)
            .max(current)
    }
}

/// The full scheduling problem on a slotted timeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub num_sns: usize,
    /// Minutes per slot.
    #[serde(rename = "slot_len_min")]
    pub slot_len: f64,
    pub horizon_slots: u32,
    /// `(S+1)×(S+1)` travel times in slots, row-major, index 0 = BS.
    pub travel_slots: Vec<Vec<u32>>,
    /// `(S+1)×(S+1)` travel energies.
    pub travel_energy: Vec<Vec<f64>>,
    pub battery_capacity: f64,
    pub recharge: RechargeSpec,
    /// One per SN, `cost_fns[s - 1]` belongs to SN `s`.
    pub cost_fns: Vec<CostFn>,
}

/// A broken instance invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NoSensorNodes,
    ZeroHorizon,
    NonPositiveSlotLength(f64),
    NonPositiveBattery(f64),
    MatrixShape {
        matrix: &'static str,
        expected: usize,
    },
    NonZeroDiagonal {
        index: usize,
        value: u32,
    },
    ZeroTravel {
        from: usize,
        to: usize,
    },
    InvalidEnergy {
        from: usize,
        to: usize,
        value: f64,
    },
    CostFnCount {
        expected: usize,
        found: usize,
    },
    InvalidRecharge(String),
    /// No round trip base → SN → base fits into the horizon and battery.
    NoFeasibleTrip,
}

impl Violation {
    /// Whether solvers can still run on an instance with this violation.
    /// An instance without any feasible trip is still solvable: the UAV just
    /// stays at the base station.
    pub fn is_structural(&self) -> bool {
        !matches!(self, Violation::NoFeasibleTrip)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoSensorNodes => write!(f, "num_sns: at least one SN is required"),
            Violation::ZeroHorizon => write!(f, "horizon_slots: must be at least 1"),
            Violation::NonPositiveSlotLength(v) => write!(f, "slot_len_min: {v} is not positive"),
            Violation::NonPositiveBattery(v) => write!(f, "battery_capacity: {v} is not positive"),
            Violation::MatrixShape { matrix, expected } => {
                write!(f, "{matrix}: expected a {expected}x{expected} matrix")
            }
            Violation::NonZeroDiagonal { index, value } => {
                write!(
                    f,
                    "travel_slots[{index}][{index}]: diagonal must be 0, found {value}"
                )
            }
            Violation::ZeroTravel { from, to } => {
                write!(
                    f,
                    "travel_slots[{from}][{to}]: distinct locations need at least 1 slot"
                )
            }
            Violation::InvalidEnergy { from, to, value } => {
                write!(
                    f,
                    "travel_energy[{from}][{to}]: {value} is negative or not finite"
                )
            }
            Violation::CostFnCount { expected, found } => {
                write!(f, "cost_fns: expected {expected} entries, found {found}")
            }
            Violation::InvalidRecharge(msg) => write!(f, "recharge: {msg}"),
            Violation::NoFeasibleTrip => write!(f, "no feasible trip within horizon and battery"),
        }
    }
}

impl Instance {
    pub fn num_locations(&self) -> usize {
        self.num_sns + 1
    }

    #[inline]
    pub fn travel(&self, from: usize, to: usize) -> u32 {
        self.travel_slots[from][to]
    }

    #[inline]
    pub fn energy(&self, from: usize, to: usize) -> f64 {
        self.travel_energy[from][to]
    }

    /// Cost function of SN `sn` (1-based).
    pub fn cost_fn(&self, sn: usize) -> &CostFn {
        &self.cost_fns[sn - 1]
    }

    /// Guard for flying `from → to` (an SN) at `slot` with `battery` left:
    /// the UAV must still be able to reach the base station from `to`
    /// within the horizon and on the remaining energy.
    pub fn can_visit(&self, from: usize, to: usize, slot: u32, battery: f64) -> bool {
        to != BASE
            && to != from
            && slot + self.travel(from, to) + self.travel(to, BASE) <= self.horizon_slots
            && self.energy(from, to) + self.energy(to, BASE) <= battery
    }

    /// Guard for flying `from → BS` at `slot` with `battery` left.
    pub fn can_return(&self, from: usize, slot: u32, battery: f64) -> bool {
        from != BASE
            && slot + self.travel(from, BASE) <= self.horizon_slots
            && self.energy(from, BASE) <= battery
    }

    /// Guard for charging `slots` slots at the base station from `slot`.
    pub fn can_charge(&self, slot: u32, slots: u32) -> bool {
        slots >= self.recharge.min_slots && slot + slots <= self.horizon_slots
    }

    /// Every invariant violation; empty means the instance is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.num_locations();
        if self.num_sns == 0 {
            out.push(Violation::NoSensorNodes);
        }
        if self.horizon_slots == 0 {
            out.push(Violation::ZeroHorizon);
        }
        if !(self.slot_len > 0.0 && self.slot_len.is_finite()) {
            out.push(Violation::NonPositiveSlotLength(self.slot_len));
        }
        if !(self.battery_capacity > 0.0 && self.battery_capacity.is_finite()) {
            out.push(Violation::NonPositiveBattery(self.battery_capacity));
        }
        if !(self.recharge.rate_per_slot >= 0.0 && self.recharge.rate_per_slot.is_finite()) {
            out.push(Violation::InvalidRecharge(format!(
                "rate_per_slot {} must be a non-negative number",
                self.recharge.rate_per_slot
            )));
        }
        if self.recharge.min_slots == 0 {
            out.push(Violation::InvalidRecharge(
                "min_slots must be at least 1".into(),
            ));
        }
        if self.cost_fns.len() != self.num_sns {
            out.push(Violation::CostFnCount {
                expected: self.num_sns,
                found: self.cost_fns.len(),
            });
        }

        let slots_ok =
            self.travel_slots.len() == n && self.travel_slots.iter().all(|r| r.len() == n);
        let energy_ok =
            self.travel_energy.len() == n && self.travel_energy.iter().all(|r| r.len() == n);
        if !slots_ok {
            out.push(Violation::MatrixShape {
                matrix: "travel_slots",
                expected: n,
            });
        }
        if !energy_ok {
            out.push(Violation::MatrixShape {
                matrix: "travel_energy",
                expected: n,
            });
        }
        if slots_ok {
            for i in 0..n {
                for j in 0..n {
                    let t = self.travel_slots[i][j];
                    if i == j && t != 0 {
                        out.push(Violation::NonZeroDiagonal { index: i, value: t });
                    } else if i != j && t == 0 {
                        out.push(Violation::ZeroTravel { from: i, to: j });
                    }
                }
            }
        }
        if energy_ok {
            for (i, row) in self.travel_energy.iter().enumerate() {
                for (j, &e) in row.iter().enumerate() {
                    if !(e >= 0.0 && e.is_finite()) {
                        out.push(Violation::InvalidEnergy {
                            from: i,
                            to: j,
                            value: e,
                        });
                    }
                }
            }
        }

        if out.is_empty() {
            let feasible =
                (1..=self.num_sns).any(|s| self.can_visit(BASE, s, 0, self.battery_capacity));
            if !feasible {
                out.push(Violation::NoFeasibleTrip);
            }
        }
        out
    }

    /// Rejects instances that solvers cannot run on. Unlike
    /// [`Instance::validate`] this accepts instances without a feasible trip.
    pub fn check(&self) -> Result<()> {
        let structural: Vec<_> = self
            .validate()
            .into_iter()
            .filter(Violation::is_structural)
            .collect();
        if structural.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(structural))
        }
    }
}

/// Converts travel times in minutes to whole slots by rounding up. The
/// diagonal is forced to 0.
pub fn quantize(travel_minutes: &[Vec<f64>], slot_len: f64) -> Result<Vec<Vec<u32>>> {
    if !(slot_len > 0.0 && slot_len.is_finite()) {
        return Err(Error::NonPositiveSlotLength(slot_len));
    }
    travel_minutes
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &m)| {
                    if !(m >= 0.0 && m.is_finite()) {
                        return Err(Error::InvalidTravelTime {
                            row: i,
                            col: j,
                            value: m,
                        });
                    }
                    Ok(if i == j { 0 } else { ceil_slots(m / slot_len) })
                })
                .collect()
        })
        .collect()
}

// Ratios that are integers up to floating-point noise (1.1 / 0.1) must not
// round up to the next slot.
fn ceil_slots(q: f64) -> u32 {
    let nearest = q.round();
    if (q - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as u32
    } else {
        q.ceil() as u32
    }
}
