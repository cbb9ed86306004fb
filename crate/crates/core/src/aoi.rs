//! AoI bookkeeping and cost accounting.
//!
//! Time is counted in whole slots; an AoI of `k` slots costs
//! `f(k * slot_len)`. Cost is charged at the end of every elapsed slot, so a
//! horizon of `N` slots charges `N` terms per SN and slot 0 is free.
//!
//! [`interval_cost`] and [`delivery_cost`] are the only two ways cost is ever
//! accumulated. The labeling search, the greedy heuristic and [`replay`] all
//! go through them, so a schedule's cost is reproduced bit for bit no matter
//! which of them computes it.

use serde::{Deserialize, Serialize};

use crate::model::{Action, CostFn, Instance, Schedule, BASE};
use crate::{Error, Result};

/// Per-SN timestamps at a given slot.
///
/// `delivered[i]` (`u`) is the slot of the freshest information about SN
/// `i + 1` held by the base station, `collected[i]` (`z`) the slot of the
/// freshest information on board the UAV.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AoiState {
    pub slot: u32,
    pub delivered: Vec<u32>,
    pub collected: Vec<u32>,
}

impl AoiState {
    pub fn new(num_sns: usize) -> Self {
        Self {
            slot: 0,
            delivered: vec![0; num_sns],
            collected: vec![0; num_sns],
        }
    }

    /// State at the base station right after a delivery, given the AoI
    /// vector in slots.
    pub fn at_base(slot: u32, aoi: &[u32]) -> Self {
        let stamps: Vec<u32> = aoi.iter().map(|&a| slot - a).collect();
        Self {
            slot,
            delivered: stamps.clone(),
            collected: stamps,
        }
    }

    /// `a(s) = n - u(s)`, in slots.
    pub fn aoi(&self) -> Vec<u32> {
        self.delivered.iter().map(|&u| self.slot - u).collect()
    }

    /// `â(s) = n - z(s)`, in slots.
    pub fn shadow_aoi(&self) -> Vec<u32> {
        self.collected.iter().map(|&z| self.slot - z).collect()
    }

    pub fn advance(&mut self, slots: u32) {
        self.slot += slots;
    }

    /// Records collection from SN `sn` (1-based) at the current slot.
    pub fn collect(&mut self, sn: usize) {
        self.collected[sn - 1] = self.slot;
    }

    /// Hands everything on board to the base station. Returns the SNs whose
    /// information got fresher, with their collection slots.
    pub fn deliver(&mut self) -> Vec<(usize, u32)> {
        let mut fresh = Vec::new();
        for (i, (u, &z)) in self.delivered.iter_mut().zip(&self.collected).enumerate() {
            if z > *u {
                fresh.push((i + 1, z));
                *u = z;
            }
        }
        fresh
    }
}

/// `Σ_s f_s((a(s) + offset) · τ)`: cost of one slot.
#[inline]
pub fn slot_cost(aoi: &[u32], offset: u32, fns: &[CostFn], slot_len: f64) -> f64 {
    aoi.iter().zip(fns).fold(0.0, |acc, (&a, f)| {
        acc + f.eval(f64::from(a + offset) * slot_len)
    })
}

/// Cost of `slots` slots in which every AoI grows and nothing is delivered:
/// `Σ_{i=1..slots} Σ_s f_s(a(s) + iτ)`.
pub fn interval_cost(aoi: &[u32], slots: u32, fns: &[CostFn], slot_len: f64) -> f64 {
    (1..=slots).fold(0.0, |acc, i| acc + slot_cost(aoi, i, fns, slot_len))
}

/// Cost of a `travel`-slot flight ending with a delivery at the base station.
/// AoIs grow for `travel - 1` slots; the arrival slot is charged at the
/// post-delivery AoI `delivered`.
pub fn delivery_cost(
    aoi: &[u32],
    travel: u32,
    delivered: &[u32],
    fns: &[CostFn],
    slot_len: f64,
) -> f64 {
    debug_assert!(travel >= 1);
    interval_cost(aoi, travel - 1, fns, slot_len) + slot_cost(delivered, 0, fns, slot_len)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeliveryEvent {
    pub slot: u32,
    pub sn: usize,
    pub collected_slot: u32,
}

/// Result of evaluating a schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub cumulative_cost: f64,
    /// `cumulative_cost / (S · N)`.
    pub normalized_cost: f64,
    /// Cost charged at slots `1..=N`.
    pub slot_costs: Vec<f64>,
    /// Battery level at the end of slots `1..=N`.
    pub battery: Vec<f64>,
    /// AoI in minutes charged at slots `1..=N`, one row per slot.
    pub aoi: Vec<Vec<f64>>,
    pub deliveries: Vec<DeliveryEvent>,
}

#[derive(Clone, Debug, Default)]
struct Trace {
    slot_costs: Vec<f64>,
    battery: Vec<f64>,
    aoi: Vec<Vec<f64>>,
    deliveries: Vec<DeliveryEvent>,
}

/// Steps a UAV through a schedule one action at a time, enforcing every
/// schedule invariant and accumulating cost.
#[derive(Clone, Debug)]
pub struct Simulator<'a> {
    instance: &'a Instance,
    state: AoiState,
    location: usize,
    battery: f64,
    cost: f64,
    actions: Vec<Action>,
    trace: Option<Trace>,
}

impl<'a> Simulator<'a> {
    /// UAV at the base station, slot 0, full battery, all AoIs zero.
    pub fn new(instance: &'a Instance) -> Self {
        Self {
            instance,
            state: AoiState::new(instance.num_sns),
            location: BASE,
            battery: instance.battery_capacity,
            cost: 0.0,
            actions: Vec::new(),
            trace: Some(Trace::default()),
        }
    }

    /// UAV at the base station at `slot` with the given battery and AoI
    /// vector (slots). Cost starts at zero.
    pub fn at_base(instance: &'a Instance, slot: u32, battery: f64, aoi: &[u32]) -> Self {
        Self {
            instance,
            state: AoiState::at_base(slot, aoi),
            location: BASE,
            battery,
            cost: 0.0,
            actions: Vec::new(),
            trace: None,
        }
    }

    /// Drops per-slot tracing; only the cost is tracked.
    pub fn untraced(mut self) -> Self {
        self.trace = None;
        self
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn slot(&self) -> u32 {
        self.state.slot
    }

    pub fn location(&self) -> usize {
        self.location
    }

    pub fn battery(&self) -> f64 {
        self.battery
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn state(&self) -> &AoiState {
        &self.state
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn apply(&mut self, action: &Action) -> Result<f64> {
        let index = self.actions.len();
        if action.start_slot() != self.state.slot {
            return Err(Error::NonContiguous {
                index,
                expected: self.state.slot,
                found: action.start_slot(),
            });
        }
        match *action {
            Action::Fly { from, to, .. } => {
                if from != self.location {
                    return Err(Error::WrongLocation {
                        index,
                        expected: self.location,
                        found: from,
                    });
                }
                self.fly(to)
            }
            Action::Charge { slots, .. } => self.charge(slots),
        }
    }

    /// Flies from the current location to `to`; arriving at the base station
    /// delivers everything on board.
    pub fn fly(&mut self, to: usize) -> Result<f64> {
        let index = self.actions.len();
        let inst = self.instance;
        if to >= inst.num_locations() || to == self.location {
            return Err(Error::IllegalAction {
                index,
                reason: format!("cannot fly from {} to {to}", self.location),
            });
        }
        let start = self.state.slot;
        let travel = inst.travel(self.location, to);
        if start + travel > inst.horizon_slots {
            return Err(Error::HorizonOverflow {
                slot: start,
                horizon: inst.horizon_slots,
            });
        }
        let needed = inst.energy(self.location, to);
        if self.battery - needed < 0.0 {
            return Err(Error::BatteryUnderflow {
                slot: start,
                battery: self.battery,
                needed,
            });
        }
        self.battery -= needed;

        let aoi = self.state.aoi();
        let grown = if to == BASE { travel - 1 } else { travel };
        let mut slot_values: Vec<f64> = (1..=grown)
            .map(|i| slot_cost(&aoi, i, &inst.cost_fns, inst.slot_len))
            .collect();
        let mut increment = fold(&slot_values);
        self.record_growth(&aoi, 1..=grown);
        self.state.advance(travel);

        if to == BASE {
            let fresh = self.state.deliver();
            let after = self.state.aoi();
            let last = slot_cost(&after, 0, &inst.cost_fns, inst.slot_len);
            increment += last;
            slot_values.push(last);
            if let Some(trace) = &mut self.trace {
                trace.aoi.push(minutes(&after, 0, inst.slot_len));
                trace
                    .deliveries
                    .extend(fresh.into_iter().map(|(sn, z)| DeliveryEvent {
                        slot: start + travel,
                        sn,
                        collected_slot: z,
                    }));
            }
        } else {
            self.state.collect(to);
        }
        if let Some(trace) = &mut self.trace {
            trace.slot_costs.extend(slot_values);
            trace
                .battery
                .extend(std::iter::repeat_n(self.battery, travel as usize));
        }

        self.actions.push(Action::Fly {
            from: self.location,
            to,
            depart_slot: start,
        });
        self.location = to;
        self.cost += increment;
        Ok(increment)
    }

    /// Stays `slots` slots at the base station and recharges.
    pub fn charge(&mut self, slots: u32) -> Result<f64> {
        let index = self.actions.len();
        let inst = self.instance;
        let start = self.state.slot;
        if self.location != BASE {
            return Err(Error::IllegalAction {
                index,
                reason: format!("charging at SN {}", self.location),
            });
        }
        if slots < inst.recharge.min_slots {
            return Err(Error::ChargeTooShort {
                slot: start,
                slots,
                min_slots: inst.recharge.min_slots,
            });
        }
        if start + slots > inst.horizon_slots {
            return Err(Error::HorizonOverflow {
                slot: start,
                horizon: inst.horizon_slots,
            });
        }
        let aoi = self.state.aoi();
        let increment = self.age(&aoi, slots);
        let before = self.battery;
        self.battery = inst.recharge.charged(before, inst.battery_capacity, slots);
        if let Some(trace) = &mut self.trace {
            trace.battery.extend((1..=slots).map(|i| {
                if i == slots {
                    self.battery
                } else {
                    (before + inst.recharge.rate_per_slot * f64::from(i)).min(self.battery)
                }
            }));
        }
        self.state.advance(slots);
        self.actions.push(Action::Charge {
            slots,
            start_slot: start,
        });
        self.cost += increment;
        Ok(increment)
    }

    /// Idles at the base station until the horizon and produces the report.
    pub fn finish(mut self) -> Result<(Schedule, RunReport)> {
        if self.location != BASE {
            return Err(Error::EndsAwayFromBase(self.location));
        }
        let inst = self.instance;
        let rest = inst.horizon_slots - self.state.slot;
        let aoi = self.state.aoi();
        let increment = self.age(&aoi, rest);
        if let Some(trace) = &mut self.trace {
            trace
                .battery
                .extend(std::iter::repeat_n(self.battery, rest as usize));
        }
        self.cost += increment;
        self.state.advance(rest);

        let trace = self.trace.unwrap_or_default();
        let denom = inst.num_sns as f64 * f64::from(inst.horizon_slots);
        let report = RunReport {
            cumulative_cost: self.cost,
            normalized_cost: self.cost / denom,
            slot_costs: trace.slot_costs,
            battery: trace.battery,
            aoi: trace.aoi,
            deliveries: trace.deliveries,
        };
        Ok((Schedule::new(self.actions), report))
    }

    /// Cost of letting all AoIs grow `slots` slots, recorded in the trace.
    fn age(&mut self, aoi: &[u32], slots: u32) -> f64 {
        let inst = self.instance;
        let values: Vec<f64> = (1..=slots)
            .map(|i| slot_cost(aoi, i, &inst.cost_fns, inst.slot_len))
            .collect();
        self.record_growth(aoi, 1..=slots);
        if let Some(trace) = &mut self.trace {
            trace.slot_costs.extend(&values);
        }
        fold(&values)
    }

    fn record_growth(&mut self, aoi: &[u32], offsets: std::ops::RangeInclusive<u32>) {
        let slot_len = self.instance.slot_len;
        if let Some(trace) = &mut self.trace {
            trace.aoi.extend(offsets.map(|i| minutes(aoi, i, slot_len)));
        }
    }
}

// Same summation order as `interval_cost`.
fn fold(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |acc, v| acc + v)
}

fn minutes(aoi: &[u32], offset: u32, slot_len: f64) -> Vec<f64> {
    aoi.iter()
        .map(|&a| f64::from(a + offset) * slot_len)
        .collect()
}

/// Evaluates `schedule` on `instance` from the initial state (base station,
/// slot 0, full battery, all AoIs zero).
pub fn replay(schedule: &Schedule, instance: &Instance) -> Result<RunReport> {
    instance.check()?;
    let mut sim = Simulator::new(instance);
    for action in &schedule.actions {
        sim.apply(action)?;
    }
    sim.finish().map(|(_, report)| report)
}

/// Cost-only replay.
pub fn replay_cost(schedule: &Schedule, instance: &Instance) -> Result<f64> {
    let mut sim = Simulator::new(instance).untraced();
    for action in &schedule.actions {
        sim.apply(action)?;
    }
    sim.finish().map(|(_, report)| report.cumulative_cost)
}
