//! Exhaustive search over every slotted schedule, for small instances.
//!
//! The enumeration branches exactly like the labeling search (same charge
//! lengths, same return-feasibility guards) but keeps no state abstraction
//! and no memo: each complete schedule is evaluated from scratch with
//! [`replay`](crate::aoi::replay). It is the ground truth the heuristics are
//! tested against.

use std::cmp::Ordering;

use crate::aoi::{replay, replay_cost, Simulator};
use crate::labeling::SnSet;
use crate::model::{compare_actions, Action, Instance, Schedule, BASE};
use crate::{Error, Result, Solution};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_sns: usize,
    pub max_slots: u32,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_sns: 4,
            max_slots: 14,
        }
    }
}

impl OracleLimits {
    fn check(&self, instance: &Instance) -> Result<()> {
        if instance.num_sns > self.max_sns || instance.horizon_slots > self.max_slots {
            return Err(Error::OracleLimits {
                sns: instance.num_sns,
                slots: instance.horizon_slots,
                max_sns: self.max_sns,
                max_slots: self.max_slots,
            });
        }
        Ok(())
    }
}

/// Calls `visit` with every legal action sequence that starts at the base
/// station at `slot` with `battery` energy and ends at the base station.
/// The empty sequence is included. Sequences are produced in depth-first
/// order.
pub fn for_each_schedule(
    instance: &Instance,
    slot: u32,
    battery: f64,
    visit: &mut dyn FnMut(&[Action]),
) {
    let mut actions = Vec::new();
    let visited = SnSet::new(instance.num_sns);
    enumerate(instance, BASE, slot, battery, &visited, &mut actions, visit);
}

fn enumerate(
    inst: &Instance,
    location: usize,
    slot: u32,
    battery: f64,
    visited: &SnSet,
    actions: &mut Vec<Action>,
    visit: &mut dyn FnMut(&[Action]),
) {
    if location == BASE {
        visit(actions);
        for w in inst.recharge.min_slots..=inst.horizon_slots.saturating_sub(slot) {
            let charged = inst.recharge.charged(battery, inst.battery_capacity, w);
            actions.push(Action::Charge {
                slots: w,
                start_slot: slot,
            });
            enumerate(inst, BASE, slot + w, charged, visited, actions, visit);
            actions.pop();
        }
    } else if inst.can_return(location, slot, battery) {
        actions.push(Action::Fly {
            from: location,
            to: BASE,
            depart_slot: slot,
        });
        let empty = SnSet::new(inst.num_sns);
        enumerate(
            inst,
            BASE,
            slot + inst.travel(location, BASE),
            battery - inst.energy(location, BASE),
            &empty,
            actions,
            visit,
        );
        actions.pop();
    }
    for to in 1..=inst.num_sns {
        if visited.contains(to) || !inst.can_visit(location, to, slot, battery) {
            continue;
        }
        let mut next = visited.clone();
        next.insert(to);
        actions.push(Action::Fly {
            from: location,
            to,
            depart_slot: slot,
        });
        enumerate(
            inst,
            to,
            slot + inst.travel(location, to),
            battery - inst.energy(location, to),
            &next,
            actions,
            visit,
        );
        actions.pop();
    }
}

/// The minimum-cost schedule, ties broken towards the lexicographically
/// smallest action sequence.
pub fn oracle_solve(instance: &Instance, limits: OracleLimits) -> Result<Solution> {
    instance.check()?;
    limits.check(instance)?;
    let mut best: Option<(f64, Vec<Action>)> = None;
    let mut failure = None;
    for_each_schedule(instance, 0, instance.battery_capacity, &mut |actions| {
        let schedule = Schedule::new(actions.to_vec());
        let cost = match replay_cost(&schedule, instance) {
            Ok(c) => c,
            Err(e) => {
                failure.get_or_insert(e);
                return;
            }
        };
        let better = match &best {
            None => true,
            Some((bc, ba)) => match cost.total_cmp(bc) {
                Ordering::Less => true,
                Ordering::Equal => compare_actions(actions, ba) == Ordering::Less,
                Ordering::Greater => false,
            },
        };
        if better {
            best = Some((cost, schedule.actions));
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (_, actions) = best.expect("the empty schedule is always enumerated");
    let schedule = Schedule::new(actions);
    let report = replay(&schedule, instance)?;
    Ok(Solution { schedule, report })
}

/// Number of schedules [`oracle_solve`] evaluates.
pub fn count_schedules(instance: &Instance) -> usize {
    let mut n = 0;
    for_each_schedule(instance, 0, instance.battery_capacity, &mut |_| n += 1);
    n
}

/// Searches for a schedule of zero total cost, abandoning every branch that
/// has already accrued cost or must accrue some: an SN's AoI cannot drop
/// before fresh data about it can reach the base station, so the cost of
/// those slots is unavoidable.
pub fn zero_cost_schedule(instance: &Instance, limits: OracleLimits) -> Result<Option<Schedule>> {
    instance.check()?;
    limits.check(instance)?;
    let dist = shortest_travel(instance);
    let sim = Simulator::new(instance).untraced();
    Ok(zero_search(
        instance,
        &dist,
        sim,
        &SnSet::new(instance.num_sns),
    ))
}

fn zero_search(
    inst: &Instance,
    dist: &[Vec<u32>],
    sim: Simulator<'_>,
    visited: &SnSet,
) -> Option<Schedule> {
    if sim.cost() > 0.0 || unavoidable_cost(inst, dist, &sim) > 0.0 {
        return None;
    }
    let (location, slot, battery) = (sim.location(), sim.slot(), sim.battery());
    if location == BASE {
        let (schedule, report) = sim.clone().finish().ok()?;
        if report.cumulative_cost == 0.0 {
            return Some(schedule);
        }
        for w in inst.recharge.min_slots..=inst.horizon_slots - slot {
            let mut next = sim.clone();
            next.charge(w).ok()?;
            if let Some(s) = zero_search(inst, dist, next, visited) {
                return Some(s);
            }
        }
    } else if inst.can_return(location, slot, battery) {
        let mut next = sim.clone();
        next.fly(BASE).ok()?;
        if let Some(s) = zero_search(inst, dist, next, &SnSet::new(inst.num_sns)) {
            return Some(s);
        }
    }
    for to in 1..=inst.num_sns {
        if visited.contains(to) || !inst.can_visit(location, to, slot, battery) {
            continue;
        }
        let mut next = sim.clone();
        next.fly(to).ok()?;
        let mut seen = visited.clone();
        seen.insert(to);
        if let Some(s) = zero_search(inst, dist, next, &seen) {
            return Some(s);
        }
    }
    None
}

/// Lower bound on the cost still to come: every SN's AoI keeps growing
/// until the earliest slot its data could possibly be refreshed at the base
/// station.
fn unavoidable_cost(inst: &Instance, dist: &[Vec<u32>], sim: &Simulator<'_>) -> f64 {
    let state = sim.state();
    let (loc, slot) = (sim.location(), sim.slot());
    let aoi = state.aoi();
    let mut total = 0.0;
    for i in 0..inst.num_sns {
        let onboard = state.collected[i] > state.delivered[i];
        let refresh = if onboard {
            slot + dist[loc][BASE]
        } else {
            slot.saturating_add(dist[loc][i + 1].saturating_add(dist[i + 1][BASE]))
        };
        let last = refresh.saturating_sub(1).min(inst.horizon_slots);
        let f = &inst.cost_fns[i];
        for k in 1..=last.saturating_sub(slot) {
            total += f.eval(f64::from(aoi[i] + k) * inst.slot_len);
        }
    }
    total
}

/// All-pairs shortest travel times (in slots).
fn shortest_travel(inst: &Instance) -> Vec<Vec<u32>> {
    let n = inst.num_locations();
    let mut d = inst.travel_slots.clone();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k].saturating_add(d[k][j]);
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}
