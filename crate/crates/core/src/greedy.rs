//! Greedy baseline.
//!
//! From its current location the UAV ranks the unvisited SNs it can still
//! reach (and get home from) by `f(a + t) / t`, the AoI cost the SN will have
//! on arrival per slot of travel. It takes the first SN in that order whose
//! detour beats going home, where both options are costed over the same
//! window of `max(t_ss' + t_s'0, t_s0)` slots. If no SN wins the UAV goes
//! home. At the base station a UAV that cannot afford any trip charges just
//! long enough to afford one.

use std::cmp::Ordering;

use crate::aoi::{interval_cost, Simulator};
use crate::labeling::SnSet;
use crate::model::{Instance, BASE};
use crate::{Result, Solution};

pub fn greedy_solve(instance: &Instance) -> Result<Solution> {
    instance.check()?;
    let mut sim = Simulator::new(instance);
    let mut visited = SnSet::new(instance.num_sns);
    loop {
        let here = sim.location();
        if let Some(to) = choose(instance, &sim, &visited) {
            sim.fly(to)?;
            visited.insert(to);
            continue;
        }
        if here != BASE {
            sim.fly(BASE)?;
            visited.clear();
            continue;
        }
        match wait_slots(instance, &sim) {
            Some(w) => {
                sim.charge(w)?;
            }
            None => break,
        }
    }
    let (schedule, report) = sim.finish()?;
    Ok(Solution { schedule, report })
}

/// First SN, in score order, worth flying to next.
fn choose(inst: &Instance, sim: &Simulator<'_>, visited: &SnSet) -> Option<usize> {
    let (here, slot, battery) = (sim.location(), sim.slot(), sim.battery());
    let aoi = sim.state().aoi();
    let mut ranked: Vec<(usize, f64)> = (1..=inst.num_sns)
        .filter(|&s| !visited.contains(s) && inst.can_visit(here, s, slot, battery))
        .map(|s| {
            let t = inst.travel(here, s);
            let arrival = f64::from(aoi[s - 1] + t) * inst.slot_len;
            (s, inst.cost_fn(s).eval(arrival) / f64::from(t))
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    ranked.into_iter().map(|(s, _)| s).find(|&s| {
        let window = (inst.travel(here, s) + inst.travel(s, BASE)).max(inst.travel(here, BASE));
        let detour = window_cost(sim, &[s, BASE], window);
        let home = window_cost(sim, &[BASE], window);
        detour.total_cmp(&home) == Ordering::Less
    })
}

/// Cost accrued over the next `window` slots by following `moves` and then
/// idling at the base station.
fn window_cost(sim: &Simulator<'_>, moves: &[usize], window: u32) -> f64 {
    let mut branch = sim.clone().untraced();
    let start = branch.cost();
    for &to in moves {
        if to != branch.location() {
            branch
                .fly(to)
                .expect("moves are pre-checked by the feasibility guards");
        }
    }
    let inst = sim.instance();
    let rest = window - (branch.slot() - sim.slot());
    let aoi = branch.state().aoi();
    branch.cost() - start + interval_cost(&aoi, rest, &inst.cost_fns, inst.slot_len)
}

/// Slots to charge at the base station before the next decision: the
/// shortest legal stay that makes some trip affordable, or the minimum stay
/// when a trip is already affordable but not yet worth it. `None` when no
/// trip can fit into the rest of the horizon.
fn wait_slots(inst: &Instance, sim: &Simulator<'_>) -> Option<u32> {
    let (slot, battery) = (sim.slot(), sim.battery());
    let any_trip = |at: u32, b: f64| (1..=inst.num_sns).any(|s| inst.can_visit(BASE, s, at, b));
    let min = inst.recharge.min_slots;
    if any_trip(slot, battery) {
        return inst.can_charge(slot, min).then_some(min);
    }
    (min..=inst.horizon_slots.saturating_sub(slot)).find(|&w| {
        let charged = inst.recharge.charged(battery, inst.battery_capacity, w);
        any_trip(slot + w, charged)
    })
}
