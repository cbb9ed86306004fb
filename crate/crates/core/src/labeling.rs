//! Label-setting search over the time-expanded graph.
//!
//! The graph has one node per (location, slot) for slots `0..=N`. A label at
//! a node is a partial schedule from the base station at slot 0 to that node,
//! summarised by its remaining energy, the SNs visited since it last left
//! the base station, per-SN collection slots, per-SN AoI and accrued cost.
//!
//! Slots are swept in increasing order. Every stored label is extended by
//! each legal move (charge at the BS, fly to an unvisited SN, return to the
//! BS), and each resulting label is offered to its target cell through
//! [`crate::dominance::insert`], which keeps at most `K` labels per cell.
//! Finally every BS label idles until the horizon and the cheapest one wins.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::aoi::{delivery_cost, interval_cost, replay, slot_cost};
use crate::dominance::{self, compute_hhat, DominanceVerdict};
use crate::model::{compare_actions, Action, Instance, Schedule, BASE};
use crate::{Error, Result, Solution};

pub type LabelId = usize;

/// Label capacity meaning "no limit".
pub const UNBOUNDED: usize = usize::MAX;

/// Set of SNs (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SnSet(Vec<u64>);

impl SnSet {
    pub fn new(num_sns: usize) -> Self {
        Self(vec![0; num_sns.div_ceil(64).max(1)])
    }

    pub fn contains(&self, sn: usize) -> bool {
        let i = sn - 1;
        self.0[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn insert(&mut self, sn: usize) {
        let i = sn - 1;
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn clear(&mut self) {
        self.0.iter_mut().for_each(|w| *w = 0);
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
}

/// A partial schedule ending at (`location`, `slot`).
#[derive(Clone, Debug, PartialEq)]
pub struct Label {
    pub location: usize,
    pub slot: u32,
    /// Remaining energy `B_ℓ`.
    pub battery: f64,
    /// SNs visited since the last departure from the base station.
    pub visited: SnSet,
    /// Per-SN collection slot `z` (0 if never collected).
    pub collected: Vec<u32>,
    /// Per-SN AoI in slots.
    pub aoi: Vec<u32>,
    /// Accrued cost `h` over slots `1..=slot`.
    pub cost: f64,
    /// Promise cost `ĥ`.
    pub promise: f64,
    pub parent: Option<LabelId>,
    /// The move from the parent to this label.
    pub action: Option<Action>,
}

impl Label {
    /// Base station, slot 0, full battery, nothing collected.
    pub fn root(instance: &Instance) -> Self {
        let s = instance.num_sns;
        Self {
            location: BASE,
            slot: 0,
            battery: instance.battery_capacity,
            visited: SnSet::new(s),
            collected: vec![0; s],
            aoi: vec![0; s],
            cost: 0.0,
            promise: 0.0,
            parent: None,
            action: None,
        }
    }

    /// `â = n - z`, in slots.
    pub fn shadow_aoi(&self) -> Vec<u32> {
        self.collected.iter().map(|&z| self.slot - z).collect()
    }
}

/// Charging for `slots` slots at the base station. `None` when the stay is
/// shorter than the minimum charging time or runs past the horizon.
pub fn expand_charge(label: &Label, slots: u32, instance: &Instance) -> Option<Label> {
    if label.location != BASE || !instance.can_charge(label.slot, slots) {
        return None;
    }
    let accrued = interval_cost(&label.aoi, slots, &instance.cost_fns, instance.slot_len);
    Some(charge_label(label, slots, accrued, instance))
}

fn charge_label(label: &Label, slots: u32, accrued: f64, instance: &Instance) -> Label {
    let cost = label.cost + accrued;
    Label {
        location: BASE,
        slot: label.slot + slots,
        battery: instance
            .recharge
            .charged(label.battery, instance.battery_capacity, slots),
        visited: SnSet::new(instance.num_sns),
        collected: label.collected.clone(),
        aoi: label.aoi.iter().map(|a| a + slots).collect(),
        cost,
        promise: cost,
        parent: None,
        action: Some(Action::Charge {
            slots,
            start_slot: label.slot,
        }),
    }
}

/// Flying to SN `to`. `None` if `to` was already visited on this trip or
/// the UAV could not get back to the base station from `to` in time or on
/// the remaining energy.
pub fn expand_to_sn(label: &Label, to: usize, instance: &Instance) -> Option<Label> {
    if to == BASE
        || label.visited.contains(to)
        || !instance.can_visit(label.location, to, label.slot, label.battery)
    {
        return None;
    }
    let travel = instance.travel(label.location, to);
    let arrival = label.slot + travel;
    let mut visited = label.visited.clone();
    visited.insert(to);
    let mut collected = label.collected.clone();
    collected[to - 1] = arrival;
    let mut next = Label {
        location: to,
        slot: arrival,
        battery: label.battery - instance.energy(label.location, to),
        visited,
        collected,
        aoi: label.aoi.iter().map(|a| a + travel).collect(),
        cost: label.cost + interval_cost(&label.aoi, travel, &instance.cost_fns, instance.slot_len),
        promise: 0.0,
        parent: None,
        action: Some(Action::Fly {
            from: label.location,
            to,
            depart_slot: label.slot,
        }),
    };
    next.promise = compute_hhat(label, &next, instance);
    Some(next)
}

/// Returning to the base station and delivering everything on board.
pub fn expand_to_bs(label: &Label, instance: &Instance) -> Option<Label> {
    if !instance.can_return(label.location, label.slot, label.battery) {
        return None;
    }
    let travel = instance.travel(label.location, BASE);
    let arrival = label.slot + travel;
    let aoi: Vec<u32> = label.collected.iter().map(|&z| arrival - z).collect();
    let cost = label.cost
        + delivery_cost(
            &label.aoi,
            travel,
            &aoi,
            &instance.cost_fns,
            instance.slot_len,
        );
    Some(Label {
        location: BASE,
        slot: arrival,
        battery: label.battery - instance.energy(label.location, BASE),
        visited: SnSet::new(instance.num_sns),
        collected: label.collected.clone(),
        aoi,
        cost,
        promise: cost,
        parent: None,
        action: Some(Action::Fly {
            from: label.location,
            to: BASE,
            depart_slot: label.slot,
        }),
    })
}

/// The `(S+1) × (N+1)` grid of label cells plus an arena holding every label
/// ever stored. Labels are never mutated or freed once stored, so evicted
/// labels stay reachable as ancestors of surviving ones.
#[derive(Clone, Debug)]
pub struct LabelStore {
    num_locations: usize,
    capacity: usize,
    pub(crate) arena: Vec<Label>,
    pub(crate) cells: Vec<Vec<LabelId>>,
}

impl LabelStore {
    pub fn new(num_sns: usize, horizon: u32, capacity: usize) -> Self {
        let num_locations = num_sns + 1;
        Self {
            num_locations,
            capacity,
            arena: Vec::new(),
            cells: vec![Vec::new(); num_locations * (horizon as usize + 1)],
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub(crate) fn cell_index(&self, location: usize, slot: u32) -> usize {
        slot as usize * self.num_locations + location
    }

    /// Ids of the labels currently stored at (`location`, `slot`).
    pub fn cell(&self, location: usize, slot: u32) -> &[LabelId] {
        &self.cells[self.cell_index(location, slot)]
    }

    pub fn label(&self, id: LabelId) -> &Label {
        &self.arena[id]
    }

    /// Number of labels ever stored.
    pub fn len(&self) -> usize {
        self.arena.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arena.is_empty()
    }

    pub fn max_cell_len(&self) -> usize {
        self.cells.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Actions leading from the root to `id`.
    pub fn path(&self, id: LabelId) -> Vec<Action> {
        let mut actions = Vec::new();
        let mut cur = Some(id);
        while let Some(i) = cur {
            let l = &self.arena[i];
            actions.extend(l.action);
            cur = l.parent;
        }
        actions.reverse();
        actions
    }
}

/// Hook into every insertion attempt, for instrumentation.
pub trait SearchObserver {
    fn on_insert(&mut self, candidate: &Label, verdict: &DominanceVerdict, store: &LabelStore);
}

impl SearchObserver for () {
    fn on_insert(&mut self, _: &Label, _: &DominanceVerdict, _: &LabelStore) {}
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub candidates: usize,
    pub stored: usize,
    pub discarded_dominated: usize,
    pub discarded_full: usize,
    pub evicted: usize,
}

/// Result of [`solve`].
#[derive(Clone, Debug)]
pub struct Outcome {
    pub solution: Solution,
    /// Cost as computed by the search itself.
    pub search_cost: f64,
    pub stats: SearchStats,
    pub store: LabelStore,
}

/// Runs the label-setting search with at most `capacity` labels per cell
/// ([`UNBOUNDED`] for no limit).
pub fn solve(instance: &Instance, capacity: usize) -> Result<Outcome> {
    solve_observed(instance, capacity, &mut ())
}

pub fn solve_observed(
    instance: &Instance,
    capacity: usize,
    observer: &mut dyn SearchObserver,
) -> Result<Outcome> {
    instance.check()?;
    if capacity == 0 {
        return Err(Error::ZeroCapacity);
    }
    let horizon = instance.horizon_slots;
    let mut search = Search {
        instance,
        store: LabelStore::new(instance.num_sns, horizon, capacity),
        stats: SearchStats::default(),
        observer,
    };
    search.offer(None, Label::root(instance));

    for slot in 0..horizon {
        for location in 0..instance.num_locations() {
            let ids = search.store.cell(location, slot).to_vec();
            for id in ids {
                search.expand(id);
            }
        }
    }

    let (best, search_cost) = search.best_final();
    let schedule = Schedule::new(search.store.path(best));
    let report = replay(&schedule, instance)?;
    Ok(Outcome {
        solution: Solution { schedule, report },
        search_cost,
        stats: search.stats,
        store: search.store,
    })
}

struct Search<'a, 'o> {
    instance: &'a Instance,
    store: LabelStore,
    stats: SearchStats,
    observer: &'o mut dyn SearchObserver,
}

impl Search<'_, '_> {
    fn offer(&mut self, parent: Option<LabelId>, mut candidate: Label) {
        candidate.parent = parent;
        self.stats.candidates += 1;
        let observed = candidate.clone();
        let verdict = dominance::insert(&mut self.store, candidate);
        match &verdict {
            DominanceVerdict::DiscardedDominated { .. } => self.stats.discarded_dominated += 1,
            DominanceVerdict::DiscardedFull => self.stats.discarded_full += 1,
            DominanceVerdict::Stored { .. } => self.stats.stored += 1,
            DominanceVerdict::StoredAfterEvictions { evicted, .. } => {
                self.stats.stored += 1;
                self.stats.evicted += evicted.len();
            }
        }
        self.observer.on_insert(&observed, &verdict, &self.store);
    }

    fn expand(&mut self, id: LabelId) {
        let inst = self.instance;
        let label = self.store.label(id).clone();
        if label.location == BASE {
            // Stays of every legal length; cost accumulated slot by slot in
            // the same order as `interval_cost`.
            let mut accrued = 0.0;
            for w in 1..=inst.horizon_slots - label.slot {
                accrued += slot_cost(&label.aoi, w, &inst.cost_fns, inst.slot_len);
                if w >= inst.recharge.min_slots {
                    self.offer(Some(id), charge_label(&label, w, accrued, inst));
                }
            }
        } else if let Some(next) = expand_to_bs(&label, inst) {
            self.offer(Some(id), next);
        }
        for to in 1..=inst.num_sns {
            if let Some(next) = expand_to_sn(&label, to, inst) {
                self.offer(Some(id), next);
            }
        }
    }

    /// Cheapest base-station label after idling to the horizon; ties go to
    /// the lexicographically smallest action sequence.
    fn best_final(&self) -> (LabelId, f64) {
        let inst = self.instance;
        let mut best: Option<(LabelId, f64)> = None;
        for slot in 0..=inst.horizon_slots {
            for &id in self.store.cell(BASE, slot) {
                let l = self.store.label(id);
                let total = l.cost
                    + interval_cost(
                        &l.aoi,
                        inst.horizon_slots - slot,
                        &inst.cost_fns,
                        inst.slot_len,
                    );
                let better = match best {
                    None => true,
                    Some((bid, bcost)) => match total.total_cmp(&bcost) {
                        Ordering::Less => true,
                        Ordering::Equal => {
                            compare_actions(&self.store.path(id), &self.store.path(bid))
                                == Ordering::Less
                        }
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((id, total));
                }
            }
        }
        best.expect("the root label always sits at the base station")
    }
}
