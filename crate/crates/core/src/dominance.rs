//! Label domination and capacity-bounded storage of labels per cell.
//!
//! Labels in the same cell are compared on remaining energy, the shadow AoI
//! vector `â = n - z` (staleness of what the UAV holds, delivered or not)
//! and the promise cost `ĥ` (the cost the partial schedule would have had if
//! everything on board had been delivered on arrival).
//!
//! At base-station cells `â = a` and `ĥ = h`, and domination is exact: a
//! dominated label cannot be completed more cheaply than its dominator. At
//! SN cells the rule is a heuristic.

use serde::{Deserialize, Serialize};

use crate::aoi::delivery_cost;
use crate::labeling::{Label, LabelId, LabelStore};
use crate::model::{Instance, BASE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvictionReason {
    /// The new label dominates it.
    Dominated,
    /// The cell was full and it had the largest `ĥ`.
    Capacity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Eviction {
    pub label: LabelId,
    pub reason: EvictionReason,
}

/// Outcome of offering a candidate label to a cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DominanceVerdict {
    DiscardedDominated { by: LabelId },
    Stored { id: LabelId },
    StoredAfterEvictions { id: LabelId, evicted: Vec<Eviction> },
    DiscardedFull,
}

impl DominanceVerdict {
    pub fn stored_id(&self) -> Option<LabelId> {
        match self {
            DominanceVerdict::Stored { id } | DominanceVerdict::StoredAfterEvictions { id, .. } => {
                Some(*id)
            }
            _ => None,
        }
    }
}

/// Promise cost `ĥ` of `candidate`, reached from `parent`: the parent's cost
/// plus the cost of the move as if it had ended with a delivery, i.e. with
/// the arrival slot charged at `â` instead of `a`. Base-station labels have
/// already delivered, so there `ĥ = h`.
pub fn compute_hhat(parent: &Label, candidate: &Label, instance: &Instance) -> f64 {
    if candidate.location == BASE {
        return candidate.cost;
    }
    let travel = candidate.slot - parent.slot;
    let shadow = candidate.shadow_aoi();
    parent.cost
        + delivery_cost(
            &parent.aoi,
            travel,
            &shadow,
            &instance.cost_fns,
            instance.slot_len,
        )
}

/// Whether `a` dominates `b`. Both must sit in the same cell.
///
/// Holds when `a` is at least as good on energy, shadow AoI (elementwise)
/// and promise cost, and strictly better on at least one of the three.
pub fn dominates(a: &Label, b: &Label) -> bool {
    debug_assert_eq!((a.location, a.slot), (b.location, b.slot));
    if a.battery < b.battery || a.promise > b.promise {
        return false;
    }
    // â = n - z and both labels share n, so smaller â means larger z.
    let mut strictly_fresher = false;
    for (&za, &zb) in a.collected.iter().zip(&b.collected) {
        if za < zb {
            return false;
        }
        strictly_fresher |= za > zb;
    }
    a.battery > b.battery || a.promise < b.promise || strictly_fresher
}

/// Offers `candidate` to its cell (location, slot).
///
/// 1. A stored label dominating the candidate rejects it.
/// 2. Stored labels the candidate dominates are removed.
/// 3. If the cell has room, the candidate is stored.
/// 4. Otherwise, if the candidate's `ĥ` is below the largest stored `ĥ`,
///    that label (the oldest one on ties) is evicted for it.
/// 5. Otherwise the candidate is dropped.
pub fn insert(store: &mut LabelStore, candidate: Label) -> DominanceVerdict {
    let cell = store.cell_index(candidate.location, candidate.slot);
    let capacity = store.capacity();

    if let Some(&by) = store.cells[cell]
        .iter()
        .find(|&&id| dominates(&store.arena[id], &candidate))
    {
        return DominanceVerdict::DiscardedDominated { by };
    }

    let mut evicted = Vec::new();
    let arena = &store.arena;
    store.cells[cell].retain(|&id| {
        let keep = !dominates(&candidate, &arena[id]);
        if !keep {
            evicted.push(Eviction {
                label: id,
                reason: EvictionReason::Dominated,
            });
        }
        keep
    });

    if store.cells[cell].len() >= capacity {
        // `max_by` keeps the last maximum; scan in reverse to get the oldest.
        let (pos, worst) = store.cells[cell]
            .iter()
            .enumerate()
            .rev()
            .map(|(pos, &id)| (pos, store.arena[id].promise))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("full cell is non-empty");
        if candidate.promise < worst {
            let id = store.cells[cell].remove(pos);
            evicted.push(Eviction {
                label: id,
                reason: EvictionReason::Capacity,
            });
        } else {
            return DominanceVerdict::DiscardedFull;
        }
    }

    let id = store.arena.len();
    store.arena.push(candidate);
    store.cells[cell].push(id);
    if evicted.is_empty() {
        DominanceVerdict::Stored { id }
    } else {
        DominanceVerdict::StoredAfterEvictions { id, evicted }
    }
}
