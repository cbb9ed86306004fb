use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// One step of a UAV plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Action {
    Fly {
        from: usize,
        to: usize,
        depart_slot: u32,
    },
    /// Stay at the base station for `slots` slots, recharging.
    Charge { slots: u32, start_slot: u32 },
}

impl Action {
    pub fn start_slot(&self) -> u32 {
        match *self {
            Action::Fly { depart_slot, .. } => depart_slot,
            Action::Charge { start_slot, .. } => start_slot,
        }
    }

    /// Tie-breaking key: flights before charges, then by target, then by
    /// duration.
    pub fn order_key(&self) -> (u8, usize, u32) {
        match *self {
            Action::Fly { to, .. } => (0, to, 0),
            Action::Charge { slots, .. } => (1, 0, slots),
        }
    }
}

/// An executable plan starting at the base station at slot 0. Slots after
/// the last action are spent idle at the base station.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub actions: Vec<Action>,
}

impl Schedule {
    pub fn new(actions: Vec<Action>) -> Self {
        Self { actions }
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// SNs visited, in order.
    pub fn visits(&self) -> impl Iterator<Item = usize> + '_ {
        self.actions.iter().filter_map(|a| match *a {
            Action::Fly { to, .. } if to != super::BASE => Some(to),
            _ => None,
        })
    }
}

/// Lexicographic comparison of two action sequences by [`Action::order_key`].
pub fn compare_actions(a: &[Action], b: &[Action]) -> Ordering {
    a.iter()
        .map(Action::order_key)
        .cmp(b.iter().map(Action::order_key))
}
