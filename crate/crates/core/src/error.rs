use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid instance: {}", format_violations(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("invalid cost function: {0}")]
    InvalidCostFn(String),

    #[error("slot length must be positive, got {0}")]
    NonPositiveSlotLength(f64),

    #[error("travel time [{row}][{col}] is negative or not finite: {value}")]
    InvalidTravelTime { row: usize, col: usize, value: f64 },

    #[error("label capacity K must be at least 1")]
    ZeroCapacity,

    #[error("battery underflow at slot {slot}: {battery} - {needed} < 0")]
    BatteryUnderflow {
        slot: u32,
        battery: f64,
        needed: f64,
    },

    #[error("action starting at slot {slot} runs past the horizon of {horizon} slots")]
    HorizonOverflow { slot: u32, horizon: u32 },

    #[error("charge of {slots} slots at slot {slot} is shorter than the minimum of {min_slots}")]
    ChargeTooShort {
        slot: u32,
        slots: u32,
        min_slots: u32,
    },

    #[error("action {index} starts at slot {found}, expected slot {expected}")]
    NonContiguous {
        index: usize,
        expected: u32,
        found: u32,
    },

    #[error("action {index} departs from location {found}, but the UAV is at {expected}")]
    WrongLocation {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("action {index} is not a legal move: {reason}")]
    IllegalAction { index: usize, reason: String },

    #[error("schedule ends at location {0}, not at the base station")]
    EndsAwayFromBase(usize),

    #[error("oracle limits exceeded: instance has {sns} SNs / {slots} slots, limits are {max_sns} / {max_slots}")]
    OracleLimits {
        sns: usize,
        slots: u32,
        max_sns: usize,
        max_slots: u32,
    },

    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),

    #[error("rejection sampling gave up after {0} attempts")]
    SamplingCapExceeded(usize),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid symmetric instance: {0}")]
    InvalidSymmetric(String),

    #[error("instance is not symmetric: {0}")]
    NotSymmetric(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
