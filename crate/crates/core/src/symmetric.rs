//! The symmetric case: every SN is `r` from the base station, all SNs share
//! one cost function and a full battery lasts one round trip.
//!
//! Time is continuous here. Each departure `t_k` starts a trip to a single
//! SN, which is back at the base station `2r` later; the next departure is
//! `t_{k+1}` (or the end of the horizon). Visiting the SN whose AoI is
//! largest at every departure is optimal.
//!
//! [`symmetric_solve`] applies the same policy to slotted instances whose
//! SNs are equidistant from the base station.

use serde::{Deserialize, Serialize};

use crate::aoi::Simulator;
use crate::model::{CostFn, Instance, RechargeSpec, BASE};
use crate::{Error, Result, Solution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricInstance {
    pub num_sns: usize,
    /// One-way travel time between the base station and any SN.
    pub radius: f64,
    pub cost: CostFn,
    /// AoI of each SN at the first departure.
    pub initial_aoi: Vec<f64>,
    /// Departure times `t_1 < t_2 < ... < t_M`.
    pub departures: Vec<f64>,
    /// End of the last interval.
    pub end: f64,
    /// Minimum time spent recharging between two trips.
    #[serde(default)]
    pub min_recharge: f64,
}

impl SymmetricInstance {
    pub fn new(
        num_sns: usize,
        radius: f64,
        cost: CostFn,
        initial_aoi: Vec<f64>,
        departures: Vec<f64>,
        end: f64,
    ) -> Result<Self> {
        let inst = Self {
            num_sns,
            radius,
            cost,
            initial_aoi,
            departures,
            end,
            min_recharge: 0.0,
        };
        inst.check()?;
        Ok(inst)
    }

    pub fn with_min_recharge(mut self, min_recharge: f64) -> Result<Self> {
        self.min_recharge = min_recharge;
        self.check()?;
        Ok(self)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSymmetric(msg));
        if self.num_sns == 0 {
            return bad("no SNs".into());
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return bad(format!("radius {} must be positive", self.radius));
        }
        if !(self.min_recharge.is_finite() && self.min_recharge >= 0.0) {
            return bad(format!(
                "minimum recharge {} is negative",
                self.min_recharge
            ));
        }
        if self.initial_aoi.len() != self.num_sns {
            return bad(format!(
                "{} initial AoIs for {} SNs",
                self.initial_aoi.len(),
                self.num_sns
            ));
        }
        if self
            .initial_aoi
            .iter()
            .any(|a| !(a.is_finite() && *a >= 0.0))
        {
            return bad("initial AoIs must be finite and non-negative".into());
        }
        if self.departures.first().is_some_and(|t| !t.is_finite()) {
            return bad("departure times must be finite".into());
        }
        let gap = 2.0 * self.radius + self.min_recharge;
        for (k, w) in self.departures.windows(2).enumerate() {
            if w[1] - w[0] < gap {
                return bad(format!(
                    "departures {} and {} are {} apart, need {gap}",
                    k + 1,
                    k + 2,
                    w[1] - w[0]
                ));
            }
        }
        if let Some(&last) = self.departures.last() {
            if !(self.end - last >= 2.0 * self.radius) {
                return bad(format!("last trip at {last} does not end by {}", self.end));
            }
        }
        Ok(())
    }

    /// Length of interval `k` (0-based), from `t_k` to the next departure.
    pub fn interval(&self, k: usize) -> f64 {
        let next = self.departures.get(k + 1).copied().unwrap_or(self.end);
        next - self.departures[k]
    }
}

/// Average AoI cost over an interval of length `dt` that starts with a trip
/// to SN `sn` (1-based) while the AoIs are `aoi`.
///
/// SNs other than `sn` age from `a_s` to `a_s + dt`. SN `sn` ages from `a_i`
/// until its data reaches the base station at `2r`, after which its AoI runs
/// from `r` to `dt - r`.
pub fn trip_cost(sn: usize, aoi: &[f64], dt: f64, r: f64, f: &CostFn) -> Result<f64> {
    if sn == 0 || sn > aoi.len() {
        return Err(Error::InvalidSymmetric(format!("no SN {sn}")));
    }
    if !(dt >= 2.0 * r) {
        return Err(Error::InvalidSymmetric(format!(
            "interval {dt} shorter than a round trip {}",
            2.0 * r
        )));
    }
    let mut total = 0.0;
    for (s, &a) in aoi.iter().enumerate() {
        total += if s + 1 == sn {
            f.integral(a, a + 2.0 * r) + f.integral(r, dt - r)
        } else {
            f.integral(a, a + dt)
        };
    }
    Ok(total / dt)
}

/// AoIs at the next departure after visiting `sn` over an interval `dt`.
pub fn advance(aoi: &[f64], sn: usize, dt: f64, r: f64) -> Vec<f64> {
    aoi.iter()
        .enumerate()
        .map(|(s, &a)| if s + 1 == sn { dt - r } else { a + dt })
        .collect()
}

/// SN with the largest AoI, lowest index on ties (1-based).
pub fn max_aoi_sn(aoi: &[f64]) -> usize {
    let mut best = 0;
    for (s, &a) in aoi.iter().enumerate() {
        if a > aoi[best] {
            best = s;
        }
    }
    best + 1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub visits: Vec<usize>,
    /// Average cost of each interval.
    pub trip_costs: Vec<f64>,
    /// Integrated cost from the first departure to the end.
    pub total: f64,
}

/// Visits the largest-AoI SN on every trip.
pub fn optimal_policy(instance: &SymmetricInstance) -> Policy {
    let mut aoi = instance.initial_aoi.clone();
    let mut visits = Vec::with_capacity(instance.departures.len());
    for k in 0..instance.departures.len() {
        let sn = max_aoi_sn(&aoi);
        visits.push(sn);
        aoi = advance(&aoi, sn, instance.interval(k), instance.radius);
    }
    sequence_cost(instance, &visits).expect("valid instance and visits")
}

/// Cost of visiting `visits[k]` on trip `k`.
pub fn sequence_cost(instance: &SymmetricInstance, visits: &[usize]) -> Result<Policy> {
    instance.check()?;
    if visits.len() != instance.departures.len() {
        return Err(Error::InvalidSymmetric(format!(
            "{} visits for {} departures",
            visits.len(),
            instance.departures.len()
        )));
    }
    let r = instance.radius;
    let mut aoi = instance.initial_aoi.clone();
    let mut trip_costs = Vec::with_capacity(visits.len());
    let mut total = 0.0;
    for (k, &sn) in visits.iter().enumerate() {
        let dt = instance.interval(k);
        let h = trip_cost(sn, &aoi, dt, r, &instance.cost)?;
        total += dt * h;
        trip_costs.push(h);
        aoi = advance(&aoi, sn, dt, r);
    }
    Ok(Policy {
        visits: visits.to_vec(),
        trip_costs,
        total,
    })
}

/// Slotted version of a symmetric instance with unit slots: SN legs take
/// `r` slots and `r` energy, the battery holds `2r` and one slot of charging
/// refills it. Requires integral times, zero initial AoIs, a first
/// departure at 0 and at least one slot of charging between trips.
pub fn to_slotted(instance: &SymmetricInstance) -> Result<Instance> {
    instance.check()?;
    let bad = |msg: &str| Err(Error::InvalidSymmetric(msg.into()));
    let integral = |x: f64| x.fract() == 0.0 && x >= 0.0 && x <= f64::from(u32::MAX);
    if !integral(instance.radius) || !integral(instance.end) {
        return bad("radius and end must be whole slots");
    }
    if instance.initial_aoi.iter().any(|&a| a != 0.0) {
        return bad("slotted instances start with zero AoI");
    }
    if instance.departures.first().is_some_and(|&t| t != 0.0) {
        return bad("first departure must be at slot 0");
    }
    if instance.departures.iter().any(|&t| !integral(t)) {
        return bad("departures must be whole slots");
    }
    if instance
        .departures
        .windows(2)
        .any(|w| w[1] - w[0] < 2.0 * instance.radius + 1.0)
    {
        return bad("need at least one charging slot between trips");
    }
    let s = instance.num_sns;
    let r = instance.radius as u32;
    let leg = instance.radius;
    let n = s + 1;
    let mut travel = vec![vec![2 * r; n]; n];
    let mut energy = vec![vec![2.0 * leg; n]; n];
    for i in 0..n {
        travel[i][i] = 0;
        energy[i][i] = 0.0;
        if i > 0 {
            travel[0][i] = r;
            travel[i][0] = r;
            energy[0][i] = leg;
            energy[i][0] = leg;
        }
    }
    Ok(Instance {
        num_sns: s,
        slot_len: 1.0,
        horizon_slots: instance.end as u32,
        travel_slots: travel,
        travel_energy: energy,
        battery_capacity: 2.0 * leg,
        recharge: RechargeSpec::new(2.0 * leg),
        cost_fns: vec![instance.cost.clone(); s],
    })
}

/// Uniform base-station distance (both ways) and shared cost function, if
/// `instance` has them.
fn symmetric_radius(instance: &Instance) -> Result<u32> {
    let r = instance.travel(BASE, 1);
    for s in 1..=instance.num_sns {
        if instance.travel(BASE, s) != r || instance.travel(s, BASE) != r {
            return Err(Error::NotSymmetric(format!(
                "SN {s} is not {r} slots from the base station"
            )));
        }
        if instance.cost_fn(s) != instance.cost_fn(1) {
            return Err(Error::NotSymmetric(format!(
                "SN {s} has a different cost function"
            )));
        }
    }
    Ok(r)
}

/// Single-SN trips to the largest-AoI SN (lowest index on ties), departing
/// as soon as the battery allows. Rejects instances whose SNs are not all
/// equidistant from the base station with a common cost function.
pub fn symmetric_solve(instance: &Instance) -> Result<Solution> {
    instance.check()?;
    symmetric_radius(instance)?;
    let inst = instance;
    let mut sim = Simulator::new(inst);
    loop {
        let slot = sim.slot();
        let aoi: Vec<f64> = sim.state().aoi().iter().map(|&a| f64::from(a)).collect();
        let sn = max_aoi_sn(&aoi);
        if inst.can_visit(BASE, sn, slot, sim.battery()) {
            sim.fly(sn)?;
            sim.fly(BASE)?;
            continue;
        }
        let min = inst.recharge.min_slots;
        let wait = (min..=inst.horizon_slots.saturating_sub(slot)).find(|&w| {
            let charged = inst
                .recharge
                .charged(sim.battery(), inst.battery_capacity, w);
            inst.can_visit(BASE, sn, slot + w, charged)
        });
        match wait {
            Some(w) => {
                sim.charge(w)?;
            }
            None => break,
        }
    }
    let (schedule, report) = sim.finish()?;
    Ok(Solution { schedule, report })
}
