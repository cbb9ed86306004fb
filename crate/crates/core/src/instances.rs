//! Instance constructors: random disk layouts and the Hamiltonian-path
//! reduction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{quantize, CostFn, Instance, RechargeSpec};
use crate::{Error, Result};

/// Cost-function families the random generator draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostFamily {
    Linear,
    Quadratic,
    Exponential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub radius_m: f64,
    pub speed_m_per_min: f64,
    /// Minimum travel time between any two locations, BS included.
    pub min_travel_min: f64,
    pub slot_len_min: f64,
    /// Battery capacity in minutes of flight.
    pub battery_min: f64,
    /// Minutes to charge an empty battery to full.
    pub recharge_time_min: f64,
    pub min_charge_slots: u32,
    pub families: Vec<CostFamily>,
    pub linear_alpha: (f64, f64),
    pub quadratic_alpha: (f64, f64),
    pub exponential_alpha: (f64, f64),
    pub exponential_beta: (f64, f64),
    pub max_attempts: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            radius_m: 5000.0,
            speed_m_per_min: 1200.0,
            min_travel_min: 0.5,
            slot_len_min: 1.0,
            battery_min: 25.0,
            recharge_time_min: 50.0,
            min_charge_slots: 1,
            families: vec![
                CostFamily::Linear,
                CostFamily::Quadratic,
                CostFamily::Exponential,
            ],
            linear_alpha: (0.5, 2.0),
            quadratic_alpha: (0.01, 0.1),
            exponential_alpha: (0.1, 1.0),
            exponential_beta: (0.01, 0.05),
            max_attempts: 10_000,
        }
    }
}

/// A random instance with the layout it was built from. `coords[0]` is the
/// base station.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratedInstance {
    pub instance: Instance,
    pub coords: Vec<(f64, f64)>,
}

/// SNs scattered uniformly over a disk around the base station.
///
/// Travel times are Euclidean distance over speed, rounded up to whole
/// slots; travel energy is the travel time in minutes. Layouts are redrawn
/// until every pair of locations is at least `min_travel_min` apart and at
/// least one round trip fits into the horizon.
pub fn random_instance(
    seed: u64,
    num_sns: usize,
    horizon_slots: u32,
    params: &GenParams,
) -> Result<GeneratedInstance> {
    if num_sns == 0 || horizon_slots == 0 {
        return Err(Error::InvalidParams(
            "need at least one SN and one slot".into(),
        ));
    }
    if params.families.is_empty() {
        return Err(Error::InvalidParams("no cost families to draw from".into()));
    }
    if !(params.speed_m_per_min > 0.0 && params.radius_m > 0.0 && params.recharge_time_min > 0.0) {
        return Err(Error::InvalidParams(
            "radius, speed and recharge time must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_dist = params.min_travel_min * params.speed_m_per_min;

    for _ in 0..params.max_attempts {
        let Some(coords) = place(
            &mut rng,
            num_sns,
            params.radius_m,
            min_dist,
            params.max_attempts,
        ) else {
            return Err(Error::SamplingCapExceeded(params.max_attempts));
        };
        let minutes: Vec<Vec<f64>> = coords
            .iter()
            .map(|a| {
                coords
                    .iter()
                    .map(|b| {
                        ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() / params.speed_m_per_min
                    })
                    .collect()
            })
            .collect();
        let cost_fns = (0..num_sns)
            .map(|_| draw_cost(&mut rng, params))
            .collect::<Result<Vec<_>>>()?;
        let instance = Instance {
            num_sns,
            slot_len: params.slot_len_min,
            horizon_slots,
            travel_slots: quantize(&minutes, params.slot_len_min)?,
            travel_energy: minutes,
            battery_capacity: params.battery_min,
            recharge: RechargeSpec {
                rate_per_slot: params.battery_min * params.slot_len_min / params.recharge_time_min,
                min_slots: params.min_charge_slots,
            },
            cost_fns,
        };
        if instance.validate().is_empty() {
            return Ok(GeneratedInstance { instance, coords });
        }
    }
    Err(Error::SamplingCapExceeded(params.max_attempts))
}

fn place(
    rng: &mut ChaCha8Rng,
    num_sns: usize,
    radius: f64,
    min_dist: f64,
    max_attempts: usize,
) -> Option<Vec<(f64, f64)>> {
    let mut coords = vec![(0.0, 0.0)];
    let mut attempts = 0;
    while coords.len() <= num_sns {
        attempts += 1;
        if attempts > max_attempts * (num_sns + 1) {
            return None;
        }
        let r = radius * rng.gen::<f64>().sqrt();
        let theta = std::f64::consts::TAU * rng.gen::<f64>();
        let p = (r * theta.cos(), r * theta.sin());
        if coords
            .iter()
            .all(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt() >= min_dist)
        {
            coords.push(p);
        }
    }
    Some(coords)
}

fn draw_cost(rng: &mut ChaCha8Rng, params: &GenParams) -> Result<CostFn> {
    let uniform = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| {
        if hi > lo {
            rng.gen_range(lo..hi)
        } else {
            lo
        }
    };
    match params.families[rng.gen_range(0..params.families.len())] {
        CostFamily::Linear => CostFn::linear(uniform(rng, params.linear_alpha)),
        CostFamily::Quadratic => CostFn::quadratic(uniform(rng, params.quadratic_alpha)),
        CostFamily::Exponential => {
            let alpha = uniform(rng, params.exponential_alpha);
            CostFn::exponential(alpha, uniform(rng, params.exponential_beta))
        }
    }
}

/// A simple undirected graph on nodes `1..=nodes`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(a, b) in &edges {
            if a == 0 || b == 0 || a > nodes || b > nodes {
                return Err(Error::InvalidGraph(format!(
                    "edge {a}-{b} outside nodes 1..={nodes}"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
        }
        let mut edges: Vec<_> = edges
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        Ok(Self { nodes, edges })
    }

    /// Parses an edge list, one `i j` pair per line (1-indexed). Blank lines
    /// and `#` comments are skipped. `nodes` defaults to the largest index.
    pub fn parse_edge_list(text: &str, nodes: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parsed: Option<Vec<usize>> = parts.iter().map(|p| p.parse().ok()).collect();
            match parsed.as_deref() {
                Some(&[a, b]) => edges.push((a, b)),
                _ => {
                    return Err(Error::InvalidGraph(format!(
                        "line {}: expected two node indices, got {line:?}",
                        lineno + 1
                    )))
                }
            }
        }
        let max = edges.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
        Self::new(nodes.unwrap_or(max), edges)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }
}

/// Travel time between adjacent SNs in the reduction.
pub const EDGE_SLOTS: u32 = 4;
/// Travel time between non-adjacent SNs.
pub const NON_EDGE_SLOTS: u32 = 16;
/// Travel time between the base station and any SN.
pub const BASE_SLOTS: u32 = 8;

/// Builds the scheduling instance whose optimum is zero exactly when
/// `graph` has a Hamiltonian path.
///
/// One SN per node; SNs are 4 slots apart when adjacent and 16 otherwise,
/// every SN is 8 slots from the base station, energies equal travel times,
/// the horizon is `4S + 14` slots and every SN pays 100 once its AoI exceeds
/// `4S + 13`. The battery holds the energy of every arc of the construction
/// (graph edges plus base-station links), which never binds.
pub fn reduction_instance(graph: &Graph) -> Result<Instance> {
    let s = graph.nodes;
    if s < 2 {
        return Err(Error::InvalidGraph("need at least 2 nodes".into()));
    }
    let n = s + 1;
    let mut travel = vec![vec![0u32; n]; n];
    for i in 1..n {
        travel[0][i] = BASE_SLOTS;
        travel[i][0] = BASE_SLOTS;
        for j in 1..n {
            if i != j {
                travel[i][j] = if graph.has_edge(i, j) {
                    EDGE_SLOTS
                } else {
                    NON_EDGE_SLOTS
                };
            }
        }
    }
    let energy: Vec<Vec<f64>> = travel
        .iter()
        .map(|row| row.iter().map(|&t| f64::from(t)).collect())
        .collect();
    let battery =
        f64::from(EDGE_SLOTS) * graph.edges.len() as f64 + f64::from(BASE_SLOTS) * s as f64;
    let threshold = f64::from(4 * s as u32 + 13);
    Ok(Instance {
        num_sns: s,
        slot_len: 1.0,
        horizon_slots: 4 * s as u32 + 14,
        travel_slots: travel,
        travel_energy: energy,
        battery_capacity: battery,
        recharge: RechargeSpec::new(battery),
        cost_fns: vec![CostFn::step(threshold, 0.0, 100.0)?; s],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let p = GenParams::default();
        let a = random_instance(7, 5, 30, &p).unwrap();
        let b = random_instance(7, 5, 30, &p).unwrap();
        assert_eq!(a, b);
        let c = random_instance(8, 5, 30, &p).unwrap();
        assert_ne!(a.instance, c.instance);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let g = random_instance(11, 6, 40, &GenParams::default()).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        let back: GeneratedInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn layouts_respect_geometry() {
        let p = GenParams::default();
        for seed in 0..40 {
            let g = random_instance(seed, 8, 40, &p).unwrap();
            let inst = &g.instance;
            assert!(inst.validate().is_empty());
            assert_eq!(g.coords.len(), 9);
            assert_eq!(g.coords[0], (0.0, 0.0));
            for (i, row) in inst.travel_slots.iter().enumerate() {
                for (j, &t) in row.iter().enumerate() {
                    // diameter 10 km at 1.2 km/min is 8.33 min
                    assert!(t <= 9);
                    if i != j {
                        assert!(t >= 1);
                        assert!(inst.travel_energy[i][j] >= 0.5 - 1e-12);
                    }
                }
            }
            for (s, p) in g.coords.iter().enumerate().skip(1) {
                let r = (p.0 * p.0 + p.1 * p.1).sqrt();
                assert!(r <= 5000.0);
                assert!(inst.travel_slots[0][s] <= 5);
            }
            assert_eq!(inst.recharge.rate_per_slot, 0.5);
            assert_eq!(inst.battery_capacity, 25.0);
        }
    }

    #[test]
    fn short_horizons_still_get_a_feasible_trip() {
        let p = GenParams::default();
        for seed in 0..20 {
            let g = random_instance(seed, 2, 3, &p).unwrap();
            assert!(g.instance.validate().is_empty());
        }
        assert!(random_instance(0, 2, 1, &p).is_err());
    }

    #[test]
    fn parses_edge_lists() {
        let g = Graph::parse_edge_list("1 2\n# comment\n\n3 2\n2 1\n", None).unwrap();
        assert_eq!(g, Graph::new(3, vec![(1, 2), (2, 3)]).unwrap());
        let g = Graph::parse_edge_list("", Some(3)).unwrap();
        assert_eq!(g.nodes, 3);
        assert!(Graph::parse_edge_list("1 x\n", None).is_err());
        assert!(Graph::parse_edge_list("1 1\n", None).is_err());
    }

    #[test]
    fn reduction_construction() {
        let g = Graph::new(3, vec![(1, 2), (2, 3)]).unwrap();
        let inst = reduction_instance(&g).unwrap();
        assert!(inst.validate().is_empty());
        assert_eq!(inst.horizon_slots, 26);
        assert_eq!(inst.travel(1, 2), 4);
        assert_eq!(inst.travel(1, 3), 16);
        assert_eq!(inst.travel(0, 3), 8);
        assert_eq!(inst.cost_fn(1).eval(25.0), 0.0);
        assert_eq!(inst.cost_fn(1).eval(26.0), 100.0);
        assert!(reduction_instance(&Graph::new(1, vec![]).unwrap()).is_err());
    }
}
