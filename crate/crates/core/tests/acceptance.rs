//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aoisched::aoi::{replay_cost, Simulator};
use aoisched::dominance::{dominates, DominanceVerdict, EvictionReason};
use aoisched::greedy::greedy_solve;
use aoisched::instances::{random_instance, reduction_instance, GenParams, Graph};
use aoisched::labeling::{solve, solve_observed, Label, LabelStore, SearchObserver, UNBOUNDED};
use aoisched::oracle::{for_each_schedule, oracle_solve, zero_cost_schedule, OracleLimits};
use aoisched::symmetric::{
    max_aoi_sn, optimal_policy, symmetric_solve, to_slotted, trip_cost, SymmetricInstance,
};
use aoisched::{CostFn, CostKind, Instance, Schedule, BASE};

const ORACLE_TOL: f64 = 1e-9;
const REPLAY_TOL: f64 = 1e-9;
const POLICY_REL_TOL: f64 = 1e-8;
const TRIP_REL_TOL: f64 = 1e-8;

struct Verdict {
    pass: bool,
    detail: String,
}

/// Every (solver, instance, reported cost, schedule) seen by the other
/// criteria, for the replay check.
#[derive(Default)]
struct Replays(Vec<(&'static str, Instance, f64, Schedule)>);

impl Replays {
    fn push(&mut self, solver: &'static str, inst: &Instance, cost: f64, schedule: &Schedule) {
        self.0.push((solver, inst.clone(), cost, schedule.clone()));
    }
}

fn small_instances() -> Vec<Instance> {
    let mut params = GenParams::default();
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut seed = 0;
    while out.len() < 60 {
        seed += 1;
        let s = 1 + seed as usize % 3;
        let n = rng.gen_range(6..=12);
        // smaller disks leave room for more trips within the horizon
        params.radius_m = [5000.0, 3500.0, 2500.0][seed as usize / 3 % 3];
        let Ok(g) = random_instance(seed, s, n, &params) else {
            continue;
        };
        let mut inst = g.instance;
        // every third instance gets a battery that forces charging
        if seed % 3 == 0 {
            let longest = (1..=s)
                .map(|i| inst.energy(BASE, i) + inst.energy(i, BASE))
                .fold(0.0, f64::max);
            inst.battery_capacity = longest * rng.gen_range(1.0..2.0);
            inst.recharge.rate_per_slot = inst.battery_capacity / rng.gen_range(2.0..6.0);
            inst.recharge.min_slots = rng.gen_range(1..=2);
        }
        if inst.validate().is_empty() {
            out.push(inst);
        }
    }
    out
}

fn criterion_1(instances: &[Instance], replays: &mut Replays) -> Verdict {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        let exact = oracle_solve(inst, OracleLimits::default()).unwrap();
        let gla = solve(inst, UNBOUNDED).unwrap();
        replays.push("oracle", inst, exact.cost(), &exact.schedule);
        replays.push("gla", inst, gla.search_cost, &gla.solution.schedule);
        let gap = gla.search_cost - exact.cost();
        if gap.abs() > ORACLE_TOL {
            mismatches.push(format!("#{i} gap {gap:.6}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Verdict {
        pass: mismatches.is_empty() && secs < 60.0,
        detail: format!(
            "{}/{} instances match the oracle in {secs:.1}s{}",
            instances.len() - mismatches.len(),
            instances.len(),
            if mismatches.is_empty() {
                String::new()
            } else {
                format!("; mismatches: {}", mismatches.join(", "))
            }
        ),
    }
}

/// Dominator/dominated pairs at base-station cells.
#[derive(Default)]
struct BsPairs(Vec<(Label, Label)>);

impl SearchObserver for BsPairs {
    fn on_insert(&mut self, candidate: &Label, verdict: &DominanceVerdict, store: &LabelStore) {
        if candidate.location != BASE {
            return;
        }
        match verdict {
            DominanceVerdict::DiscardedDominated { by } => {
                self.0.push((store.label(*by).clone(), candidate.clone()));
            }
            DominanceVerdict::StoredAfterEvictions { evicted, .. } => {
                for e in evicted {
                    if e.reason == EvictionReason::Dominated {
                        self.0
                            .push((candidate.clone(), store.label(e.label).clone()));
                    }
                }
            }
            _ => {}
        }
    }
}

fn suffix_cost(inst: &Instance, label: &Label, actions: &[aoisched::Action]) -> Option<f64> {
    let mut sim = Simulator::at_base(inst, label.slot, label.battery, &label.aoi);
    for a in actions {
        sim.apply(a).ok()?;
    }
    let (_, report) = sim.finish().ok()?;
    Some(label.cost + report.cumulative_cost)
}

fn criterion_2(instances: &[Instance]) -> Verdict {
    let mut checked_instances = 0;
    let mut pairs = 0;
    let mut suffixes = 0usize;
    let mut violations = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        if inst.horizon_slots > 10 {
            continue;
        }
        checked_instances += 1;
        let mut obs = BsPairs::default();
        solve_observed(inst, UNBOUNDED, &mut obs).unwrap();
        for (winner, loser) in &obs.0 {
            pairs += 1;
            for_each_schedule(inst, loser.slot, loser.battery, &mut |actions| {
                suffixes += 1;
                let lose = suffix_cost(inst, loser, actions).expect("enumerated suffix is legal");
                match suffix_cost(inst, winner, actions) {
                    Some(win) if win <= lose + ORACLE_TOL => {}
                    other => {
                        violations.push(format!("#{i} slot {}: {other:?} vs {lose}", loser.slot))
                    }
                }
            });
        }
    }
    Verdict {
        pass: checked_instances >= 20 && violations.is_empty(),
        detail: format!(
            "{pairs} dominated BS labels on {checked_instances} instances, {suffixes} suffixes, {} violations",
            violations.len()
        ),
    }
}

fn random_cost(rng: &mut ChaCha8Rng) -> CostFn {
    match rng.gen_range(0..5) {
        0 => CostFn::linear(rng.gen_range(0.1..3.0)).unwrap(),
        1 => CostFn::quadratic(rng.gen_range(0.01..1.0)).unwrap(),
        2 => CostFn::exponential(rng.gen_range(0.1..2.0), rng.gen_range(0.01..0.3)).unwrap(),
        3 => {
            let low = rng.gen_range(0.0..1.0);
            CostFn::step(rng.gen_range(0.0..10.0), low, low + rng.gen_range(0.0..5.0)).unwrap()
        }
        _ => {
            let mut pts = vec![[0.0, rng.gen_range(0.0..1.0)]];
            for _ in 0..rng.gen_range(1..5) {
                let [x, y] = *pts.last().unwrap();
                pts.push([x + rng.gen_range(0.1..4.0), y + rng.gen_range(0.0..3.0)]);
            }
            CostFn::new(CostKind::PiecewiseLinear { breakpoints: pts }).unwrap()
        }
    }
}

fn random_symmetric(rng: &mut ChaCha8Rng) -> SymmetricInstance {
    let s = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=6);
    let r = rng.gen_range(0.2..2.0);
    let mut deps = vec![rng.gen_range(0.0..3.0)];
    for _ in 1..m {
        deps.push(deps.last().unwrap() + 2.0 * r + rng.gen_range(0.0..4.0));
    }
    let end = deps.last().unwrap() + 2.0 * r + rng.gen_range(0.0..4.0);
    let aoi = (0..s).map(|_| rng.gen_range(0.0..10.0)).collect();
    SymmetricInstance::new(s, r, random_cost(rng), aoi, deps, end).unwrap()
}

/// Cost of a visit sequence from generation times: the AoI of an SN at time
/// `t` is `t` minus the generation time of its freshest data at the base
/// station. Data read at `t_k + r` lands at `t_k + 2r`.
fn timeline_cost(inst: &SymmetricInstance, visits: &[usize]) -> f64 {
    let t0 = inst.departures[0];
    let mut total = 0.0;
    for s in 1..=inst.num_sns {
        let mut gen = t0 - inst.initial_aoi[s - 1];
        let mut from = t0;
        for (k, &v) in visits.iter().enumerate() {
            if v != s {
                continue;
            }
            let landing = inst.departures[k] + 2.0 * inst.radius;
            total += inst.cost.integral(from - gen, landing - gen);
            gen = inst.departures[k] + inst.radius;
            from = landing;
        }
        total += inst.cost.integral(from - gen, inst.end - gen);
    }
    total
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let trials = 120;
    for _ in 0..trials {
        let inst = random_symmetric(&mut rng);
        let policy = optimal_policy(&inst);
        let (s, m) = (inst.num_sns, inst.departures.len());
        let mut best = f64::INFINITY;
        let mut seq = vec![1; m];
        for code in 0..s.pow(m as u32) {
            let mut c = code;
            for v in seq.iter_mut() {
                *v = c % s + 1;
                c /= s;
            }
            best = best.min(timeline_cost(&inst, &seq));
        }
        let rel = (policy.total - best) / best.abs().max(1e-300);
        worst = worst.max(rel.abs());
        if rel.abs() > POLICY_REL_TOL && (policy.total - best).abs() > 1e-12 {
            failures += 1;
        }
    }
    Verdict {
        pass: failures == 0,
        detail: format!(
            "{trials} instances, {failures} off the exhaustive minimum, worst rel gap {worst:.2e}"
        ),
    }
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let draws = 1000;
    let mut failures = 0;
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..draws {
        let f = random_cost(&mut rng);
        let s = rng.gen_range(1..=8);
        let aoi: Vec<f64> = (0..s).map(|_| rng.gen_range(0.0..30.0)).collect();
        let r = rng.gen_range(0.05..5.0);
        let dt = 2.0 * r + rng.gen_range(0.0..20.0);
        let i = rng.gen_range(1..=s);
        let star = max_aoi_sn(&aoi);
        let hs = trip_cost(star, &aoi, dt, r, &f).unwrap();
        let hi = trip_cost(i, &aoi, dt, r, &f).unwrap();
        let rel = (hs - hi) / hi.abs().max(1.0);
        worst = worst.max(rel);
        if rel > TRIP_REL_TOL {
            failures += 1;
        }
    }
    Verdict {
        pass: failures == 0,
        detail: format!("{draws} draws, {failures} with the largest-AoI trip costlier, max rel excess {worst:.2e}"),
    }
}

fn canonical(edges: u8, perms: &[[usize; 4]], pairs: &[(usize, usize)]) -> u8 {
    perms
        .iter()
        .map(|p| {
            let mut out = 0u8;
            for (bit, &(a, b)) in pairs.iter().enumerate() {
                if edges & (1 << bit) != 0 {
                    let (x, y) = (p[a].min(p[b]), p[a].max(p[b]));
                    out |= 1 << pairs.iter().position(|&q| q == (x, y)).unwrap();
                }
            }
            out
        })
        .min()
        .unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn has_hamiltonian_path(graph: &Graph) -> bool {
    permutations(graph.nodes)
        .iter()
        .any(|p| p.windows(2).all(|w| graph.has_edge(w[0] + 1, w[1] + 1)))
}

fn criterion_5(replays: &mut Replays) -> Verdict {
    let pairs: Vec<(usize, usize)> = (0..4)
        .flat_map(|a| (a + 1..4).map(move |b| (a, b)))
        .collect();
    let perms: Vec<[usize; 4]> = permutations(4)
        .into_iter()
        .map(|p| [p[0], p[1], p[2], p[3]])
        .collect();
    let mut classes: Vec<u8> = (0..64u8).map(|e| canonical(e, &perms, &pairs)).collect();
    classes.sort_unstable();
    classes.dedup();

    let limits = OracleLimits {
        max_sns: 4,
        max_slots: 30,
    };
    let start = Instant::now();
    let mut mismatches = 0;
    let mut with_path = 0;
    for &class in &classes {
        let edges = pairs
            .iter()
            .enumerate()
            .filter(|(bit, _)| class & (1 << bit) != 0)
            .map(|(_, &(a, b))| (a + 1, b + 1))
            .collect();
        let graph = Graph::new(4, edges).unwrap();
        let inst = reduction_instance(&graph).unwrap();
        let zero = zero_cost_schedule(&inst, limits).unwrap();
        if let Some(s) = &zero {
            replays.push("zero-cost search", &inst, 0.0, s);
        }
        let ham = has_hamiltonian_path(&graph);
        with_path += usize::from(ham);
        if zero.is_some() != ham {
            mismatches += 1;
        }
    }
    Verdict {
        pass: classes.len() == 11 && mismatches == 0,
        detail: format!(
            "{} graph classes ({with_path} with a Hamiltonian path), {mismatches} mismatches, {:.1}s",
            classes.len(),
            start.elapsed().as_secs_f64()
        ),
    }
}

fn ensemble() -> Vec<Instance> {
    let params = GenParams::default();
    (0..20)
        .map(|seed| random_instance(seed, 20, 100, &params).unwrap().instance)
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

struct KRun {
    cost: f64,
    millis: f64,
}

fn run_k(instances: &[Instance], k: usize, replays: &mut Replays) -> KRun {
    let mut costs = Vec::new();
    let mut times = Vec::new();
    for inst in instances {
        let start = Instant::now();
        let out = solve(inst, k).unwrap();
        times.push(start.elapsed().as_secs_f64() * 1e3);
        costs.push(out.solution.report.normalized_cost);
        replays.push("gla", inst, out.search_cost, &out.solution.schedule);
    }
    KRun {
        cost: mean(&costs),
        millis: mean(&times),
    }
}

fn criterion_6(instances: &[Instance], k1: &KRun, replays: &mut Replays) -> Verdict {
    let greedy: Vec<f64> = instances
        .iter()
        .map(|inst| {
            let g = greedy_solve(inst).unwrap();
            replays.push("greedy", inst, g.cost(), &g.schedule);
            g.report.normalized_cost
        })
        .collect();
    let g = mean(&greedy);
    let improvement = (g - k1.cost) / g;
    Verdict {
        pass: k1.cost < g && improvement >= 0.05,
        detail: format!(
            "mean normalized cost GLA(K=1) {:.4} vs greedy {g:.4}, improvement {:.1}%",
            k1.cost,
            improvement * 100.0
        ),
    }
}

fn criterion_7(runs: &[(usize, KRun)]) -> Verdict {
    let cost = |k| runs.iter().find(|r| r.0 == k).unwrap().1.cost;
    let increasing = runs.windows(2).all(|w| w[1].1.millis > w[0].1.millis);
    let summary: Vec<String> = runs
        .iter()
        .map(|(k, r)| format!("K={k}: {:.4} in {:.1}ms", r.cost, r.millis))
        .collect();
    Verdict {
        pass: cost(10) <= cost(1) && increasing,
        detail: summary.join(", "),
    }
}

fn criterion_8(replays: &Replays) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (solver, inst, cost, schedule) in &replays.0 {
        match replay_cost(schedule, inst) {
            Ok(c) => {
                let gap = (c - cost).abs();
                worst = worst.max(gap);
                if gap > REPLAY_TOL {
                    failures.push(format!("{solver} gap {gap:.2e}"));
                }
            }
            Err(e) => failures.push(format!("{solver}: {e}")),
        }
    }
    Verdict {
        pass: failures.is_empty(),
        detail: format!(
            "{} runs replayed, {} inconsistent, worst gap {worst:.1e}",
            replays.0.len(),
            failures.len()
        ),
    }
}

struct CellAudit {
    capacity: usize,
    inserts: usize,
    violations: usize,
}

impl SearchObserver for CellAudit {
    fn on_insert(&mut self, candidate: &Label, _: &DominanceVerdict, store: &LabelStore) {
        self.inserts += 1;
        let ids = store.cell(candidate.location, candidate.slot);
        if ids.len() > self.capacity {
            self.violations += 1;
        }
        for &a in ids {
            for &b in ids {
                if a != b && dominates(store.label(a), store.label(b)) {
                    self.violations += 1;
                }
            }
        }
    }
}

fn criterion_9(small: &[Instance], large: &[Instance]) -> Verdict {
    let mut inserts = 0;
    let mut violations = 0;
    let mut runs = 0;
    let mut audit = |inst: &Instance, k: usize| {
        let mut obs = CellAudit {
            capacity: k,
            inserts: 0,
            violations: 0,
        };
        let out = solve_observed(inst, k, &mut obs).unwrap();
        if out.store.max_cell_len() > k {
            obs.violations += 1;
        }
        inserts += obs.inserts;
        violations += obs.violations;
        runs += 1;
    };
    for inst in small {
        for k in [1, 2, 3, UNBOUNDED] {
            audit(inst, k);
        }
    }
    for inst in large.iter().take(3) {
        for k in [1, 5] {
            audit(inst, k);
        }
    }
    Verdict {
        pass: violations == 0,
        detail: format!("{runs} runs, {inserts} insertions audited, {violations} violations"),
    }
}

fn symmetric_replays(replays: &mut Replays) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let s = rng.gen_range(1..=4);
        let r = rng.gen_range(1..=3u32);
        let m = rng.gen_range(1..=6);
        let gap = 2 * r + rng.gen_range(1..=3);
        let deps = (0..m).map(|k| f64::from(k * gap)).collect();
        let sym = SymmetricInstance::new(
            s,
            f64::from(r),
            random_cost(&mut rng),
            vec![0.0; s],
            deps,
            f64::from(m * gap),
        )
        .unwrap();
        let inst = to_slotted(&sym).unwrap();
        let sol = symmetric_solve(&inst).unwrap();
        replays.push("symmetric", &inst, sol.cost(), &sol.schedule);
    }
}

fn report(failed: &mut usize, n: usize, name: &str, v: Verdict) {
    let status = if v.pass { "PASS" } else { "FAIL" };
    println!("criterion {n} [{status}] {name}: {}", v.detail);
    *failed += usize::from(!v.pass);
}

fn main() -> ExitCode {
    let mut replays = Replays::default();
    let mut failed = 0;
    let small = small_instances();
    let large = ensemble();

    let v = criterion_1(&small, &mut replays);
    report(&mut failed, 1, "oracle equivalence", v);
    report(
        &mut failed,
        2,
        "BS dominance soundness",
        criterion_2(&small),
    );
    report(
        &mut failed,
        3,
        "largest-AoI policy optimality",
        criterion_3(),
    );
    report(&mut failed, 4, "largest-AoI trip cost", criterion_4());
    let v = criterion_5(&mut replays);
    report(&mut failed, 5, "reduction correctness", v);
    let runs: Vec<(usize, KRun)> = [1, 5, 10]
        .into_iter()
        .map(|k| (k, run_k(&large, k, &mut replays)))
        .collect();
    let v = criterion_6(&large, &runs[0].1, &mut replays);
    report(&mut failed, 6, "GLA vs greedy", v);
    report(&mut failed, 7, "K trend", criterion_7(&runs));
    symmetric_replays(&mut replays);
    report(&mut failed, 8, "replay consistency", criterion_8(&replays));
    report(
        &mut failed,
        9,
        "label capacity",
        criterion_9(&small, &large),
    );

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
