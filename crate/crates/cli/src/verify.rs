use anyhow::Result;
use rayon::prelude::*;

use aoisched::aoi::replay_cost;
use aoisched::greedy::greedy_solve;
use aoisched::instances::{random_instance, GenParams};
use aoisched::labeling::{self, UNBOUNDED};
use aoisched::oracle::{oracle_solve, OracleLimits};
use aoisched::{Instance, Schedule};

const TOL: f64 = 1e-9;

#[derive(clap::Args)]
pub struct VerifyArgs {
    /// Number of random instances.
    #[arg(long, default_value_t = 30)]
    instances: u64,
    /// First seed; instance i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn check_replay(failures: &mut Vec<String>, tag: &str, inst: &Instance, cost: f64, s: &Schedule) {
    match replay_cost(s, inst) {
        Ok(c) if (c - cost).abs() <= TOL => {}
        Ok(c) => failures.push(format!("{tag}: reported {cost} but replays to {c}")),
        Err(e) => failures.push(format!("{tag}: schedule does not replay: {e}")),
    }
}

fn check(seed: u64) -> Result<Vec<String>> {
    let sns = 1 + (seed % 3) as usize;
    let horizon = 6 + (seed % 7) as u32;
    let inst = random_instance(seed, sns, horizon, &GenParams::default())?.instance;
    let mut failures = Vec::new();
    let tag = |what: &str| format!("seed {seed} (S={sns}, N={horizon}) {what}");

    let exact = oracle_solve(&inst, OracleLimits::default())?;
    check_replay(
        &mut failures,
        &tag("oracle"),
        &inst,
        exact.cost(),
        &exact.schedule,
    );

    let greedy = greedy_solve(&inst)?;
    check_replay(
        &mut failures,
        &tag("greedy"),
        &inst,
        greedy.cost(),
        &greedy.schedule,
    );
    if greedy.cost() < exact.cost() - TOL {
        failures.push(tag(&format!(
            "greedy {} beats the oracle {}",
            greedy.cost(),
            exact.cost()
        )));
    }

    for k in [1, 2, 3, UNBOUNDED] {
        let name = if k == UNBOUNDED {
            "inf".to_string()
        } else {
            k.to_string()
        };
        let out = labeling::solve(&inst, k)?;
        let what = tag(&format!("gla K={name}"));
        check_replay(
            &mut failures,
            &what,
            &inst,
            out.search_cost,
            &out.solution.schedule,
        );
        if out.store.max_cell_len() > k {
            failures.push(format!(
                "{what}: a cell holds {} labels",
                out.store.max_cell_len()
            ));
        }
        if out.search_cost < exact.cost() - TOL {
            failures.push(format!(
                "{what}: {} beats the oracle {}",
                out.search_cost,
                exact.cost()
            ));
        }
        if k == UNBOUNDED && (out.search_cost - exact.cost()).abs() > TOL {
            failures.push(format!(
                "{what}: {} differs from the oracle {}",
                out.search_cost,
                exact.cost()
            ));
        }
    }
    Ok(failures)
}

/// Prints one line per failed check and a summary; returns whether every
/// check passed.
pub fn run(args: &VerifyArgs) -> Result<bool> {
    let results: Vec<Vec<String>> = (args.seed..args.seed + args.instances)
        .into_par_iter()
        .map(check)
        .collect::<Result<_>>()?;
    let failures: Vec<String> = results.into_iter().flatten().collect();
    for f in &failures {
        println!("FAIL {f}");
    }
    println!(
        "verified {} instances: {} failed checks",
        args.instances,
        failures.len()
    );
    Ok(failures.is_empty())
}
