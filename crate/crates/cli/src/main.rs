mod sweep;
mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use aoisched::aoi::{replay, RunReport};
use aoisched::greedy::greedy_solve;
use aoisched::instances::{random_instance, reduction_instance, GenParams, Graph};
use aoisched::labeling::{self, UNBOUNDED};
use aoisched::oracle::{oracle_solve, OracleLimits};
use aoisched::symmetric::symmetric_solve;
use aoisched::{Instance, Schedule, Solution};

/// Thread count for parallel sweeps and verification.
const THREADS_ENV: &str = "AOISCHED_THREADS";

#[derive(Parser)]
#[command(
    name = "aoisched",
    version,
    about = "AoI-aware UAV data-collection scheduling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Solve an instance and print the schedule and its report as JSON.
    Solve(SolveArgs),
    /// Run a solver ensemble over a parameter range and write CSV.
    Sweep(sweep::SweepArgs),
    /// Cross-check the solvers on small random instances.
    Verify(verify::VerifyArgs),
}

#[derive(Subcommand)]
enum GenCommand {
    /// SNs scattered over a disk around the base station.
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        sns: usize,
        /// Horizon in slots.
        #[arg(long, default_value_t = 100)]
        horizon: u32,
        #[arg(long, default_value_t = 1.0)]
        slot_len: f64,
        /// Battery capacity in flight minutes.
        #[arg(long, default_value_t = 25.0)]
        battery: f64,
        /// Minutes to charge an empty battery.
        #[arg(long, default_value_t = 50.0)]
        recharge_time: f64,
        #[arg(long, default_value_t = 1)]
        min_charge_slots: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the node coordinates (BS first) as JSON.
        #[arg(long)]
        coords: Option<PathBuf>,
    },
    /// Instance with zero optimal cost iff the graph has a Hamiltonian path.
    Reduction {
        /// Edge list, one `i j` pair per line, nodes numbered from 1.
        #[arg(long)]
        graph: PathBuf,
        /// Node count; defaults to the largest index in the edge list.
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Gla,
    Greedy,
    Oracle,
    Symmetric,
}

/// Label capacity: a positive integer or `inf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Capacity(pub usize);

impl FromStr for Capacity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("inf") {
            return Ok(Self(UNBOUNDED));
        }
        match s.parse::<usize>() {
            Ok(0) => Err("K must be at least 1".into()),
            Ok(k) => Ok(Self(k)),
            Err(_) => Err(format!("expected a positive integer or `inf`, got {s:?}")),
        }
    }
}

impl Serialize for Capacity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == UNBOUNDED {
            s.serialize_str("inf")
        } else {
            s.serialize_u64(self.0 as u64)
        }
    }
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value_t = Algo::Gla)]
    algo: Algo,
    /// Labels kept per cell by `gla`.
    #[arg(long, default_value = "1")]
    k: Capacity,
    #[arg(long)]
    instance: PathBuf,
    /// Oracle size limits.
    #[arg(long, default_value_t = 4)]
    max_sns: usize,
    #[arg(long, default_value_t = 14)]
    max_slots: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-slot trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    algo: Algo,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<Capacity>,
    cost: f64,
    normalized_cost: f64,
    runtime_ms: f64,
    schedule: &'a Schedule,
    report: &'a RunReport,
}

pub fn run_solver(
    algo: Algo,
    k: usize,
    instance: &Instance,
    limits: OracleLimits,
) -> Result<Solution> {
    let solution = match algo {
        Algo::Gla => labeling::solve(instance, k)?.solution,
        Algo::Greedy => greedy_solve(instance)?,
        Algo::Oracle => oracle_solve(instance, limits)?,
        Algo::Symmetric => symmetric_solve(instance)?,
    };
    Ok(solution)
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let instance: Instance = serde_json::from_str(&text)
        .with_context(|| format!("parsing instance {}", path.display()))?;
    let violations = instance.validate();
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        bail!("invalid instance {}:\n{}", path.display(), lines.join("\n"));
    }
    Ok(instance)
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, contents).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn write_trace(path: &Path, report: &RunReport, num_sns: usize) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    let mut header = vec!["slot".to_string(), "total_cost".into(), "battery".into()];
    header.extend((1..=num_sns).map(|s| format!("aoi_s{s}")));
    w.write_record(&header)?;
    for (i, cost) in report.slot_costs.iter().enumerate() {
        let mut row = vec![
            (i + 1).to_string(),
            cost.to_string(),
            report.battery[i].to_string(),
        ];
        row.extend(report.aoi[i].iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    Ok(w.flush()?)
}

fn solve(args: &SolveArgs) -> Result<()> {
    let instance = load_instance(&args.instance)?;
    let limits = OracleLimits {
        max_sns: args.max_sns,
        max_slots: args.max_slots,
    };
    let start = std::time::Instant::now();
    let solution = run_solver(args.algo, args.k.0, &instance, limits)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;

    let replayed = replay(&solution.schedule, &instance)?;
    if replayed.cumulative_cost != solution.cost() {
        bail!(
            "schedule replays to {} but the solver reported {}",
            replayed.cumulative_cost,
            solution.cost()
        );
    }
    if let Some(path) = &args.trace {
        write_trace(path, &solution.report, instance.num_sns)?;
    }
    let output = SolveOutput {
        algo: args.algo,
        k: (args.algo == Algo::Gla).then_some(args.k),
        cost: solution.cost(),
        normalized_cost: solution.report.normalized_cost,
        runtime_ms,
        schedule: &solution.schedule,
        report: &solution.report,
    };
    let mut json = serde_json::to_string_pretty(&output)?;
    json.push('\n');
    write_output(args.out.as_deref(), &json)
}

fn gen(cmd: &GenCommand) -> Result<()> {
    match cmd {
        GenCommand::Random {
            seed,
            sns,
            horizon,
            slot_len,
            battery,
            recharge_time,
            min_charge_slots,
            out,
            coords,
        } => {
            let params = GenParams {
                slot_len_min: *slot_len,
                battery_min: *battery,
                recharge_time_min: *recharge_time,
                min_charge_slots: *min_charge_slots,
                ..GenParams::default()
            };
            let g = random_instance(*seed, *sns, *horizon, &params)?;
            if let Some(path) = coords {
                let text = serde_json::to_string_pretty(&g.coords)? + "\n";
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            let text = serde_json::to_string_pretty(&g.instance)? + "\n";
            write_output(out.as_deref(), &text)
        }
        GenCommand::Reduction { graph, nodes, out } => {
            let text = fs::read_to_string(graph)
                .with_context(|| format!("reading {}", graph.display()))?;
            let graph = Graph::parse_edge_list(&text, *nodes)?;
            let instance = reduction_instance(&graph)?;
            let text = serde_json::to_string_pretty(&instance)? + "\n";
            write_output(out.as_deref(), &text)
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .parse()
            .with_context(|| format!("{THREADS_ENV}={value:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    match cli.command {
        Command::Gen(cmd) => gen(&cmd).map(|_| true),
        Command::Solve(args) => solve(&args).map(|_| true),
        Command::Sweep(args) => sweep::run(&args).map(|_| true),
        Command::Verify(args) => verify::run(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
