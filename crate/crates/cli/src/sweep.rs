use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::ValueEnum;
use rayon::prelude::*;

use aoisched::instances::{random_instance, GenParams};
use aoisched::oracle::OracleLimits;

use crate::{run_solver, Algo, Capacity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Vary {
    /// Horizon length.
    T,
    /// Number of SNs.
    S,
    /// Labels per cell.
    K,
}

#[derive(clap::Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    vary: Vary,
    /// Instances (seeds 0..M) per point.
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    /// Points to evaluate; defaults depend on --vary.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<usize>>,
    #[arg(long, default_value_t = 20)]
    sns: usize,
    #[arg(long, default_value_t = 100)]
    horizon: u32,
    /// K used by gla when sweeping T or S.
    #[arg(long, default_value = "1")]
    k: Capacity,
    /// Solvers compared when sweeping T or S.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "gla,greedy")]
    algos: Vec<Algo>,
    /// Leave the runtime column empty so output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Run {
    point: usize,
    algo: Algo,
    cost: f64,
    millis: f64,
}

fn default_values(vary: Vary) -> Vec<usize> {
    match vary {
        Vary::T => vec![25, 50, 75, 100, 125, 150],
        Vary::S => vec![5, 10, 15, 20, 25],
        Vary::K => (1..=12).chain([15, 20]).collect(),
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn run(args: &SweepArgs) -> Result<()> {
    if args.seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    let values = args
        .values
        .clone()
        .unwrap_or_else(|| default_values(args.vary));
    if values.contains(&0) {
        bail!("sweep values must be positive");
    }
    let algos: Vec<Algo> = match args.vary {
        Vary::K => vec![Algo::Gla],
        _ => args.algos.clone(),
    };
    let params = GenParams::default();
    let jobs: Vec<(usize, u64)> = values
        .iter()
        .flat_map(|&v| (0..args.seeds).map(move |seed| (v, seed)))
        .collect();

    let runs: Vec<Vec<Run>> = jobs
        .par_iter()
        .map(|&(point, seed)| -> Result<Vec<Run>> {
            let (sns, horizon, k) = match args.vary {
                Vary::T => (args.sns, point as u32, args.k.0),
                Vary::S => (point, args.horizon, args.k.0),
                Vary::K => (args.sns, args.horizon, point),
            };
            let instance = random_instance(seed, sns, horizon, &params)?.instance;
            algos
                .iter()
                .map(|&algo| {
                    let start = Instant::now();
                    let sol = run_solver(algo, k, &instance, OracleLimits::default())?;
                    Ok(Run {
                        point,
                        algo,
                        cost: sol.report.normalized_cost,
                        millis: start.elapsed().as_secs_f64() * 1e3,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let runs: Vec<Run> = runs.into_iter().flatten().collect();

    let sink: Box<dyn std::io::Write> = match &args.out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let param = match args.vary {
        Vary::T => "T",
        Vary::S => "S",
        Vary::K => "K",
    };
    w.write_record([param, "algo", "mean_cost", "std", "mean_runtime_ms"])?;
    for &v in &values {
        for &algo in &algos {
            let selected: Vec<&Run> = runs
                .iter()
                .filter(|r| r.point == v && r.algo == algo)
                .collect();
            let costs: Vec<f64> = selected.iter().map(|r| r.cost).collect();
            let times: Vec<f64> = selected.iter().map(|r| r.millis).collect();
            let (mean, std) = mean_std(&costs);
            let runtime = if args.no_timing {
                String::new()
            } else {
                format!("{:.3}", mean_std(&times).0)
            };
            let name = format!("{algo:?}").to_lowercase();
            w.write_record([
                v.to_string(),
                name,
                format!("{mean:.6}"),
                format!("{std:.6}"),
                runtime,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_statistics() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - 1.290_994_448_735_805_6).abs() < 1e-12);
        assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
    }

    #[test]
    fn default_ranges() {
        assert_eq!(default_values(Vary::T).first(), Some(&25));
        assert_eq!(default_values(Vary::T).last(), Some(&150));
        assert_eq!(default_values(Vary::S), vec![5, 10, 15, 20, 25]);
        assert!(default_values(Vary::K).contains(&12));
    }
}
