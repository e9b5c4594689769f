use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use roa_core::anneal::{solve_sa, solve_sqa, SaSchedule, SqaParams};
use roa_core::bench::{
    read_records, run_benchmark, run_solver, summarize, write_long, write_run_dir, write_summary, BenchConfig,
    RunOptions, SolverKind,
};
use roa_core::instgen::{generate, normalize, GenConfig};
use roa_core::model::{check_all, evaluate_objective, penalized_objective};
use roa_core::qubo::{build_qubo, default_penalties, to_ising};
use roa_core::{Instance, QuboModel};
use serde_json::json;

#[derive(Parser)]
#[command(name = "roa", version, about = "Rider-order assignment solvers and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate raw instances as DIR/n{size}_s{seed}.json.
    Gen {
        #[arg(long)]
        size: usize,
        /// Inclusive range `A..B`, or a single seed.
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance and write the repaired assignment with its metrics.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solver: String,
        /// Seconds allowed to the exact solver.
        #[arg(long, default_value_t = 30.0)]
        time_limit: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the size × seed × solver matrix and write DIR/results.csv.
    Bench {
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long)]
        seeds: String,
        /// Comma-separated solver names; omitted means the default set per size.
        #[arg(long)]
        solvers: Option<String>,
        #[arg(long, default_value_t = 30.0)]
        time_limit: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize DIR/results.csv into FILE and FILE's `_long.csv` sibling.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the normalized instance's penalized QUBO as JSON.
    ExportQubo {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Anneal a QUBO JSON file with `sqa` (default) or `sa`.
    Anneal {
        #[arg(long)]
        qubo: PathBuf,
        #[arg(long, default_value = "sqa")]
        method: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let parse = |s: &str| s.trim().parse::<u64>().with_context(|| format!("bad seed `{s}`"));
    match text.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (parse(a)?, parse(b)?);
            if a > b {
                bail!("empty seed range `{text}`");
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![parse(text)?]),
    }
}

fn parse_solvers(text: &str) -> Result<Vec<SolverKind>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<SolverKind>().map_err(Into::into))
        .collect()
}

fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Instance::from_json(&text)?)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn long_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("summary");
    out.with_file_name(format!("{stem}_long.csv"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { size, seeds, out } => {
            fs::create_dir_all(&out)?;
            for seed in parse_seeds(&seeds)? {
                let inst: Instance = generate(&GenConfig::new(size, seed))?;
                write(&out.join(format!("n{size}_s{seed}.json")), &inst.to_json()?)?;
            }
        }
        Command::Solve {
            instance,
            solver,
            time_limit,
            seed,
            out,
        } => {
            let solver: SolverKind = solver.parse()?;
            let inst = normalize(&read_instance(&instance)?);
            let pen = default_penalties(&inst);
            let opts = RunOptions {
                seed,
                exact_time_limit: Duration::from_secs_f64(time_limit),
                ..RunOptions::default()
            };
            let res = run_solver(&inst, &pen, solver, &opts)?;
            let report = check_all(&inst, &res.assignment)?;
            let doc = json!({
                "solver": solver.name(),
                "seed": seed,
                "status": res.status.to_string(),
                "assignment": res.assignment,
                "objective": evaluate_objective(&inst, &res.assignment)?,
                "penalized_objective": penalized_objective(&inst, &res.assignment, pen.soft())?,
                "raw_energy": res.raw_energy,
                "pre_repair_hard_violations": res.pre_repair_hard_violations,
                "gf_violations": report.gf_violations,
                "sla_violations": report.sla_violations,
                "repair": res.repair,
                "runtime_ms": res.runtime.as_secs_f64() * 1e3,
                "repair_ms": res.repair_time.as_secs_f64() * 1e3,
                "penalties": pen,
            });
            write(&out, &serde_json::to_string_pretty(&doc)?)?;
        }
        Command::Bench {
            sizes,
            seeds,
            solvers,
            time_limit,
            out,
        } => {
            let seeds = parse_seeds(&seeds)?;
            let mut runs = Vec::new();
            let explicit = solvers.as_deref().map(parse_solvers).transpose()?;
            for size in sizes {
                let set = explicit.clone().unwrap_or_else(|| SolverKind::defaults_for(size));
                let mut cfg = BenchConfig::new(vec![size], seeds.clone(), set);
                cfg.run.exact_time_limit = Duration::from_secs_f64(time_limit);
                runs.extend(run_benchmark(&cfg)?);
            }
            for r in runs.iter().filter(|r| r.error.is_some()) {
                eprintln!(
                    "n={} seed={} {}: {}",
                    r.size,
                    r.seed,
                    r.solver,
                    r.error.as_deref().unwrap_or_default()
                );
            }
            write_run_dir(&out, &runs)?;
        }
        Command::Report { input, out } => {
            let records = read_records(&input.join("results.csv"))?;
            let rows = summarize(&records);
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            write_summary(&out, &rows)?;
            write_long(&long_path(&out), &rows)?;
        }
        Command::ExportQubo { instance, out } => {
            let inst = normalize(&read_instance(&instance)?);
            let qubo = build_qubo(&inst, &default_penalties(&inst), false)?;
            write(&out, &qubo.to_json()?)?;
        }
        Command::Anneal { qubo, method, seed, out } => {
            let text = fs::read_to_string(&qubo).with_context(|| format!("reading {}", qubo.display()))?;
            let qubo = QuboModel::from_json(&text)?;
            let ising = to_ising(&qubo);
            let run = match method.as_str() {
                "sqa" => solve_sqa(&ising, &SqaParams::for_model(&ising, seed))?,
                "sa" => solve_sa(&ising, &SaSchedule::for_model(&ising, seed))?,
                other => bail!("unknown annealing method `{other}` (expected sqa or sa)"),
            };
            let bits: Vec<u8> = run.result.bits.iter().map(|&b| u8::from(b)).collect();
            let doc = json!({
                "method": method,
                "seed": seed,
                "bits": bits,
                "energy": qubo.energy(&run.result.bits)?,
                "runtime_ms": run.result.elapsed.as_secs_f64() * 1e3,
            });
            write(&out, &serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert!(parse_seeds("4..2").is_err());
        assert!(parse_seeds("a..2").is_err());
    }

    #[test]
    fn solver_lists() {
        assert_eq!(
            parse_solvers("greedy, exact").unwrap(),
            vec![SolverKind::Greedy, SolverKind::Exact]
        );
        assert!(parse_solvers("").unwrap().is_empty());
        assert!(parse_solvers("greedy,cim").is_err());
    }

    #[test]
    fn long_report_name() {
        assert_eq!(long_path(Path::new("out/summary.csv")), PathBuf::from("out/summary_long.csv"));
    }
}
