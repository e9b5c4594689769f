//! Solver × size × seed benchmark matrix and its CSV reports.

mod report;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anneal::{solve_sa, solve_sqa, SaSchedule, SqaParams};
use crate::error::{Error, Result};
use crate::exact::solve_exact;
use crate::greedy::solve_greedy;
use crate::instgen::{generate, normalize, GenConfig};
use crate::model::{check_all, check_hard, evaluate_objective, penalized_objective, Assignment, Instance};
use crate::quantum::{solve_qaoa, solve_qaoansatz, QaoaParams};
use crate::qubo::{build_qubo, default_penalties, to_ising, PenaltyWeights};
use crate::repair::{repair, RepairStats};
use crate::solution::SolveResult;

pub use report::{read_records, summarize, write_long, write_records, write_summary, SummaryRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Greedy,
    Exact,
    Sa,
    Sqa,
    Qaoa,
    Qaoansatz,
}

impl SolverKind {
    pub const ALL: [SolverKind; 6] = [
        SolverKind::Greedy,
        SolverKind::Exact,
        SolverKind::Sa,
        SolverKind::Sqa,
        SolverKind::Qaoa,
        SolverKind::Qaoansatz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Greedy => "greedy",
            SolverKind::Exact => "exact",
            SolverKind::Sa => "sa",
            SolverKind::Sqa => "sqa",
            SolverKind::Qaoa => "qaoa",
            SolverKind::Qaoansatz => "qaoansatz",
        }
    }

    /// Solvers that minimize the QUBO and so have a raw energy.
    pub fn is_qubo(self) -> bool {
        !matches!(self, SolverKind::Greedy | SolverKind::Exact)
    }

    /// `{exact, greedy, qaoa, qaoansatz}` at n ≤ 2, where the statevector
    /// stays small, `{exact, greedy, sa, sqa}` above.
    pub fn defaults_for(size: usize) -> Vec<SolverKind> {
        use SolverKind::*;
        if size <= 2 {
            vec![Exact, Greedy, Qaoa, Qaoansatz]
        } else {
            vec![Exact, Greedy, Sa, Sqa]
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownSolver(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Exact search finished and proved optimality.
    Optimal,
    /// Exact search stopped at its time limit; the incumbent is reported.
    TimeLimit,
    QubitLimit,
    Infeasible,
    Error,
}

impl Status {
    pub fn succeeded(self) -> bool {
        matches!(self, Status::Ok | Status::Optimal | Status::TimeLimit)
    }

    fn of_error(e: &Error) -> Self {
        match e {
            Error::QubitLimit { .. } => Status::QubitLimit,
            Error::Infeasible { .. } | Error::NoFeasibleAssignment => Status::Infeasible,
            _ => Status::Error,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(s.as_str().unwrap_or_default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub exact_time_limit: Duration,
    pub qaoa: QaoaParams,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            exact_time_limit: Duration::from_secs(30),
            qaoa: QaoaParams::default(),
        }
    }
}

/// One solve followed by repair.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub status: Status,
    pub raw: SolveResult<f64>,
    /// Full penalized-QUBO energy of the raw bits, for QUBO solvers.
    pub raw_energy: Option<f64>,
    pub pre_repair_hard_violations: usize,
    pub assignment: Assignment,
    pub repair: RepairStats,
    pub runtime: Duration,
    pub repair_time: Duration,
}

/// Runs `solver` on an already normalized instance, then repairs its output
/// with the soft weights of `pen`.
pub fn run_solver(
    inst: &Instance<f64>,
    pen: &PenaltyWeights<f64>,
    solver: SolverKind,
    opts: &RunOptions,
) -> Result<RunOutput> {
    let soft = pen.soft();
    let needs_qubo = solver.is_qubo();
    let qubo = if needs_qubo { Some(build_qubo(inst, pen, false)?) } else { None };
    let qaoa = QaoaParams {
        seed: opts.seed,
        ..opts.qaoa
    };

    let start = Instant::now();
    let (mut raw, status) = match solver {
        SolverKind::Greedy => (solve_greedy(inst)?, Status::Ok),
        SolverKind::Exact => {
            let sol = solve_exact(inst, soft, opts.exact_time_limit)?;
            let status = if sol.optimal { Status::Optimal } else { Status::TimeLimit };
            (sol.result, status)
        }
        SolverKind::Sa => {
            let ising = to_ising(qubo.as_ref().expect("built above"));
            (solve_sa(&ising, &SaSchedule::for_model(&ising, opts.seed))?.result, Status::Ok)
        }
        SolverKind::Sqa => {
            let ising = to_ising(qubo.as_ref().expect("built above"));
            (solve_sqa(&ising, &SqaParams::for_model(&ising, opts.seed))?.result, Status::Ok)
        }
        SolverKind::Qaoa => (solve_qaoa(inst, pen, &qaoa)?.result, Status::Ok),
        SolverKind::Qaoansatz => (solve_qaoansatz(inst, pen, &qaoa)?.result, Status::Ok),
    };
    let runtime = start.elapsed();
    raw.elapsed = runtime;

    let layout = qubo.as_ref().map(|q| q.layout.clone());
    let before = match &layout {
        Some(l) => raw.assignment(l)?,
        None => Assignment::from_flat(inst.num_riders(), inst.num_orders(), &raw.bits)?,
    };
    let raw_energy = match &qubo {
        Some(q) => Some(q.energy(&raw.bits)?),
        None => None,
    };
    let pre_repair_hard_violations = check_hard(inst, &before)?.hard_count();

    let start = Instant::now();
    let (assignment, stats) = repair(inst, &before, soft)?;
    let repair_time = start.elapsed();

    Ok(RunOutput {
        status,
        raw,
        raw_energy,
        pre_repair_hard_violations,
        assignment,
        repair: stats,
        runtime,
        repair_time,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum PenaltyRule {
    /// [`default_penalties`] per instance.
    Default,
    Fixed(PenaltyWeights<f64>),
}

impl PenaltyRule {
    pub fn weights(&self, inst: &Instance<f64>) -> PenaltyWeights<f64> {
        match self {
            PenaltyRule::Default => default_penalties(inst),
            PenaltyRule::Fixed(p) => *p,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub solvers: Vec<SolverKind>,
    pub penalties: PenaltyRule,
    pub run: RunOptions,
    /// Worker threads; `None` reads `BENCH_WORKERS`, else all cores.
    pub workers: Option<usize>,
}

impl BenchConfig {
    pub fn new(sizes: Vec<usize>, seeds: Vec<u64>, solvers: Vec<SolverKind>) -> Self {
        Self {
            sizes,
            seeds,
            solvers,
            penalties: PenaltyRule::Default,
            run: RunOptions::default(),
            workers: None,
        }
    }

    fn worker_count(&self) -> usize {
        self.workers
            .or_else(|| std::env::var("BENCH_WORKERS").ok()?.trim().parse().ok())
            .filter(|&w| w > 0)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

/// One row of the results CSV. Columns appear in field order; `None` is a
/// blank cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub size: usize,
    pub seed: u64,
    pub solver: String,
    pub status: String,
    pub raw_energy: Option<f64>,
    pub pre_repair_hard_violations: Option<usize>,
    pub post_objective: Option<f64>,
    pub penalized_objective: Option<f64>,
    pub norm_objective: Option<f64>,
    pub gf_violations: Option<usize>,
    pub sla_violations: Option<usize>,
    pub runtime_ms: Option<f64>,
    pub repair_ms: Option<f64>,
    pub repaired: Option<bool>,
}

pub const RESULTS_HEADER: [&str; 14] = [
    "size",
    "seed",
    "solver",
    "status",
    "raw_energy",
    "pre_repair_hard_violations",
    "post_objective",
    "penalized_objective",
    "norm_objective",
    "gf_violations",
    "sla_violations",
    "runtime_ms",
    "repair_ms",
    "repaired",
];

#[derive(Clone, Debug)]
pub struct BenchRun {
    pub size: usize,
    pub seed: u64,
    pub solver: SolverKind,
    pub record: BenchRecord,
    /// Post-repair assignment of a successful run.
    pub assignment: Option<Assignment>,
    pub error: Option<String>,
}

/// The normalized instance and penalty weights every solver sees.
pub fn bench_instance(size: usize, seed: u64, rule: &PenaltyRule) -> Result<(Instance<f64>, PenaltyWeights<f64>)> {
    let inst = normalize(&generate::<f64>(&GenConfig::new(size, seed))?);
    let pen = rule.weights(&inst);
    Ok((inst, pen))
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn execute(size: usize, seed: u64, solver: SolverKind, cfg: &BenchConfig) -> BenchRun {
    let mut record = BenchRecord {
        size,
        seed,
        solver: solver.name().to_string(),
        status: Status::Error.to_string(),
        raw_energy: None,
        pre_repair_hard_violations: None,
        post_objective: None,
        penalized_objective: None,
        norm_objective: None,
        gf_violations: None,
        sla_violations: None,
        runtime_ms: None,
        repair_ms: None,
        repaired: None,
    };
    let outcome = (|| -> Result<_> {
        let (inst, pen) = bench_instance(size, seed, &cfg.penalties)?;
        let opts = RunOptions { seed, ..cfg.run };
        let out = run_solver(&inst, &pen, solver, &opts)?;
        let report = check_all(&inst, &out.assignment)?;
        let post = evaluate_objective(&inst, &out.assignment)?;
        let penalized = penalized_objective(&inst, &out.assignment, pen.soft())?;
        Ok((out, report, post, penalized))
    })();
    match outcome {
        Ok((out, report, post, penalized)) => {
            record.status = out.status.to_string();
            record.raw_energy = out.raw_energy;
            record.pre_repair_hard_violations = Some(out.pre_repair_hard_violations);
            record.post_objective = Some(post);
            record.penalized_objective = Some(penalized);
            record.gf_violations = Some(report.gf_violations);
            record.sla_violations = Some(report.sla_violations);
            record.runtime_ms = Some(millis(out.runtime));
            record.repair_ms = Some(millis(out.repair_time));
            record.repaired = Some(out.repair.changed);
            BenchRun {
                size,
                seed,
                solver,
                record,
                assignment: Some(out.assignment),
                error: None,
            }
        }
        Err(e) => {
            record.status = Status::of_error(&e).to_string();
            BenchRun {
                size,
                seed,
                solver,
                record,
                assignment: None,
                error: Some(e.to_string()),
            }
        }
    }
}

/// Fills `norm_objective` for one (size, seed) group: relative to a proven
/// exact optimum when there is one, else to the best penalized objective
/// any solver reached.
fn normalize_group(group: &mut [BenchRun]) {
    let proven = group
        .iter()
        .find(|r| r.solver == SolverKind::Exact && r.record.status == Status::Optimal.to_string())
        .and_then(|r| r.record.penalized_objective);
    let reference = proven.or_else(|| {
        group
            .iter()
            .filter_map(|r| r.record.penalized_objective)
            .reduce(f64::min)
    });
    for r in group {
        r.record.norm_objective = match (r.record.penalized_objective, reference) {
            (Some(v), Some(reference)) if reference != 0.0 => Some(v / reference),
            (Some(v), Some(_)) => Some(if v == 0.0 { 1.0 } else { f64::INFINITY }),
            _ => None,
        };
    }
}

pub fn run_benchmark(cfg: &BenchConfig) -> Result<Vec<BenchRun>> {
    let mut solvers = cfg.solvers.clone();
    solvers.sort();
    solvers.dedup();
    let mut jobs = Vec::new();
    for &size in &cfg.sizes {
        for &seed in &cfg.seeds {
            for &solver in &solvers {
                jobs.push((size, seed, solver));
            }
        }
    }
    jobs.sort();
    jobs.dedup();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count())
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let mut runs: Vec<BenchRun> = pool.install(|| {
        jobs.par_iter()
            .map(|&(size, seed, solver)| execute(size, seed, solver, cfg))
            .collect()
    });
    runs.sort_by_key(|r| (r.size, r.seed, r.solver));
    for group in runs.chunk_by_mut(|a, b| (a.size, a.seed) == (b.size, b.seed)) {
        normalize_group(group);
    }
    Ok(runs)
}

pub fn assignment_file_name(size: usize, seed: u64, solver: SolverKind) -> String {
    format!("n{size}_s{seed}_{solver}.json")
}

/// Writes `results.csv` and one assignment JSON per successful run under
/// `dir/assignments/`.
pub fn write_run_dir(dir: &Path, runs: &[BenchRun]) -> Result<()> {
    std::fs::create_dir_all(dir.join("assignments"))?;
    let records: Vec<BenchRecord> = runs.iter().map(|r| r.record.clone()).collect();
    write_records(&dir.join("results.csv"), &records)?;
    for r in runs {
        if let Some(x) = &r.assignment {
            let path = dir.join("assignments").join(assignment_file_name(r.size, r.seed, r.solver));
            std::fs::write(path, serde_json::to_string(x)?)?;
        }
    }
    Ok(())
}
