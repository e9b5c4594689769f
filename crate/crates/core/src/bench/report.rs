use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BenchRecord;
use crate::error::Result;

/// Aggregates over the successful runs of one (size, solver) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub size: usize,
    pub solver: String,
    pub runs: usize,
    pub failures: usize,
    pub mean_norm_objective: Option<f64>,
    pub median_norm_objective: Option<f64>,
    pub mean_penalized_objective: Option<f64>,
    pub mean_runtime_ms: Option<f64>,
    pub median_runtime_ms: Option<f64>,
    pub mean_repair_ms: Option<f64>,
    pub mean_gf_violations: Option<f64>,
    pub mean_sla_violations: Option<f64>,
    pub mean_pre_repair_hard_violations: Option<f64>,
    pub repaired_fraction: Option<f64>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let mid = s.len() / 2;
    Some(if s.len() % 2 == 1 { s[mid] } else { 0.5 * (s[mid - 1] + s[mid]) })
}

fn column<T: Copy>(rows: &[&BenchRecord], f: impl Fn(&BenchRecord) -> Option<T>) -> Vec<T> {
    rows.iter().filter_map(|r| f(r)).collect()
}

/// Per (size, solver) aggregates, ordered by size then solver name. A run
/// counts as successful when it has a penalized objective.
pub fn summarize(records: &[BenchRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, &str), Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.size, r.solver.as_str())).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((size, solver), all)| {
            let ok: Vec<&BenchRecord> = all.iter().copied().filter(|r| r.penalized_objective.is_some()).collect();
            let count = |f: fn(&BenchRecord) -> Option<usize>| {
                column(&ok, f).into_iter().map(|c| c as f64).collect::<Vec<_>>()
            };
            let norm = column(&ok, |r| r.norm_objective);
            let runtime = column(&ok, |r| r.runtime_ms);
            let repaired = column(&ok, |r| r.repaired.map(|b| if b { 1.0 } else { 0.0 }));
            SummaryRow {
                size,
                solver: solver.to_string(),
                runs: ok.len(),
                failures: all.len() - ok.len(),
                mean_norm_objective: mean(&norm),
                median_norm_objective: median(&norm),
                mean_penalized_objective: mean(&column(&ok, |r| r.penalized_objective)),
                mean_runtime_ms: mean(&runtime),
                median_runtime_ms: median(&runtime),
                mean_repair_ms: mean(&column(&ok, |r| r.repair_ms)),
                mean_gf_violations: mean(&count(|r| r.gf_violations)),
                mean_sla_violations: mean(&count(|r| r.sla_violations)),
                mean_pre_repair_hard_violations: mean(&count(|r| r.pre_repair_hard_violations)),
                repaired_fraction: mean(&repaired),
            }
        })
        .collect()
}

fn write_csv<S: Serialize>(path: &Path, rows: &[S], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records(path: &Path, records: &[BenchRecord]) -> Result<()> {
    write_csv(path, records, &super::RESULTS_HEADER)
}

pub fn read_records(path: &Path) -> Result<Vec<BenchRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

const SUMMARY_HEADER: [&str; 14] = [
    "size",
    "solver",
    "runs",
    "failures",
    "mean_norm_objective",
    "median_norm_objective",
    "mean_penalized_objective",
    "mean_runtime_ms",
    "median_runtime_ms",
    "mean_repair_ms",
    "mean_gf_violations",
    "mean_sla_violations",
    "mean_pre_repair_hard_violations",
    "repaired_fraction",
];

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_csv(path, rows, &SUMMARY_HEADER)
}

#[derive(Serialize)]
struct LongRow<'a> {
    size: usize,
    solver: &'a str,
    metric: &'static str,
    value: f64,
}

/// `(size, solver, metric, value)` rows, one per defined summary metric.
pub fn write_long(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut long = Vec::new();
    for r in rows {
        let metrics = [
            ("runs", Some(r.runs as f64)),
            ("failures", Some(r.failures as f64)),
            ("mean_norm_objective", r.mean_norm_objective),
            ("median_norm_objective", r.median_norm_objective),
            ("mean_penalized_objective", r.mean_penalized_objective),
            ("mean_runtime_ms", r.mean_runtime_ms),
            ("median_runtime_ms", r.median_runtime_ms),
            ("mean_repair_ms", r.mean_repair_ms),
            ("mean_gf_violations", r.mean_gf_violations),
            ("mean_sla_violations", r.mean_sla_violations),
            ("mean_pre_repair_hard_violations", r.mean_pre_repair_hard_violations),
            ("repaired_fraction", r.repaired_fraction),
        ];
        for (metric, value) in metrics {
            if let Some(value) = value {
                long.push(LongRow {
                    size: r.size,
                    solver: &r.solver,
                    metric,
                    value,
                });
            }
        }
    }
    write_csv(path, &long, &["size", "solver", "metric", "value"])
}
