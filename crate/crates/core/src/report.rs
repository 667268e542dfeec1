//! Per-run records, the comparison measures relative to NS and WS, instance
//! filtering, aggregation and CSV/JSON output.
//!
//! Aggregation averages per instance first, then across instances.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::scoring::ModelVariant;
use crate::solution::{metrics, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Solver {
    #[serde(rename = "2mls")]
    Alns,
    #[serde(rename = "exact")]
    Exact,
}

impl Solver {
    pub fn key(self) -> &'static str {
        match self {
            Solver::Alns => "2mls",
            Solver::Exact => "exact",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.key())
    }
}

impl FromStr for Solver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "2mls" | "alns" => Ok(Solver::Alns),
            "exact" => Ok(Solver::Exact),
            _ => Err(Error::InvalidArgument(format!("unknown solver `{s}`"))),
        }
    }
}

/// Outcome class of a run, shared by both solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunVerdict {
    Optimal,
    Feasible,
    Infeasible,
    SizeExceeded,
}

impl RunVerdict {
    pub fn has_plan(self) -> bool {
        matches!(self, RunVerdict::Optimal | RunVerdict::Feasible)
    }
}

/// Everything one solver run leaves behind; the unit the report reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub instance: String,
    pub solver: Solver,
    pub model: ModelVariant,
    pub run_id: usize,
    pub seed: u64,
    /// Hash of the configuration that produced the run.
    pub config_hash: String,
    pub verdict: RunVerdict,
    pub demoted: bool,
    pub objective: f64,
    pub total_travel: f64,
    pub visited: usize,
    pub customers: usize,
    pub share_visited: Option<f64>,
    pub share_realized: Option<f64>,
    pub solution: Option<Solution>,
    /// Solver-specific statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<serde_json::Value>,
}

impl RunArtifact {
    /// Fills the evaluation fields from `solution` under true scores.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        instance: &Instance,
        solver: Solver,
        model: ModelVariant,
        run_id: usize,
        seed: u64,
        config_hash: impl Into<String>,
        verdict: RunVerdict,
        demoted: bool,
        objective: f64,
        solution: Option<Solution>,
    ) -> Result<Self> {
        let (total_travel, visited, share_visited, share_realized) = match &solution {
            Some(sol) if verdict.has_plan() => {
                let m = metrics(sol, instance, &instance.scores())?;
                (
                    m.total_travel,
                    sol.visit_count(),
                    m.share_visited,
                    m.share_realized,
                )
            }
            _ => (0.0, 0, None, None),
        };
        Ok(RunArtifact {
            instance: instance.name().to_string(),
            solver,
            model,
            run_id,
            seed,
            config_hash: config_hash.into(),
            verdict,
            demoted,
            objective,
            total_travel,
            visited,
            customers: instance.len(),
            share_visited,
            share_realized,
            solution,
            stats: None,
        })
    }

    pub fn file_name(&self) -> String {
        format!(
            "{}-{}-r{:02}.json",
            self.solver,
            self.model.key(),
            self.run_id
        )
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifact serializes");
        s.push('\n');
        s
    }

    pub fn to_row(&self) -> ReportRow {
        ReportRow {
            instance: self.instance.clone(),
            solver: self.solver,
            model: self.model,
            run_id: self.run_id,
            feasible: self.verdict.has_plan() && !self.demoted,
            visited_all: self.verdict.has_plan()
                && self.customers > 0
                && self.visited == self.customers,
            share_visited: self.share_visited,
            share_realized: self.share_realized,
            rns: None,
            rws: None,
            total_travel: self.total_travel,
            objective: self.objective,
            flag: String::new(),
            wall_ms: None,
        }
    }
}

/// Reads every run artifact below `dir`, in path order. Other JSON files
/// (instances, solutions) are ignored; artifacts are recognized by name.
pub fn load_artifacts(dir: impl AsRef<Path>) -> Result<Vec<RunArtifact>> {
    let mut files = Vec::new();
    collect_json(dir.as_ref(), &mut files)?;
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {}", p.display(), Error::from(e))))
        })
        .collect()
}

fn collect_json(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_json(&path, out)?;
        } else if path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(is_artifact_name)
        {
            out.push(path);
        }
    }
    Ok(())
}

/// `<solver>-<model>-rNN.json`
fn is_artifact_name(name: &str) -> bool {
    let Some(stem) = name.strip_suffix(".json") else {
        return false;
    };
    let mut parts = stem.rsplitn(3, '-');
    let (Some(run), Some(model), Some(solver)) = (parts.next(), parts.next(), parts.next()) else {
        return false;
    };
    run.strip_prefix('r')
        .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
        && model.parse::<ModelVariant>().is_ok()
        && solver.parse::<Solver>().is_ok()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub instance: String,
    pub solver: Solver,
    pub model: ModelVariant,
    pub run_id: usize,
    /// A plan exists and serves every mandatory customer.
    pub feasible: bool,
    pub visited_all: bool,
    pub share_visited: Option<f64>,
    pub share_realized: Option<f64>,
    pub rns: Option<f64>,
    pub rws: Option<f64>,
    pub total_travel: f64,
    pub objective: f64,
    /// Why `rns` or `rws` is missing, if it is.
    pub flag: String,
    /// Not part of any deterministic output.
    #[serde(skip)]
    pub wall_ms: Option<u64>,
}

type Group = (String, Solver);

fn group_of(r: &ReportRow) -> Group {
    (r.instance.clone(), r.solver)
}

fn row_beats(a: &ReportRow, b: &ReportRow) -> bool {
    if a.feasible != b.feasible {
        return a.feasible;
    }
    if a.objective != b.objective {
        return a.objective > b.objective;
    }
    a.total_travel < b.total_travel
}

/// Best run per (instance, solver, model); the earliest run wins ties.
pub fn best_of_runs(rows: &[ReportRow]) -> Vec<ReportRow> {
    let mut best: BTreeMap<(String, Solver, ModelVariant), &ReportRow> = BTreeMap::new();
    for r in rows {
        let key = (r.instance.clone(), r.solver, r.model);
        match best.get(&key) {
            Some(b) if !row_beats(r, b) && !(same_rank(r, b) && r.run_id < b.run_id) => {}
            _ => {
                best.insert(key, r);
            }
        }
    }
    best.into_values().cloned().collect()
}

fn same_rank(a: &ReportRow, b: &ReportRow) -> bool {
    !row_beats(a, b) && !row_beats(b, a)
}

/// Fills `rns` (visited share relative to NS) and `rws` (realized share
/// relative to WS) within each (instance, solver) group. Rows whose
/// reference is missing or zero keep `None` and get a flag.
pub fn compute_rns_rws(rows: &mut [ReportRow]) {
    let mut refs: BTreeMap<Group, (Option<f64>, Option<f64>)> = BTreeMap::new();
    for r in rows.iter() {
        let e = refs.entry(group_of(r)).or_default();
        if r.feasible {
            match r.model {
                ModelVariant::Ns => e.0 = r.share_visited,
                ModelVariant::Ws => e.1 = r.share_realized,
                _ => {}
            }
        }
    }
    for r in rows.iter_mut() {
        let (ns, ws) = refs[&group_of(r)];
        let mut flags = Vec::new();
        r.rns = ratio(r.share_visited, ns);
        if r.rns.is_none() {
            flags.push(if ns.is_none() {
                "missing NS reference"
            } else {
                "no NS ratio"
            });
        }
        r.rws = ratio(r.share_realized, ws);
        if r.rws.is_none() {
            flags.push(if ws.is_none() {
                "missing WS reference"
            } else {
                "no WS ratio"
            });
        }
        r.flag = flags.join("; ");
    }
}

fn ratio(value: Option<f64>, reference: Option<f64>) -> Option<f64> {
    match (value, reference) {
        (Some(v), Some(r)) if r != 0.0 => Some(v / r),
        _ => None,
    }
}

/// Drops (instance, solver) groups in which some model visits every customer
/// or a model with designated mandatory customers has no feasible plan.
pub fn filter_instances(rows: &[ReportRow]) -> Vec<ReportRow> {
    let mut dropped: BTreeSet<Group> = BTreeSet::new();
    for r in rows {
        if r.visited_all || (r.model.has_designated_mandatory() && !r.feasible) {
            dropped.insert(group_of(r));
        }
    }
    rows.iter()
        .filter(|r| !dropped.contains(&group_of(r)))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Half-width of the normal-approximation 95% confidence interval.
    pub ci95: f64,
    pub n: usize,
}

/// Mean and 95% CI half-width `1.96 * s / sqrt(n)` with the sample standard
/// deviation `s`; the half-width is 0 for a single value.
pub fn mean_ci(values: &[f64]) -> Result<Stat> {
    let n = values.len();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "cannot aggregate an empty group".into(),
        ));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ci95 = if n < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        1.96 * var.sqrt() / (n as f64).sqrt()
    };
    Ok(Stat { mean, ci95, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    Solver,
    Model,
    Instance,
}

pub const METRICS: [&str; 6] = [
    "share_visited",
    "share_realized",
    "rns",
    "rws",
    "total_travel",
    "objective",
];

fn metric(r: &ReportRow, name: &str) -> Option<f64> {
    match name {
        "share_visited" => r.share_visited,
        "share_realized" => r.share_realized,
        "rns" => r.rns,
        "rws" => r.rws,
        "total_travel" => Some(r.total_travel),
        "objective" => Some(r.objective),
        _ => unreachable!("unknown metric {name}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    /// Values of the grouping keys, in the order requested.
    pub key: Vec<String>,
    pub instances: usize,
    /// One entry per name in [`METRICS`]; `None` if no row had the value.
    pub stats: BTreeMap<String, Option<Stat>>,
}

/// Groups rows by `group_by`, averages each metric per instance within a
/// group and then across the group's instances.
pub fn aggregate(rows: &[ReportRow], group_by: &[GroupKey]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot aggregate an empty group".into(),
        ));
    }
    let key_of = |r: &ReportRow| -> Vec<String> {
        group_by
            .iter()
            .map(|k| match k {
                GroupKey::Solver => r.solver.to_string(),
                GroupKey::Model => r.model.to_string(),
                GroupKey::Instance => r.instance.clone(),
            })
            .collect()
    };
    let mut groups: BTreeMap<Vec<String>, BTreeMap<String, Vec<&ReportRow>>> = BTreeMap::new();
    for r in rows {
        groups
            .entry(key_of(r))
            .or_default()
            .entry(r.instance.clone())
            .or_default()
            .push(r);
    }
    let mut out = Vec::with_capacity(groups.len());
    for (key, per_instance) in groups {
        let mut stats = BTreeMap::new();
        for name in METRICS {
            let means: Vec<f64> = per_instance
                .values()
                .filter_map(|rs| {
                    let vals: Vec<f64> = rs.iter().filter_map(|r| metric(r, name)).collect();
                    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
                })
                .collect();
            let stat = if means.is_empty() {
                None
            } else {
                Some(mean_ci(&means)?)
            };
            stats.insert(name.to_string(), stat);
        }
        out.push(SummaryRow {
            key,
            instances: per_instance.len(),
            stats,
        });
    }
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Raw per-run rows. Columns: instance, solver, model, run_id, feasible,
/// visited_all, share_visited, share_realized, rns, rws, total_travel,
/// objective, flag.
pub fn write_raw_csv(rows: &[ReportRow], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "instance",
        "solver",
        "model",
        "run_id",
        "feasible",
        "visited_all",
        "share_visited",
        "share_realized",
        "rns",
        "rws",
        "total_travel",
        "objective",
        "flag",
    ])?;
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.solver.to_string(),
            r.model.to_string(),
            r.run_id.to_string(),
            r.feasible.to_string(),
            r.visited_all.to_string(),
            opt(r.share_visited),
            opt(r.share_realized),
            opt(r.rns),
            opt(r.rws),
            r.total_travel.to_string(),
            r.objective.to_string(),
            r.flag.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Summary rows. Columns: the group keys, `instances`, then `<metric>_mean`
/// and `<metric>_ci95` for each metric in [`METRICS`] order.
pub fn write_summary_csv(
    summary: &[SummaryRow],
    group_by: &[GroupKey],
    out: impl std::io::Write,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = group_by
        .iter()
        .map(|k| {
            serde_json::to_value(k)
                .expect("key")
                .as_str()
                .expect("str")
                .to_string()
        })
        .collect();
    header.push("instances".into());
    for m in METRICS {
        header.push(format!("{m}_mean"));
        header.push(format!("{m}_ci95"));
    }
    w.write_record(&header)?;
    for s in summary {
        let mut rec = s.key.clone();
        rec.push(s.instances.to_string());
        for m in METRICS {
            let st = s.stats.get(m).copied().flatten();
            rec.push(opt(st.map(|x| x.mean)));
            rec.push(opt(st.map(|x| x.ci95)));
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Machine-readable mirror of the summary plus the filtering outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub group_by: Vec<GroupKey>,
    pub instances_total: usize,
    pub instances_kept: usize,
    pub dropped: Vec<String>,
    pub rows: Vec<SummaryRow>,
}

/// The full report over artifact rows: raw rows, then best-of-runs rows with
/// RNS/RWS, filtered and aggregated by solver and model.
pub struct Report {
    pub raw: Vec<ReportRow>,
    pub best: Vec<ReportRow>,
    pub summary: SummaryFile,
}

pub fn build_report(artifacts: &[RunArtifact]) -> Result<Report> {
    let mut raw: Vec<ReportRow> = artifacts.iter().map(RunArtifact::to_row).collect();
    raw.sort_by(|a, b| {
        (&a.instance, a.solver, a.model, a.run_id).cmp(&(&b.instance, b.solver, b.model, b.run_id))
    });
    let mut best = best_of_runs(&raw);
    compute_rns_rws(&mut best);
    let kept = filter_instances(&best);
    let all: BTreeSet<Group> = best.iter().map(group_of).collect();
    let kept_groups: BTreeSet<Group> = kept.iter().map(group_of).collect();
    let group_by = vec![GroupKey::Solver, GroupKey::Model];
    let rows = if kept.is_empty() {
        Vec::new()
    } else {
        aggregate(&kept, &group_by)?
    };
    Ok(Report {
        raw,
        best,
        summary: SummaryFile {
            group_by,
            instances_total: all.len(),
            instances_kept: kept_groups.len(),
            dropped: all
                .difference(&kept_groups)
                .map(|(i, s)| format!("{i}/{s}"))
                .collect(),
            rows,
        },
    })
}

/// Writes raw.csv, best.csv, summary.csv and summary.json into `dir`.
pub fn write_report(report: &Report, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let file = |name: &str| -> Result<fs::File> {
        let p = dir.join(name);
        fs::File::create(&p).map_err(|e| Error::io(&p, e))
    };
    write_raw_csv(&report.raw, file("raw.csv")?)?;
    write_raw_csv(&report.best, file("best.csv")?)?;
    write_summary_csv(
        &report.summary.rows,
        &report.summary.group_by,
        file("summary.csv")?,
    )?;
    let mut json = serde_json::to_string_pretty(&report.summary).expect("summary serializes");
    json.push('\n');
    let p = dir.join("summary.json");
    fs::write(&p, json).map_err(|e| Error::io(&p, e))
}
