//! End-to-end study driver: instances, solver runs, sensitivity grid and
//! report from one declarative TOML file.
//!
//! Output tree under `output`:
//!
//! ```text
//! instances/<name>.json
//! runs/<name>/<solver>-<model>-rNN.json   run artifacts
//! runs/<name>/<solver>-<model>.timings.csv wall-clock times (not reproducible)
//! sensitivity.csv
//! comparison.csv                           exact vs 2MLS, when both ran
//! report/{raw,best,summary}.csv, report/summary.json
//! failures.json
//! manifest.json
//! ```
//!
//! Work units are skipped when their artifacts already carry the content
//! hash of the inputs that would produce them, so a rerun of a finished tree
//! rewrites nothing.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alns::{best_of_runs, AlnsConfig, RunOutcome, RunStatus};
use crate::error::{Error, Result};
use crate::exact::{solve_exact, OracleStatus, DEFAULT_SIZE_LIMIT, HARD_SIZE_LIMIT};
use crate::instance::Instance;
use crate::kit::{generate_preset, Preset};
use crate::report::{build_report, write_report, RunArtifact, RunVerdict, Solver};
use crate::rng::derive_seed;
use crate::scoring::{build_model, ModelOptions, ModelVariant};
use crate::sensitivity::{
    default_coe_levels, scenario_grid, sensitivity_rows, write_sensitivity_csv, SensitivityRow,
    DEFAULT_SCENARIOS_PER_LEVEL,
};
use crate::solution::Solution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSource {
    pub preset: Preset,
    pub count: usize,
    /// Index of the first instance in the family.
    #[serde(default)]
    pub start: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceSources {
    pub presets: Vec<PresetSource>,
    /// Instance JSON files, relative to the config file.
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivityConfig {
    pub enabled: bool,
    pub coe_levels: Vec<f64>,
    pub scenarios_per_level: usize,
    /// Whose plans are evaluated; defaults to the exact solver when it runs.
    pub solver: Option<Solver>,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        SensitivityConfig {
            enabled: false,
            coe_levels: default_coe_levels(),
            scenarios_per_level: DEFAULT_SCENARIOS_PER_LEVEL,
            solver: None,
        }
    }
}

fn default_runs() -> usize {
    10
}

fn default_size_limit() -> usize {
    DEFAULT_SIZE_LIMIT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the config file.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[serde(default)]
    pub jobs: usize,
    pub models: Vec<ModelVariant>,
    pub solvers: Vec<Solver>,
    /// 2MLS runs per instance and model.
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Largest instance the exact solver is paired with.
    #[serde(default = "default_size_limit")]
    pub size_limit: usize,
    #[serde(default)]
    pub instances: InstanceSources,
    #[serde(default)]
    pub model_options: ModelOptions,
    #[serde(default)]
    pub alns: AlnsConfig,
    #[serde(default)]
    pub sensitivity: SensitivityConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(Error::Config(m));
        if self.models.is_empty() {
            return usage("the model list is empty".into());
        }
        if self.solvers.is_empty() {
            return usage("the solver list is empty".into());
        }
        if self.runs == 0 {
            return usage("runs must be at least 1".into());
        }
        if self.size_limit > HARD_SIZE_LIMIT {
            return usage(format!("size_limit is capped at {HARD_SIZE_LIMIT}"));
        }
        if self.instances.presets.is_empty() && self.instances.files.is_empty() {
            return usage("no instance sources".into());
        }
        if self.solvers.contains(&Solver::Exact) {
            for p in &self.instances.presets {
                if p.preset.max_customers() > self.size_limit {
                    return usage(format!(
                        "preset {} exceeds size_limit {} for the exact solver",
                        p.preset, self.size_limit
                    ));
                }
            }
        }
        if self.sensitivity.enabled {
            if !self.models.contains(&ModelVariant::Ws) {
                return usage("the sensitivity grid needs the WS model".into());
            }
            if let Some(s) = self.sensitivity.solver {
                if !self.solvers.contains(&s) {
                    return usage(format!("sensitivity solver {s} is not among the solvers"));
                }
            }
            if self
                .sensitivity
                .coe_levels
                .iter()
                .any(|c| c.is_nan() || *c <= 0.0)
            {
                return usage("coe levels must be positive".into());
            }
        }
        self.alns
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// Hash of every setting that affects results (not output or jobs).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        c.jobs = 0;
        content_hash(
            serde_json::to_string(&c)
                .expect("config serializes")
                .as_bytes(),
        )
    }

    fn sensitivity_solver(&self) -> Solver {
        self.sensitivity
            .solver
            .unwrap_or(if self.solvers.contains(&Solver::Exact) {
                Solver::Exact
            } else {
                Solver::Alns
            })
    }
}

/// Hex SHA-256 of `bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Seed for everything done to one instance.
pub fn instance_seed(master: u64, instance: &str) -> u64 {
    derive_seed(master, instance, 0)
}

/// All 2MLS runs of one model on one instance as artifacts, in run order,
/// with their wall-clock times.
pub fn alns_artifacts(
    instance: &Instance,
    variant: ModelVariant,
    options: &ModelOptions,
    cfg: &AlnsConfig,
    runs: usize,
    seed: u64,
    config_hash: &str,
) -> Result<(Vec<RunArtifact>, Vec<u64>)> {
    let model = build_model(variant, instance, options)?;
    let (_, outcomes) = best_of_runs(instance, &model, cfg, runs, seed);
    let times = outcomes.iter().map(|o| o.stats.wall_ms).collect();
    Ok((
        outcome_artifacts(instance, variant, &outcomes, config_hash)?,
        times,
    ))
}

/// Artifacts for already finished 2MLS runs; `outcomes[r]` is run `r`.
pub fn outcome_artifacts(
    instance: &Instance,
    variant: ModelVariant,
    outcomes: &[RunOutcome],
    config_hash: &str,
) -> Result<Vec<RunArtifact>> {
    outcomes
        .iter()
        .enumerate()
        .map(|(r, o)| {
            let verdict = match o.status {
                RunStatus::Feasible => RunVerdict::Feasible,
                RunStatus::Infeasible => RunVerdict::Infeasible,
            };
            let mut a = RunArtifact::new(
                instance,
                Solver::Alns,
                variant,
                r,
                o.seed,
                config_hash,
                verdict,
                o.demoted,
                o.objective,
                verdict.has_plan().then(|| o.solution.clone()),
            )?;
            a.stats = Some(serde_json::to_value(&o.stats).expect("stats serialize"));
            Ok(a)
        })
        .collect()
}

/// The exact solution of one model on one instance as an artifact.
pub fn exact_artifact(
    instance: &Instance,
    variant: ModelVariant,
    options: &ModelOptions,
    size_limit: usize,
    config_hash: &str,
) -> Result<RunArtifact> {
    let model = build_model(variant, instance, options)?;
    let res = solve_exact(instance, &model, size_limit);
    let verdict = match res.status {
        OracleStatus::Optimal => RunVerdict::Optimal,
        OracleStatus::Infeasible => RunVerdict::Infeasible,
        OracleStatus::SizeExceeded => RunVerdict::SizeExceeded,
    };
    let mut a = RunArtifact::new(
        instance,
        Solver::Exact,
        variant,
        0,
        0,
        config_hash,
        verdict,
        res.demoted,
        res.objective,
        res.solution,
    )?;
    a.stats = Some(serde_json::json!({
        "enumerated_assignments": res.enumerated_assignments,
    }));
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub instance: String,
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub config_hash: String,
    pub seed: u64,
    pub instances: Vec<String>,
    pub models: Vec<ModelVariant>,
    pub solvers: Vec<Solver>,
    pub artifacts: usize,
    pub failures: usize,
}

/// What one invocation did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExperimentSummary {
    pub instances: usize,
    pub units_run: usize,
    pub units_skipped: usize,
    pub failures: usize,
    pub output: PathBuf,
}

/// Writes `content` unless the file already holds exactly that.
fn write_if_changed(path: &Path, content: &[u8]) -> Result<bool> {
    if fs::read(path).is_ok_and(|old| old == content) {
        return Ok(false);
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, content).map_err(|e| Error::io(path, e))?;
    Ok(true)
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s.into_bytes()
}

struct Unit {
    solver: Solver,
    model: ModelVariant,
}

impl Unit {
    fn files(&self, runs: usize) -> Vec<String> {
        let n = if self.solver == Solver::Exact {
            1
        } else {
            runs
        };
        (0..n)
            .map(|r| format!("{}-{}-r{r:02}.json", self.solver, self.model.key()))
            .collect()
    }
}

/// Content hash of everything that determines one unit's artifacts.
fn unit_hash(cfg: &ExperimentConfig, instance_json: &str, unit: &Unit) -> String {
    let solver_part = match unit.solver {
        Solver::Alns => serde_json::json!({ "alns": cfg.alns, "runs": cfg.runs, "seed": cfg.seed }),
        Solver::Exact => serde_json::json!({ "size_limit": cfg.size_limit }),
    };
    let doc = serde_json::json!({
        "instance": content_hash(instance_json.as_bytes()),
        "solver": unit.solver,
        "model": unit.model,
        "options": cfg.model_options,
        "solver_config": solver_part,
    });
    content_hash(doc.to_string().as_bytes())
}

fn unit_done(dir: &Path, unit: &Unit, runs: usize, hash: &str) -> bool {
    unit.files(runs).iter().all(|f| {
        fs::read_to_string(dir.join(f))
            .ok()
            .and_then(|t| serde_json::from_str::<RunArtifact>(&t).ok())
            .is_some_and(|a| a.config_hash == hash)
    })
}

struct InstanceOutcome {
    name: String,
    run: usize,
    skipped: usize,
    failures: Vec<Failure>,
    sensitivity: Vec<SensitivityRow>,
}

fn process_instance(cfg: &ExperimentConfig, inst: &Instance, out: &Path) -> InstanceOutcome {
    let name = inst.name().to_string();
    let mut res = InstanceOutcome {
        name: name.clone(),
        run: 0,
        skipped: 0,
        failures: Vec::new(),
        sensitivity: Vec::new(),
    };
    let fail = |stage: &str, e: &Error| Failure {
        instance: name.clone(),
        stage: stage.to_string(),
        message: e.to_string(),
    };
    let inst_json = inst.to_json_string();
    let dir = out.join("runs").join(&name);
    let seed = instance_seed(cfg.seed, &name);
    let mut plans: BTreeMap<ModelVariant, Solution> = BTreeMap::new();
    let sens_solver = cfg.sensitivity_solver();

    for &solver in &cfg.solvers {
        for &model in &cfg.models {
            let unit = Unit { solver, model };
            let hash = unit_hash(cfg, &inst_json, &unit);
            let stage = format!("{solver}-{}", model.key());
            if unit_done(&dir, &unit, cfg.runs, &hash) {
                res.skipped += 1;
            } else {
                let clock = Instant::now();
                let produced = match solver {
                    Solver::Alns => alns_artifacts(
                        inst,
                        model,
                        &cfg.model_options,
                        &cfg.alns,
                        cfg.runs,
                        seed,
                        &hash,
                    ),
                    Solver::Exact => {
                        exact_artifact(inst, model, &cfg.model_options, cfg.size_limit, &hash)
                            .map(|a| (vec![a], vec![clock.elapsed().as_millis() as u64]))
                    }
                };
                let written = produced.and_then(|(arts, times)| {
                    for a in &arts {
                        write_if_changed(&dir.join(a.file_name()), a.to_json_string().as_bytes())?;
                    }
                    let mut t = String::from("run_id,wall_ms\n");
                    for (r, ms) in times.iter().enumerate() {
                        t.push_str(&format!("{r},{ms}\n"));
                    }
                    let tp = dir.join(format!("{solver}-{}.timings.csv", model.key()));
                    fs::write(&tp, t).map_err(|e| Error::io(&tp, e))?;
                    Ok(())
                });
                match written {
                    Ok(()) => res.run += 1,
                    Err(e) => {
                        res.failures.push(fail(&stage, &e));
                        continue;
                    }
                }
            }
            if cfg.sensitivity.enabled && solver == sens_solver {
                match best_plan(&dir, &unit, cfg.runs) {
                    Ok(Some(sol)) => {
                        plans.insert(model, sol);
                    }
                    Ok(None) => {}
                    Err(e) => res.failures.push(fail(&stage, &e)),
                }
            }
        }
    }

    if cfg.sensitivity.enabled {
        if plans.contains_key(&ModelVariant::Ws) {
            let grid = scenario_grid(
                inst,
                &cfg.sensitivity.coe_levels,
                cfg.sensitivity.scenarios_per_level,
                derive_seed(seed, "sensitivity", 0),
            );
            match grid.and_then(|g| sensitivity_rows(inst, &plans, &g)) {
                Ok(rows) => res.sensitivity = rows,
                Err(e) => res.failures.push(fail("sensitivity", &e)),
            }
        } else {
            res.failures.push(Failure {
                instance: name.clone(),
                stage: "sensitivity".into(),
                message: "no WS plan to compare against".into(),
            });
        }
    }
    res
}

/// Best plan among a unit's stored runs.
fn best_plan(dir: &Path, unit: &Unit, runs: usize) -> Result<Option<Solution>> {
    let mut best: Option<RunArtifact> = None;
    for f in unit.files(runs) {
        let p = dir.join(f);
        let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        let a: RunArtifact = serde_json::from_str(&text)?;
        if !a.verdict.has_plan() {
            continue;
        }
        let wins = best.as_ref().is_none_or(|b| {
            (!a.demoted && b.demoted)
                || (a.demoted == b.demoted
                    && (a.objective > b.objective
                        || (a.objective == b.objective && a.total_travel < b.total_travel)))
        });
        if wins {
            best = Some(a);
        }
    }
    Ok(best.and_then(|a| a.solution))
}

fn resolve_instances(cfg: &ExperimentConfig, base: &Path) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for src in &cfg.instances.presets {
        for k in src.start..src.start + src.count {
            out.push(generate_preset(src.preset, k, cfg.seed)?);
        }
    }
    for f in &cfg.instances.files {
        let inst = Instance::load(base.join(f))?;
        if cfg.solvers.contains(&Solver::Exact) && inst.len() > cfg.size_limit {
            return Err(Error::Config(format!(
                "instance {} has {} customers, above size_limit {} for the exact solver",
                inst.name(),
                inst.len(),
                cfg.size_limit
            )));
        }
        out.push(inst);
    }
    let mut names: Vec<&str> = out.iter().map(Instance::name).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Config(format!("duplicate instance name {}", w[0])));
    }
    Ok(out)
}

/// Exact vs best-of-runs 2MLS per instance and model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub instance: String,
    pub model: ModelVariant,
    pub exact_verdict: RunVerdict,
    pub exact_objective: f64,
    pub alns_objective: Option<f64>,
    /// Relative gap `(exact - 2mls) / exact`; 0 when both are 0.
    pub gap: Option<f64>,
    pub matched: bool,
}

pub fn comparison(artifacts: &[RunArtifact]) -> Vec<ComparisonRow> {
    let report = build_report(artifacts).ok();
    let Some(report) = report else {
        return Vec::new();
    };
    let mut exact: BTreeMap<(String, ModelVariant), &RunArtifact> = BTreeMap::new();
    for a in artifacts.iter().filter(|a| a.solver == Solver::Exact) {
        exact.insert((a.instance.clone(), a.model), a);
    }
    let mut out = Vec::new();
    for row in report.best.iter().filter(|r| r.solver == Solver::Alns) {
        let Some(e) = exact.get(&(row.instance.clone(), row.model)) else {
            continue;
        };
        let optimal = e.verdict == RunVerdict::Optimal;
        let heur = row.feasible.then_some(row.objective);
        let gap = match (optimal, heur) {
            (true, Some(h)) if e.objective != 0.0 => Some((e.objective - h) / e.objective),
            (true, Some(0.0)) => Some(0.0),
            _ => None,
        };
        out.push(ComparisonRow {
            instance: row.instance.clone(),
            model: row.model,
            exact_verdict: e.verdict,
            exact_objective: e.objective,
            alns_objective: heur,
            gap,
            matched: gap.is_some_and(|g| g.abs() <= 1e-9),
        });
    }
    out
}

fn comparison_csv(rows: &[ComparisonRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "instance",
        "model",
        "exact_verdict",
        "exact_objective",
        "alns_objective",
        "gap",
        "matched",
    ])?;
    for r in rows {
        let verdict = serde_json::to_value(r.exact_verdict).expect("verdict");
        w.write_record([
            r.instance.clone(),
            r.model.to_string(),
            verdict.as_str().unwrap_or_default().to_string(),
            r.exact_objective.to_string(),
            r.alns_objective.map(|x| x.to_string()).unwrap_or_default(),
            r.gap.map(|x| x.to_string()).unwrap_or_default(),
            r.matched.to_string(),
        ])?;
    }
    w.into_inner()
        .map_err(|e| Error::io("<csv>", e.into_error()))
}

/// Runs the whole pipeline. `config_path` anchors relative paths; `output`
/// overrides the configured output directory.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    config_path: Option<&Path>,
    output: Option<&Path>,
) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let base = config_path
        .and_then(Path::parent)
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let out = match (output, &cfg.output) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => base.join(o),
        (None, None) => base.join("out").join(&cfg.name),
    };
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;

    let instances = resolve_instances(cfg, &base)?;
    for inst in &instances {
        let p = out.join("instances").join(format!("{}.json", inst.name()));
        write_if_changed(&p, inst.to_json_string().as_bytes())?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<InstanceOutcome> = pool.install(|| {
        instances
            .par_iter()
            .map(|inst| process_instance(cfg, inst, &out))
            .collect()
    });

    let mut failures: Vec<Failure> = Vec::new();
    let mut sens: Vec<SensitivityRow> = Vec::new();
    let mut summary = ExperimentSummary {
        instances: instances.len(),
        output: out.clone(),
        ..Default::default()
    };
    for o in outcomes {
        summary.units_run += o.run;
        summary.units_skipped += o.skipped;
        failures.extend(o.failures);
        sens.extend(o.sensitivity);
        debug_assert!(!o.name.is_empty());
    }

    if cfg.sensitivity.enabled {
        let mut buf = Vec::new();
        write_sensitivity_csv(&sens, &mut buf)?;
        write_if_changed(&out.join("sensitivity.csv"), &buf)?;
    }

    let names: Vec<String> = instances.iter().map(|i| i.name().to_string()).collect();
    let mut artifacts = Vec::new();
    for n in &names {
        let dir = out.join("runs").join(n);
        if dir.is_dir() {
            artifacts.extend(crate::report::load_artifacts(&dir)?);
        }
    }
    // drop leftovers from earlier configurations
    let current: Vec<(String, Solver, ModelVariant)> = names
        .iter()
        .flat_map(|n| {
            cfg.solvers
                .iter()
                .flat_map(move |&s| cfg.models.iter().map(move |&m| (n.clone(), s, m)))
        })
        .collect();
    artifacts.retain(|a| {
        current.contains(&(a.instance.clone(), a.solver, a.model))
            && (a.solver == Solver::Exact || a.run_id < cfg.runs)
    });

    if !artifacts.is_empty() {
        let report = build_report(&artifacts)?;
        let staging = out.join("report");
        fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        let tmp = tempdir_in(&out)?;
        write_report(&report, &tmp)?;
        for f in ["raw.csv", "best.csv", "summary.csv", "summary.json"] {
            let bytes = fs::read(tmp.join(f)).map_err(|e| Error::io(tmp.join(f), e))?;
            write_if_changed(&staging.join(f), &bytes)?;
        }
        fs::remove_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
    }
    if cfg.solvers.contains(&Solver::Exact) && cfg.solvers.contains(&Solver::Alns) {
        write_if_changed(
            &out.join("comparison.csv"),
            &comparison_csv(&comparison(&artifacts))?,
        )?;
    }

    failures.sort_by(|a, b| (&a.instance, &a.stage).cmp(&(&b.instance, &b.stage)));
    summary.failures = failures.len();
    write_if_changed(&out.join("failures.json"), &json_bytes(&failures))?;
    let manifest = Manifest {
        name: cfg.name.clone(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        instances: names,
        models: cfg.models.clone(),
        solvers: cfg.solvers.clone(),
        artifacts: artifacts.len(),
        failures: failures.len(),
    };
    write_if_changed(&out.join("manifest.json"), &json_bytes(&manifest))?;
    Ok(summary)
}

fn tempdir_in(dir: &Path) -> Result<PathBuf> {
    let p = dir.join(".report-tmp");
    if p.exists() {
        fs::remove_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
name = "t"
seed = 3
models = ["ns", "ws", "mws"]
solvers = ["2mls", "exact"]
runs = 2

[[instances.presets]]
preset = "small10"
count = 2

[alns]
stagnation = 30

[sensitivity]
enabled = true
coe_levels = [0.1, 0.5]
scenarios_per_level = 2
"#;

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::from_toml_str(SMALL).is_ok());
        let empty = SMALL.replace(r#"models = ["ns", "ws", "mws"]"#, "models = []");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&empty),
            Err(Error::Config(_))
        ));
        let big = SMALL.replace("small10", "setn");
        assert!(ExperimentConfig::from_toml_str(&big).is_err());
        let typo = SMALL.replace("runs = 2", "rnus = 2");
        assert!(ExperimentConfig::from_toml_str(&typo).is_err());
    }

    #[test]
    fn pipeline_is_resumable_and_reproducible() {
        let cfg = ExperimentConfig::from_toml_str(SMALL).unwrap();
        let a = tempfile::tempdir().unwrap();
        let first = run_experiment(&cfg, None, Some(a.path())).unwrap();
        assert_eq!(first.units_run, 2 * 2 * 3);
        assert_eq!(first.failures, 0);
        let snapshot = |dir: &Path| {
            let mut files = Vec::new();
            let mut stack = vec![dir.to_path_buf()];
            while let Some(d) = stack.pop() {
                for e in fs::read_dir(d).unwrap() {
                    let p = e.unwrap().path();
                    if p.is_dir() {
                        stack.push(p);
                    } else if !p.to_string_lossy().ends_with(".timings.csv") {
                        files.push((
                            p.strip_prefix(dir).unwrap().to_path_buf(),
                            fs::read(&p).unwrap(),
                        ));
                    }
                }
            }
            files.sort();
            files
        };
        let before = snapshot(a.path());
        let again = run_experiment(&cfg, None, Some(a.path())).unwrap();
        assert_eq!(again.units_run, 0);
        assert_eq!(again.units_skipped, 12);
        assert_eq!(snapshot(a.path()), before);

        let b = tempfile::tempdir().unwrap();
        let mut parallel = cfg.clone();
        parallel.jobs = 3;
        run_experiment(&parallel, None, Some(b.path())).unwrap();
        assert_eq!(snapshot(b.path()), before);
        assert!(a.path().join("comparison.csv").exists());
        assert!(a.path().join("sensitivity.csv").exists());
    }
}
