use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mpop::alns::{best_of_runs, AlnsConfig, RunStatus};
use mpop::exact::{export_lp, solve_exact, OracleStatus, DEFAULT_SIZE_LIMIT};
use mpop::experiment::{
    content_hash, exact_artifact, outcome_artifacts, run_experiment, ExperimentConfig,
};
use mpop::kit::{
    classify_instance, generate_preset, rescore_uniform, select_mandatory, subsample_small,
    synthesize, GenConfig, Preset, ScoreMode,
};
use mpop::report::{build_report, load_artifacts, write_report};
use mpop::scoring::{build_model, ClassWeights, MandatorySource, ModelOptions, WabcMode};
use mpop::sensitivity::{
    default_coe_levels, scenario_grid, sensitivity_rows, write_sensitivity_csv,
    DEFAULT_SCENARIOS_PER_LEVEL,
};
use mpop::{Error, Instance, ModelVariant, Result, Solution};

/// Multi-period orienteering for field sales tour planning.
#[derive(Parser)]
#[command(name = "mpop", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic instances from a preset or explicit parameters.
    Gen(GenArgs),
    /// Transform an existing instance.
    Derive {
        #[command(subcommand)]
        op: DeriveOp,
    },
    /// Solve with 2MLS, best of several seeded runs.
    Solve(SolveArgs),
    /// Solve a small instance to optimality.
    Exact(ExactArgs),
    /// Re-evaluate each model's plan under simulated score realizations.
    Sensitivity(SensitivityArgs),
    /// Summarize a directory of run artifacts.
    Report(ReportArgs),
    /// Run a whole study from a TOML config.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, conflicts_with_all = ["customers", "days", "service_min", "service_max", "score_mode", "mandatory", "max_daily_minutes", "region_size", "minutes_per_unit", "name"])]
    preset: Option<Preset>,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Index of the first preset instance.
    #[arg(long, default_value_t = 0)]
    start: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    customers: Option<usize>,
    #[arg(long)]
    days: Option<usize>,
    #[arg(long)]
    service_min: Option<f64>,
    #[arg(long)]
    service_max: Option<f64>,
    /// uniform:LO:HI or skewed:LO:HI
    #[arg(long)]
    score_mode: Option<ScoreMode>,
    #[arg(long)]
    mandatory: Option<usize>,
    #[arg(long)]
    max_daily_minutes: Option<f64>,
    #[arg(long)]
    region_size: Option<f64>,
    #[arg(long)]
    minutes_per_unit: Option<f64>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long, default_value = "instances")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum DeriveOp {
    /// Recompute ABC classes from the scores.
    Abc {
        #[command(flatten)]
        io: DeriveIo,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Flag the `count` best-scoring customers as mandatory.
    Mandatory {
        #[command(flatten)]
        io: DeriveIo,
        #[arg(long)]
        count: usize,
    },
    /// Replace scores with uniform draws on [lo, hi].
    Rescore {
        #[command(flatten)]
        io: DeriveIo,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Stratified sample of a small instance.
    Subsample {
        #[command(flatten)]
        io: DeriveIo,
        #[arg(long, short)]
        n: usize,
        #[arg(long, short)]
        m: usize,
        #[arg(long, short)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct DeriveIo {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MandatoryArg {
    Designated,
    Instance,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    model: ModelVariant,
    /// wABC class weights A,B,C.
    #[arg(long, default_value = "15,5,1", conflicts_with = "wabc_class_means")]
    wabc_weights: ClassWeights,
    /// wABC weights from the class mean scores.
    #[arg(long)]
    wabc_class_means: bool,
    /// Which models enforce the instance's mandatory flags.
    #[arg(long, value_enum, default_value = "designated")]
    mandatory: MandatoryArg,
    /// Demote mandatory customers when they cannot all be visited.
    #[arg(long)]
    fallback: bool,
}

impl ModelArgs {
    fn options(&self) -> ModelOptions {
        ModelOptions {
            mandatory: match self.mandatory {
                MandatoryArg::Designated => MandatorySource::Designated,
                MandatoryArg::Instance => MandatorySource::Instance,
            },
            wabc: if self.wabc_class_means {
                WabcMode::ClassMeans
            } else {
                WabcMode::Fixed(self.wabc_weights)
            },
            fallback: self.fallback,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iterations without improvement before a run stops.
    #[arg(long)]
    stagnation: Option<u64>,
    #[arg(long)]
    time_limit_ms: Option<u64>,
    /// TOML file with search parameters; flags override it.
    #[arg(long)]
    alns_config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = DEFAULT_SIZE_LIMIT)]
    size_limit: usize,
    /// Also write the model as a CPLEX LP file.
    #[arg(long)]
    export_lp: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SensitivityArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    solver: SolverArg,
    /// Models to compare; WS is always included.
    #[arg(long, value_delimiter = ',', default_value = "ns,mns,sabc,wabc,ws,mws")]
    models: Vec<ModelVariant>,
    #[arg(long, value_delimiter = ',')]
    coe_levels: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_SCENARIOS_PER_LEVEL)]
    scenarios: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = DEFAULT_SIZE_LIMIT)]
    size_limit: usize,
    #[arg(long, default_value = "sensitivity.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    #[value(name = "2mls")]
    Alns,
    Exact,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory searched recursively for run artifacts.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "report")]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    config: PathBuf,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configured thread count.
    #[arg(long)]
    jobs: Option<usize>,
}

/// Failure modes mapped onto exit codes.
enum Failure {
    Error(Error),
    /// Size limit hit or no feasible plan: exit code 2.
    Guard(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let res = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Derive { op } => cmd_derive(op),
        Command::Solve(a) => cmd_solve(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Sensitivity(a) => cmd_sensitivity(a),
        Command::Report(a) => cmd_report(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Guard(m)) => {
            eprintln!("{m}");
            ExitCode::from(2)
        }
    }
}

fn write(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, content).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    let mut made = Vec::with_capacity(a.count);
    if let Some(p) = a.preset {
        for k in a.start..a.start + a.count {
            made.push(generate_preset(p, k, a.seed)?);
        }
    } else {
        let n = a.customers.ok_or_else(|| {
            Error::InvalidArgument("either --preset or --customers is required".into())
        })?;
        let base = GenConfig::setn_like(n);
        let cfg = GenConfig {
            name: a.name.unwrap_or_else(|| "gen".into()),
            n_customers: n,
            horizon_days: a.days.unwrap_or(base.horizon_days),
            service_min: a.service_min.unwrap_or(base.service_min),
            service_max: a.service_max.unwrap_or(base.service_max),
            score_mode: a.score_mode.unwrap_or(base.score_mode),
            mandatory_count: a.mandatory.unwrap_or(base.mandatory_count.min(n)),
            max_daily_minutes: a.max_daily_minutes.unwrap_or(base.max_daily_minutes),
            region_size: a.region_size.unwrap_or(base.region_size),
            minutes_per_unit: a.minutes_per_unit.unwrap_or(base.minutes_per_unit),
        };
        for k in 0..a.count {
            let seed = mpop::rng::derive_seed(a.seed, &cfg.name, k as u64);
            let inst = synthesize(&cfg, seed)?;
            made.push(inst.with_name(format!("{}-{k:03}", cfg.name)));
        }
    }
    for inst in &made {
        write(
            &a.out.join(format!("{}.json", inst.name())),
            &inst.to_json_string(),
        )?;
    }
    println!("wrote {} instances to {}", made.len(), a.out.display());
    Ok(())
}

fn cmd_derive(op: DeriveOp) -> CmdResult {
    let (io, out) = match op {
        DeriveOp::Abc { io, seed } => {
            let inst = Instance::load(&io.instance)?;
            let (c, _) = classify_instance(&inst, seed);
            (io, c)
        }
        DeriveOp::Mandatory { io, count } => {
            let inst = Instance::load(&io.instance)?;
            let ids = select_mandatory(&inst, count);
            (io, inst.with_mandatory(&ids))
        }
        DeriveOp::Rescore { io, lo, hi, seed } => {
            let inst = Instance::load(&io.instance)?;
            let r = rescore_uniform(&inst, lo, hi, seed)?;
            (io, r)
        }
        DeriveOp::Subsample { io, n, m, d, seed } => {
            let inst = Instance::load(&io.instance)?;
            let s = subsample_small(&inst, n, m, d, seed)?;
            (io, s)
        }
    };
    write(&io.out, &out.to_json_string())?;
    Ok(())
}

fn alns_config(a: &SolveArgs) -> Result<AlnsConfig> {
    let mut cfg = match &a.alns_config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => AlnsConfig::default(),
    };
    if let Some(s) = a.stagnation {
        cfg.stagnation = s;
    }
    if a.time_limit_ms.is_some() {
        cfg.max_wall_ms = a.time_limit_ms;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_solve(a: SolveArgs) -> CmdResult {
    if a.runs == 0 {
        return Err(Error::InvalidArgument("--runs must be at least 1".into()).into());
    }
    let inst = Instance::load(&a.instance)?;
    let cfg = alns_config(&a)?;
    let opts = a.model.options();
    let model = build_model(a.model.model, &inst, &opts)?;
    let hash = content_hash(
        serde_json::to_string(&(&cfg, &opts))
            .expect("config")
            .as_bytes(),
    );
    let (best, outcomes) = best_of_runs(&inst, &model, &cfg, a.runs, a.seed);
    for art in outcome_artifacts(&inst, a.model.model, &outcomes, &hash)? {
        write(&a.out.join(art.file_name()), &art.to_json_string())?;
    }
    let b = &outcomes[best];
    write(&a.out.join("best.json"), &b.solution.to_json_string())?;
    write(&a.out.join("stats.json"), &pretty(&b.stats))?;
    println!(
        "{} {}: objective {} travel {:.3} ({:?}{}) best run {best}",
        inst.name(),
        a.model.model,
        b.objective,
        b.total_travel,
        b.status,
        if b.demoted { ", demoted" } else { "" }
    );
    if b.status == RunStatus::Infeasible {
        return Err(Failure::Guard(
            "no run visits every mandatory customer".into(),
        ));
    }
    Ok(())
}

fn cmd_exact(a: ExactArgs) -> CmdResult {
    let inst = Instance::load(&a.instance)?;
    let opts = a.model.options();
    let model = build_model(a.model.model, &inst, &opts)?;
    if let Some(p) = &a.export_lp {
        write(p, &export_lp(&inst, &model))?;
    }
    let res = solve_exact(&inst, &model, a.size_limit);
    let art = exact_artifact(
        &inst,
        a.model.model,
        &opts,
        a.size_limit,
        &format!("limit-{}", a.size_limit),
    )?;
    write(&a.out.join(art.file_name()), &art.to_json_string())?;
    write(&a.out.join("oracle.json"), &pretty(&res))?;
    if let Some(sol) = &res.solution {
        write(&a.out.join("solution.json"), &sol.to_json_string())?;
    }
    match res.status {
        OracleStatus::Optimal => {
            println!(
                "{} {}: optimal objective {} travel {:.3}{}",
                inst.name(),
                a.model.model,
                res.objective,
                res.total_travel,
                if res.demoted { " (demoted)" } else { "" }
            );
            Ok(())
        }
        OracleStatus::SizeExceeded => Err(Failure::Guard(format!(
            "{} has {} customers, above the size limit of {}",
            inst.name(),
            inst.len(),
            a.size_limit
        ))),
        OracleStatus::Infeasible => Err(Failure::Guard(format!(
            "{}: no plan visits every mandatory customer",
            inst.name()
        ))),
    }
}

fn cmd_sensitivity(a: SensitivityArgs) -> CmdResult {
    let inst = Instance::load(&a.instance)?;
    let mut models = a.models.clone();
    if !models.contains(&ModelVariant::Ws) {
        models.push(ModelVariant::Ws);
    }
    let opts = ModelOptions::default();
    let mut plans: BTreeMap<ModelVariant, Solution> = BTreeMap::new();
    for &v in &models {
        let model = build_model(v, &inst, &opts)?;
        let plan = match a.solver {
            SolverArg::Exact => {
                let r = solve_exact(&inst, &model, a.size_limit);
                if r.status == OracleStatus::SizeExceeded {
                    return Err(Failure::Guard(format!(
                        "{} has {} customers, above the size limit of {}",
                        inst.name(),
                        inst.len(),
                        a.size_limit
                    )));
                }
                r.solution
            }
            SolverArg::Alns => {
                let (best, outs) =
                    best_of_runs(&inst, &model, &AlnsConfig::default(), a.runs, a.seed);
                let o = &outs[best];
                (o.status == RunStatus::Feasible).then(|| o.solution.clone())
            }
        };
        match plan {
            Some(p) => {
                plans.insert(v, p);
            }
            None if v == ModelVariant::Ws => {
                return Err(Failure::Guard("WS has no feasible plan".into()));
            }
            None => eprintln!("{v}: no feasible plan, left out"),
        }
    }
    let levels = a.coe_levels.clone().unwrap_or_else(default_coe_levels);
    let grid = scenario_grid(&inst, &levels, a.scenarios, a.seed)?;
    let rows = sensitivity_rows(&inst, &plans, &grid)?;
    let mut buf = Vec::new();
    write_sensitivity_csv(&rows, &mut buf)?;
    write(&a.out, std::str::from_utf8(&buf).expect("csv is utf-8"))?;
    println!("wrote {} rows to {}", rows.len(), a.out.display());
    Ok(())
}

fn cmd_report(a: ReportArgs) -> CmdResult {
    let arts = load_artifacts(&a.input)?;
    if arts.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no run artifacts under {}",
            a.input.display()
        ))
        .into());
    }
    let report = build_report(&arts)?;
    write_report(&report, &a.out)?;
    println!(
        "{} artifacts, {} of {} instances kept; wrote {}",
        arts.len(),
        report.summary.instances_kept,
        report.summary.instances_total,
        a.out.display()
    );
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> CmdResult {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(j) = a.jobs {
        cfg.jobs = j;
    }
    let s = run_experiment(&cfg, Some(&a.config), a.out.as_deref())?;
    println!(
        "{}: {} instances, {} units run, {} skipped, {} failures -> {}",
        cfg.name,
        s.instances,
        s.units_run,
        s.units_skipped,
        s.failures,
        s.output.display()
    );
    Ok(())
}
