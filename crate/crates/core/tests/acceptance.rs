//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Run with `cargo test --release --test acceptance` for speed; the
//! test profile is optimized anyway.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use common::*;
use mpop::alns::{best_of_runs, run, AlnsConfig, RunStatus};
use mpop::exact::{solve_exact, OracleStatus};
use mpop::experiment::{alns_artifacts, exact_artifact, run_experiment, ExperimentConfig};
use mpop::kit::{
    classify_instance, generate_preset, rescore_uniform, subsample_small, synthesize, GenConfig,
    Preset,
};
use mpop::scoring::{build_model, sabc_weights, ModelOptions};
use mpop::sensitivity::{default_coe_levels, scenario_grid, sensitivity_rows, simulate_scores};
use mpop::solution::metrics;
use mpop::{check_feasible, AbcClass, CustomerId, Instance, ModelVariant, Solution, Tour};
use rand::seq::SliceRandom;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// First failing case, if any, for the detail line.
fn example<T: std::fmt::Debug>(first: Option<T>) -> String {
    first.map(|f| format!(", first {f:?}")).unwrap_or_default()
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let criteria: [Criterion; 8] = [
        (
            "1 oracle vs factorial brute force",
            oracle_matches_brute_force,
        ),
        ("2 2MLS vs oracle on size-10", heuristic_vs_oracle),
        ("3 model ordering under exact solving", model_ordering),
        ("4 sABC hierarchy", sabc_hierarchy),
        ("5 sensitivity protocol", sensitivity_protocol),
        ("6 2MLS scalability", scalability),
        ("7 determinism", determinism),
        ("8 feasibility suite", feasibility_suite),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        println!(
            "criterion {name}: {} ({}; {:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn opts() -> ModelOptions {
    ModelOptions::default()
}

fn oracle_matches_brute_force() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut checked = 0;
    let mut bad = Vec::new();
    for k in 0..200 {
        let n = r.random_range(0..=8);
        let days = r.random_range(1..=3);
        let m = r.random_range(0..=3);
        let inst = random_instance(&mut r, n, days, m);
        let durations = subset_durations_factorial(&inst);
        for v in ModelVariant::ALL {
            let model = build_model(v, &inst, &opts()).unwrap();
            let want =
                brute_force_assignments(&inst, &durations, model.weights(), model.mandatory());
            let got = solve_exact(&inst, &model, 12);
            checked += 1;
            let ok = match (want, got.status) {
                (None, OracleStatus::Infeasible) => true,
                (Some(w), OracleStatus::Optimal) => {
                    let sol = got.solution.as_ref().unwrap();
                    close(w, got.objective)
                        && close(model.objective(sol, &inst).unwrap(), w)
                        && model.check(sol, &inst).ok
                }
                _ => false,
            };
            if !ok {
                bad.push(format!(
                    "instance {k} {v}: want {want:?} got {:?} {}",
                    got.status, got.objective
                ));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < 300.0,
        format!(
            "{checked} instance-model pairs, {} mismatches{}",
            bad.len(),
            example(bad.first())
        ),
    )
}

fn heuristic_vs_oracle() -> Outcome {
    let start = Instant::now();
    let cfg = AlnsConfig::default();
    let mut pairs = 0usize;
    let mut matched = 0usize;
    let mut gap_sum = 0.0;
    for k in 0..200 {
        let inst = generate_preset(Preset::Small10, k, 2024).unwrap();
        for v in ModelVariant::ALL {
            let model = build_model(v, &inst, &opts()).unwrap();
            let exact = solve_exact(&inst, &model, 12);
            if exact.status != OracleStatus::Optimal {
                continue;
            }
            pairs += 1;
            let (best, runs) = best_of_runs(&inst, &model, &cfg, 10, k as u64);
            let b = &runs[best];
            let gap = if b.status != RunStatus::Feasible || b.demoted {
                1.0
            } else if exact.objective == 0.0 {
                0.0
            } else {
                ((exact.objective - b.objective) / exact.objective).max(0.0)
            };
            if close(b.objective, exact.objective) && !b.demoted {
                matched += 1;
            }
            gap_sum += gap;
        }
    }
    let rate = matched as f64 / pairs as f64;
    let gap = gap_sum / pairs as f64;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        rate >= 0.90 && gap <= 0.01 && secs < 600.0,
        format!(
            "{matched}/{pairs} optimal ({:.2}%), mean gap {:.4}%",
            100.0 * rate,
            100.0 * gap
        ),
    )
}

fn model_ordering() -> Outcome {
    let sets = [(Preset::Small10, 100), (Preset::Small15, 30)];
    let mut instances = 0;
    let mut violations = Vec::new();
    for (preset, count) in sets {
        for k in 0..count {
            let inst = generate_preset(preset, k, 99).unwrap();
            instances += 1;
            let mut shares = BTreeMap::new();
            for v in ModelVariant::ALL {
                let model = build_model(v, &inst, &opts()).unwrap();
                let res = solve_exact(&inst, &model, 15);
                if let Some(sol) = res.solution {
                    let m = metrics(&sol, &inst, &inst.scores()).unwrap();
                    shares.insert(v, (m.share_visited.unwrap(), m.share_realized.unwrap()));
                }
            }
            let (ns_v, _) = shares[&ModelVariant::Ns];
            let (_, ws_r) = shares[&ModelVariant::Ws];
            for (v, &(sv, sr)) in &shares {
                if sv > ns_v + 1e-12 {
                    violations.push(format!("{} {v} visits more than NS", inst.name()));
                }
                if sr > ws_r * (1.0 + 1e-12) {
                    violations.push(format!("{} {v} realizes more than WS", inst.name()));
                }
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{instances} instances, {} violations{}",
            violations.len(),
            example(violations.first())
        ),
    )
}

fn class_counts(
    inst: &Instance,
    visited: impl IntoIterator<Item = usize>,
) -> (usize, usize, usize) {
    let mut n = (0, 0, 0);
    for p in visited {
        match inst.customers()[p].abc_class {
            AbcClass::A => n.0 += 1,
            AbcClass::B => n.1 += 1,
            AbcClass::C => n.2 += 1,
            AbcClass::Unclassified => {}
        }
    }
    n
}

fn sabc_hierarchy() -> Outcome {
    let mut r = rng(4);
    let mut partition_fail = 0;
    for _ in 0..1000 {
        let nb = r.random_range(0..5000usize);
        let nc = r.random_range(0..5000usize);
        let w = sabc_weights(nb, nc);
        if !(w.a > w.c * nc as f64 + w.b * nb as f64 && w.b > w.c * nc as f64 && w.c > 0.0) {
            partition_fail += 1;
        }
    }

    let mut lex_fail = Vec::new();
    for k in 0..50u64 {
        let n = 8 + (k % 5) as usize;
        let src = synthesize(&GenConfig::setb_like(30), k).unwrap();
        let inst = subsample_small(&src, n, 0, 2, k).unwrap();
        let model = build_model(ModelVariant::Sabc, &inst, &opts()).unwrap();
        let res = solve_exact(&inst, &model, 12);
        let ok_sets = servable_sets(&inst, &subset_durations_dp(&inst));
        let best = (0..ok_sets.len())
            .filter(|&s| ok_sets[s])
            .map(|s| class_counts(&inst, (0..n).filter(move |&p| s >> p & 1 == 1)))
            .max()
            .unwrap();
        let got = res.solution.as_ref().map(|sol| {
            class_counts(
                &inst,
                sol.visited()
                    .into_iter()
                    .map(|id| inst.position(id).unwrap()),
            )
        });
        if got != Some(best) {
            lex_fail.push(format!(
                "{}: oracle {got:?} brute force {best:?}",
                inst.name()
            ));
        }
    }
    outcome(
        partition_fail == 0 && lex_fail.is_empty(),
        format!(
            "1000 partitions, {partition_fail} violations; 50 instances, {} lexicographic mismatches{}",
            lex_fail.len(),
            example(lex_fail.first())
        ),
    )
}

fn sensitivity_protocol() -> Outcome {
    let levels = default_coe_levels();
    let mut ws_not_one = 0;
    let mut low: BTreeMap<ModelVariant, (f64, usize)> = BTreeMap::new();
    for k in 0..20 {
        let inst = generate_preset(Preset::Small10, k, 555).unwrap();
        let mut plans = BTreeMap::new();
        for v in ModelVariant::ALL {
            let model = build_model(v, &inst, &opts()).unwrap();
            if let Some(sol) = solve_exact(&inst, &model, 12).solution {
                plans.insert(v, sol);
            }
        }
        let grid = scenario_grid(&inst, &levels, 10, k as u64).unwrap();
        assert_eq!(grid.len(), 130);
        for row in sensitivity_rows(&inst, &plans, &grid).unwrap() {
            if row.model == ModelVariant::Ws && row.rws_sim != Some(1.0) {
                ws_not_one += 1;
            }
            if row.model != ModelVariant::Ws && (row.coe - 0.1).abs() < 1e-12 {
                if let Some(x) = row.rws_sim {
                    let e = low.entry(row.model).or_default();
                    e.0 += x;
                    e.1 += 1;
                }
            }
        }
    }
    let means: BTreeMap<ModelVariant, f64> =
        low.iter().map(|(&v, &(s, n))| (v, s / n as f64)).collect();
    let not_below: Vec<String> = means
        .iter()
        .filter(|(_, &m)| m >= 1.0)
        .map(|(v, m)| format!("{v}={m:.6}"))
        .collect();

    let inst = generate_preset(Preset::Small10, 0, 555).unwrap();
    let mean = inst.mean_score().unwrap();
    let mut worst: f64 = 0.0;
    for (l, &coe) in levels.iter().enumerate() {
        let mut res = Vec::with_capacity(10_000);
        let mut s = 0u64;
        while res.len() < 10_000 {
            let sc = simulate_scores(&inst, coe, (l as u64) << 32 | s).unwrap();
            res.extend(
                sc.p_sim
                    .iter()
                    .zip(inst.customers())
                    .map(|(x, c)| x - c.score),
            );
            s += 1;
        }
        let mu = res.iter().sum::<f64>() / res.len() as f64;
        let sd =
            (res.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (res.len() - 1) as f64).sqrt();
        worst = worst.max((sd / (coe * mean) - 1.0).abs());
    }
    let all_models = means.len() == 5;
    outcome(
        ws_not_one == 0 && not_below.is_empty() && all_models && worst <= 0.05,
        format!(
            "WS rows not 1: {ws_not_one}; mean rws at coe 0.1 {}; not below 1: {not_below:?}; worst sd deviation {:.2}%",
            means.iter().map(|(v, m)| format!("{v}={m:.4}")).collect::<Vec<_>>().join(" "),
            100.0 * worst
        ),
    )
}

fn scalability() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (n, limit) in [(150usize, 60.0), (280, 180.0)] {
        let inst = synthesize(&GenConfig::setn_like(n), n as u64).unwrap();
        for v in [ModelVariant::Ws, ModelVariant::Mws] {
            let model = build_model(v, &inst, &opts()).unwrap();
            let t = Instant::now();
            let o = run(&inst, &model, &AlnsConfig::default(), 3);
            let secs = t.elapsed().as_secs_f64();
            pass &= secs < limit && o.status == RunStatus::Feasible;
            parts.push(format!("n={n} {v} {secs:.2}s"));
        }
    }
    outcome(pass, parts.join(", "))
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if !p.to_string_lossy().ends_with(".timings.csv") {
                out.push((
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let mut diffs = Vec::new();
    let mut check = |what: &str, a: String, b: String| {
        if a != b {
            diffs.push(what.to_string());
        }
    };
    for p in Preset::ALL {
        check(
            p.key(),
            generate_preset(p, 3, 8).unwrap().to_json_string(),
            generate_preset(p, 3, 8).unwrap().to_json_string(),
        );
    }
    let src = synthesize(&GenConfig::setb_like(40), 8).unwrap();
    check(
        "synthesize",
        src.to_json_string(),
        synthesize(&GenConfig::setb_like(40), 8)
            .unwrap()
            .to_json_string(),
    );
    check(
        "classify",
        classify_instance(&src, 2).0.to_json_string(),
        classify_instance(&src, 2).0.to_json_string(),
    );
    check(
        "subsample",
        subsample_small(&src, 12, 3, 2, 4).unwrap().to_json_string(),
        subsample_small(&src, 12, 3, 2, 4).unwrap().to_json_string(),
    );
    check(
        "rescore",
        rescore_uniform(&src, 1.0, 1000.0, 4)
            .unwrap()
            .to_json_string(),
        rescore_uniform(&src, 1.0, 1000.0, 4)
            .unwrap()
            .to_json_string(),
    );

    let cfg = AlnsConfig {
        randomize: 0.3,
        ..AlnsConfig::default()
    };
    let small = generate_preset(Preset::Small10, 1, 8).unwrap();
    for v in ModelVariant::ALL {
        let json = |inst: &Instance| {
            let (arts, _) = alns_artifacts(inst, v, &opts(), &cfg, 4, 77, "h").unwrap();
            arts.iter().map(|a| a.to_json_string()).collect::<String>()
        };
        check(&format!("2mls {v}"), json(&src), json(&src));
        check(
            &format!("exact {v}"),
            exact_artifact(&small, v, &opts(), 12, "h")
                .unwrap()
                .to_json_string(),
            exact_artifact(&small, v, &opts(), 12, "h")
                .unwrap()
                .to_json_string(),
        );
    }
    let grid = |s| {
        serde_json::to_string(&scenario_grid(&small, &default_coe_levels(), 10, s).unwrap())
            .unwrap()
    };
    check("scenario grid", grid(5), grid(5));

    let exp = ExperimentConfig::from_toml_str(
        r#"
name = "det"
seed = 4
models = ["ns", "mns", "sabc", "wabc", "ws", "mws"]
solvers = ["exact", "2mls"]
runs = 3

[[instances.presets]]
preset = "small10"
count = 4

[sensitivity]
enabled = true
scenarios_per_level = 3
"#,
    )
    .unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&exp, None, Some(a.path())).unwrap();
    let mut parallel = exp.clone();
    parallel.jobs = 4;
    run_experiment(&parallel, None, Some(b.path())).unwrap();
    let ta = tree(a.path());
    if ta != tree(b.path()) {
        diffs.push("experiment tree".into());
    }
    run_experiment(&exp, None, Some(a.path())).unwrap();
    if ta != tree(a.path()) {
        diffs.push("experiment rerun".into());
    }
    outcome(
        diffs.is_empty(),
        format!(
            "{} files in the experiment tree; differences: {diffs:?}",
            ta.len()
        ),
    )
}

/// One random corruption of a feasible plan.
fn mutate(sol: &mut Solution, inst: &Instance, r: &mut rand_chacha::ChaCha8Rng) {
    let visited: Vec<CustomerId> = sol.visited().into_iter().collect();
    match r.random_range(0..3) {
        0 if !visited.is_empty() => {
            let id = visited[r.random_range(0..visited.len())];
            let t = r.random_range(0..sol.tours.len());
            let at = r.random_range(0..=sol.tours[t].visits.len());
            sol.tours[t].visits.insert(at, id);
        }
        1 => {
            let t = r.random_range(0..sol.tours.len());
            let mut unvisited: Vec<CustomerId> = inst
                .customers()
                .iter()
                .map(|c| c.id)
                .filter(|id| !visited.contains(id))
                .collect();
            unvisited.shuffle(r);
            for id in unvisited.into_iter().take(r.random_range(1..=4)) {
                let at = r.random_range(0..=sol.tours[t].visits.len());
                sol.tours[t].visits.insert(at, id);
            }
        }
        _ => {
            let flagged: Vec<CustomerId> = inst.mandatory_ids().into_iter().collect();
            if let Some(&id) = flagged.get(r.random_range(0..flagged.len().max(1))) {
                for t in &mut sol.tours {
                    t.visits.retain(|&x| x != id);
                }
            }
        }
    }
}

fn feasibility_suite() -> Outcome {
    let mut r = rng(8);
    let mut bases = Vec::new();
    for k in 0..20 {
        let inst = if k % 2 == 0 {
            generate_preset(Preset::Setb, k, 8).unwrap()
        } else {
            generate_preset(Preset::Small15, k, 8).unwrap()
        };
        let model = build_model(ModelVariant::Mws, &inst, &opts()).unwrap();
        let cfg = AlnsConfig {
            stagnation: 50,
            ..AlnsConfig::default()
        };
        let o = run(&inst, &model, &cfg, k as u64);
        if o.status == RunStatus::Feasible && !o.demoted {
            bases.push((inst, o.solution));
        }
    }
    let mut wrong = 0;
    let mut clean_flagged = 0;
    let mut violated = 0;
    for (inst, base) in &bases {
        if !check_feasible(base, inst).ok {
            clean_flagged += 1;
        }
    }
    let mut first = None;
    for i in 0..10_000 {
        let (inst, base) = &bases[i % bases.len()];
        let mut sol = base.clone();
        for _ in 0..r.random_range(1..=3) {
            mutate(&mut sol, inst, &mut r);
        }
        let want = expected_violations(&sol, inst);
        let got = check_feasible(&sol, inst);
        if !want.is_empty() {
            violated += 1;
        }
        if got.ok != want.is_empty() || !same_violations(&got.violations, &want) {
            wrong += 1;
            first.get_or_insert((want, got.violations));
        }
    }
    // exotic structure is classified too
    let (inst, base) = &bases[0];
    let mut odd = base.clone();
    odd.tours
        .push(Tour::new(inst.horizon_days() + 2, vec![CustomerId(9999)]));
    odd.tours.push(Tour::new(0, vec![]));
    let odd_ok = same_violations(
        &check_feasible(&odd, inst).violations,
        &expected_violations(&odd, inst),
    );
    outcome(
        wrong == 0 && clean_flagged == 0 && odd_ok && bases.len() >= 10,
        format!(
            "{} base plans, 10000 mutations ({violated} infeasible), {wrong} misclassified{}",
            bases.len(),
            example(first.as_ref())
        ),
    )
}
