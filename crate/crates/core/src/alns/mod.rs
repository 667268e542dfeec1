//! Two-phase multi-start adaptive large neighborhood search.
//!
//! Phase one builds several starts from k-means++ seeds and keeps the best.
//! Phase two destroys and repairs it with roulette-selected operators whose
//! weights adapt to past success. Worse candidates pass with a probability
//! that rises while the best solution stagnates; the search stops after a
//! run of iterations without a new best.

mod construct;
mod insertion;
mod plan;
mod removal;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use removal::removal_range;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rng::{derive_seed, seeded, Rng};
use crate::scoring::ScoreModel;
use crate::solution::Solution;
use construct::plan_beats;
use plan::{better, same_objective, Context, Plan};

macro_rules! strategy_enum {
    ($name:ident { $($var:ident => $label:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $label)] $var),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$var),+];

            pub fn label(self) -> &'static str {
                match self {
                    $($name::$var => $label),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.pad(self.label())
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.label().eq_ignore_ascii_case(s))
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy `{s}`")))
            }
        }
    };
}

strategy_enum!(Removal {
    RndNn => "RND-NN",
    SequNn => "SEQU-NN",
    ScoreDelta => "SCORE-DELTA",
    SkelTour => "SKEL-TOUR",
    WorstDetour => "WORST-DETOUR",
    WorstAngle => "WORST-ANGLE",
});

strategy_enum!(Insertion {
    Rnd => "RND",
    MaxScore => "MAX-SCORE",
    ScoreRatio => "SCORE-RATIO",
    ScoreRatio2 => "SCORE-RATIO2",
    Greedy => "GREEDY",
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlnsConfig {
    /// Stop after this many iterations without a new best solution.
    pub stagnation: u64,
    /// Construction starts.
    pub starts: usize,
    /// Base acceptance temperature, relative to the best objective.
    pub temp0: f64,
    /// Stagnating iterations that add one `temp0` to the temperature.
    pub reheat_period: u64,
    /// Iterations per adaptive-weight segment.
    pub segment: u64,
    /// Share of the segment performance blended into a weight.
    pub reaction: f64,
    /// Segment rewards for a new best, an improvement, an acceptance.
    pub rewards: [f64; 3],
    pub weight_floor: f64,
    /// Probability of inserting an arbitrary optional customer instead of
    /// the strategy's choice.
    pub randomize: f64,
    pub max_iterations: Option<u64>,
    /// Wall-clock cap; results are no longer reproducible when it triggers.
    pub max_wall_ms: Option<u64>,
}

impl Default for AlnsConfig {
    fn default() -> Self {
        AlnsConfig {
            stagnation: 300,
            starts: 10,
            temp0: 0.01,
            reheat_period: 50,
            segment: 100,
            reaction: 0.2,
            rewards: [33.0, 13.0, 9.0],
            weight_floor: 0.05,
            randomize: 0.05,
            max_iterations: None,
            max_wall_ms: None,
        }
    }
}

impl AlnsConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.starts == 0 {
            return bad("starts must be at least 1");
        }
        if self.segment == 0 || self.reheat_period == 0 {
            return bad("segment and reheat_period must be positive");
        }
        if !(self.temp0 >= 0.0 && self.temp0.is_finite()) {
            return bad("temp0 must be a non-negative number");
        }
        if !(0.0..=1.0).contains(&self.reaction) || !(0.0..=1.0).contains(&self.randomize) {
            return bad("reaction and randomize must lie in [0, 1]");
        }
        if self.weight_floor.is_nan() || self.weight_floor <= 0.0 {
            return bad("weight_floor must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Feasible,
    /// No plan serving every mandatory customer was found and the model has
    /// no fallback.
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Stagnation,
    Iterations,
    WallClock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyStats {
    pub uses: u64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub iterations: u64,
    pub best_iteration: u64,
    pub stopped_by: StopReason,
    pub start_objective: f64,
    pub removal: BTreeMap<Removal, StrategyStats>,
    pub insertion: BTreeMap<Insertion, StrategyStats>,
    /// Kept out of serialized output so artifacts stay reproducible.
    #[serde(skip)]
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub seed: u64,
    pub solution: Solution,
    /// Objective under the model's own weights (mandatory customers count 0).
    pub objective: f64,
    pub total_travel: f64,
    /// Mandatory customers were demoted to optional by the model's fallback.
    pub demoted: bool,
    pub stats: RunStats,
}

/// Acceptance rule. `candidate`, `current` and `best` are (objective,
/// travel) pairs; `draw` is a uniform number in [0, 1).
pub fn accepts(
    candidate: (f64, f64),
    current: (f64, f64),
    best: (f64, f64),
    temperature: f64,
    draw: f64,
) -> bool {
    if better(candidate.0, candidate.1, current.0, current.1) {
        return true;
    }
    if temperature <= 0.0 {
        return false;
    }
    let delta = if same_objective(candidate.0, current.0) {
        (candidate.1 - current.1).max(0.0) / best.1.max(1e-9)
    } else {
        (current.0 - candidate.0) / best.0.abs().max(1e-9)
    };
    draw < (-delta / temperature).exp()
}

/// Temperature after `since_best` iterations without a new best.
pub fn temperature(cfg: &AlnsConfig, since_best: u64) -> f64 {
    cfg.temp0 * (1.0 + since_best as f64 / cfg.reheat_period as f64)
}

struct Roulette<K: Ord + Copy> {
    keys: Vec<K>,
    weights: Vec<f64>,
    uses: Vec<u64>,
    seg_score: Vec<f64>,
    seg_uses: Vec<u64>,
}

impl<K: Ord + Copy> Roulette<K> {
    fn new(keys: Vec<K>) -> Self {
        let n = keys.len();
        Roulette {
            keys,
            weights: vec![1.0; n],
            uses: vec![0; n],
            seg_score: vec![0.0; n],
            seg_uses: vec![0; n],
        }
    }

    fn pick(&mut self, rng: &mut Rng) -> usize {
        let total: f64 = self.weights.iter().sum();
        let mut x = rng.random::<f64>() * total;
        let mut chosen = self.weights.len() - 1;
        for (i, &w) in self.weights.iter().enumerate() {
            if x < w {
                chosen = i;
                break;
            }
            x -= w;
        }
        self.uses[chosen] += 1;
        self.seg_uses[chosen] += 1;
        chosen
    }

    fn reward(&mut self, i: usize, score: f64) {
        self.seg_score[i] += score;
    }

    fn end_segment(&mut self, cfg: &AlnsConfig) {
        for i in 0..self.weights.len() {
            if self.seg_uses[i] > 0 {
                let perf = self.seg_score[i] / self.seg_uses[i] as f64;
                self.weights[i] = (1.0 - cfg.reaction) * self.weights[i] + cfg.reaction * perf;
            }
            self.weights[i] = self.weights[i].max(cfg.weight_floor);
            self.seg_score[i] = 0.0;
            self.seg_uses[i] = 0;
        }
    }

    fn stats(&self) -> BTreeMap<K, StrategyStats> {
        self.keys
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                (
                    k,
                    StrategyStats {
                        uses: self.uses[i],
                        weight: self.weights[i],
                    },
                )
            })
            .collect()
    }
}

/// One 2MLS run from `seed`.
pub fn run(instance: &Instance, model: &ScoreModel, cfg: &AlnsConfig, seed: u64) -> RunOutcome {
    let clock = Instant::now();
    let mut rng = seeded(seed);
    let strict = Context::new(instance, model);
    let start = construct::multistart(&strict, cfg.starts, cfg.randomize, &mut rng);

    // With no start serving every mandatory customer, search on the demoted
    // weights: any plan keeping all of them outranks every plan that drops
    // one, so a complete plan found later is still optimal for the model.
    let relaxed_model;
    let (ctx, start) = if start.feasible {
        (strict, start)
    } else {
        relaxed_model = model.demoted(instance);
        let ctx = Context::new(instance, &relaxed_model);
        let plan = Plan::from_solution(&ctx, &start.to_solution(instance)).expect("own plan");
        (ctx, plan)
    };

    let mut removals = Roulette::new(
        Removal::ALL
            .iter()
            .copied()
            .filter(|&r| r != Removal::WorstAngle || ctx.has_coords)
            .collect(),
    );
    let mut insertions = Roulette::new(Insertion::ALL.to_vec());
    let (lo, hi) = removal_range(instance.len());
    let start_objective = start.objective;
    let mut current = start.clone();
    let mut best = start;
    let mut iter = 0u64;
    let mut since_best = 0u64;
    let mut best_iteration = 0u64;
    let stopped_by = loop {
        if since_best >= cfg.stagnation {
            break StopReason::Stagnation;
        }
        if cfg.max_iterations.is_some_and(|m| iter >= m) {
            break StopReason::Iterations;
        }
        if cfg
            .max_wall_ms
            .is_some_and(|m| clock.elapsed().as_millis() >= u128::from(m))
        {
            break StopReason::WallClock;
        }
        iter += 1;
        let r = removals.pick(&mut rng);
        let i = insertions.pick(&mut rng);
        let q = rng.random_range(lo..=hi);
        let mut cand = current.clone();
        let pool = removal::remove(&ctx, &mut cand, removals.keys[r], q, &mut rng);
        let repair = insertion::insert(
            &ctx,
            &mut cand,
            &pool,
            insertions.keys[i],
            cfg.randomize,
            &mut rng,
        );

        let mut score = 0.0;
        if repair.feasible {
            let c = (cand.objective, cand.travel);
            if plan_beats(&ctx, &cand, &best) {
                score = cfg.rewards[0];
                best = cand.clone();
                current = cand;
                since_best = 0;
                best_iteration = iter;
            } else {
                since_best += 1;
                let temp = temperature(cfg, since_best);
                let draw: f64 = rng.random();
                if better(c.0, c.1, current.objective, current.travel) {
                    score = cfg.rewards[1];
                    current = cand;
                } else if accepts(
                    c,
                    (current.objective, current.travel),
                    (best.objective, best.travel),
                    temp,
                    draw,
                ) {
                    score = cfg.rewards[2];
                    current = cand;
                }
            }
        } else {
            since_best += 1;
        }
        removals.reward(r, score);
        insertions.reward(i, score);
        if iter.is_multiple_of(cfg.segment) {
            removals.end_segment(cfg);
            insertions.end_segment(cfg);
        }
    };

    let complete = ctx_complete(model, instance, &best);
    let demoted = !complete && model.fallback();
    let status = if complete || demoted {
        RunStatus::Feasible
    } else {
        RunStatus::Infeasible
    };
    let solution = best.to_solution(instance);
    let objective = model.objective(&solution, instance).unwrap_or(0.0);
    RunOutcome {
        status,
        seed,
        objective,
        total_travel: best.travel,
        demoted,
        solution,
        stats: RunStats {
            iterations: iter,
            best_iteration,
            stopped_by,
            start_objective,
            removal: removals.stats(),
            insertion: insertions.stats(),
            wall_ms: clock.elapsed().as_millis() as u64,
        },
    }
}

fn ctx_complete(model: &ScoreModel, instance: &Instance, plan: &Plan) -> bool {
    (0..instance.len())
        .all(|p| !model.is_mandatory_position(instance, p) || plan.day_of[p].is_some())
}

/// Lexicographic run ranking: feasible over demoted over infeasible, then
/// objective, then travel.
fn outcome_rank(o: &RunOutcome) -> u8 {
    match (o.status, o.demoted) {
        (RunStatus::Feasible, false) => 2,
        (RunStatus::Feasible, true) => 1,
        _ => 0,
    }
}

/// True if `a` is a strictly better run than `b`.
pub fn outcome_beats(a: &RunOutcome, b: &RunOutcome) -> bool {
    let (ra, rb) = (outcome_rank(a), outcome_rank(b));
    if ra != rb {
        return ra > rb;
    }
    better(a.objective, a.total_travel, b.objective, b.total_travel)
}

/// Seed of run `index` under a master seed.
pub fn run_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, "alns-run", index as u64)
}

/// `runs` independent runs in parallel; returns the index of the best run
/// (earliest on ties) and every outcome in run order.
pub fn best_of_runs(
    instance: &Instance,
    model: &ScoreModel,
    cfg: &AlnsConfig,
    runs: usize,
    seed: u64,
) -> (usize, Vec<RunOutcome>) {
    let outcomes: Vec<RunOutcome> = (0..runs.max(1))
        .into_par_iter()
        .map(|r| run(instance, model, cfg, run_seed(seed, r)))
        .collect();
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate().skip(1) {
        if outcome_beats(o, &outcomes[best]) {
            best = i;
        }
    }
    (best, outcomes)
}

/// Best construction start only (the first phase), for inspection.
pub fn multistart(instance: &Instance, model: &ScoreModel, starts: usize, seed: u64) -> Solution {
    let ctx = Context::new(instance, model);
    let mut rng = seeded(seed);
    construct::multistart(&ctx, starts, AlnsConfig::default().randomize, &mut rng)
        .to_solution(instance)
}
