//! Provably optimal plans for small instances.
//!
//! A Held-Karp table gives the shortest closed tour for every customer
//! subset that fits into one working day. Days are interchangeable (there
//! are no time windows), so an optimal plan is a best set of at most `d`
//! disjoint day-feasible subsets covering the mandatory customers. A subset
//! DP over "at most k days" finds it; every assignment of customers to
//! {day 1..d, unvisited} is accounted for, with day permutations collapsed.
//! Plans are ranked by objective, then by lower total travel.

mod held_karp;
mod lp;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use held_karp::{min_tour, min_tour_duration, MAX_TOUR_SET};
pub use lp::export_lp;

use crate::instance::{CustomerId, Instance};
use crate::scoring::ScoreModel;
use crate::solution::{Solution, Tour, TIME_EPS};
use held_karp::PathTable;

pub const DEFAULT_SIZE_LIMIT: usize = 12;
/// Limit above which the subset tables no longer fit comfortably in memory.
pub const HARD_SIZE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleStatus {
    Optimal,
    Infeasible,
    SizeExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub status: OracleStatus,
    pub solution: Option<Solution>,
    pub objective: f64,
    pub total_travel: f64,
    /// (day count, subset, first-day subset) combinations examined.
    pub enumerated_assignments: u64,
    /// The mandatory set was infeasible and the model's fallback was used.
    pub demoted: bool,
}

impl OracleResult {
    fn bare(status: OracleStatus, enumerated: u64) -> Self {
        OracleResult {
            status,
            solution: None,
            objective: 0.0,
            total_travel: 0.0,
            enumerated_assignments: enumerated,
            demoted: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Value {
    objective: f64,
    travel: f64,
}

impl Value {
    const ZERO: Value = Value {
        objective: 0.0,
        travel: 0.0,
    };

    fn add(self, o: Value) -> Value {
        Value {
            objective: self.objective + o.objective,
            travel: self.travel + o.travel,
        }
    }

    /// Higher objective wins; near-equal objectives fall back to travel.
    fn better_than(self, o: Value) -> bool {
        let tol = 1e-9 * self.objective.abs().max(o.objective.abs()).max(1.0);
        if self.objective > o.objective + tol {
            true
        } else if self.objective < o.objective - tol {
            false
        } else {
            self.travel < o.travel - 1e-9
        }
    }
}

/// Per-subset tables shared by every score model on one instance.
pub struct ExactOracle<'a> {
    instance: &'a Instance,
    table: PathTable,
    /// Closed-tour travel for day-feasible subsets.
    day_travel: Vec<Option<f64>>,
}

impl<'a> ExactOracle<'a> {
    /// `None` if the instance has more than [`HARD_SIZE_LIMIT`] customers.
    pub fn new(instance: &'a Instance) -> Option<Self> {
        let n = instance.len();
        if n > HARD_SIZE_LIMIT {
            return None;
        }
        let positions: Vec<usize> = (0..n).collect();
        let limit = instance.max_daily_minutes();
        let table = PathTable::build(instance, &positions, Some(limit));
        let day_travel = (0..1usize << n)
            .map(|mask| {
                // service alone over the limit: rejected before any routing
                if table.service(mask) > limit + TIME_EPS {
                    return None;
                }
                table
                    .closed(mask)
                    .map(|(t, _)| t)
                    .filter(|t| t + table.service(mask) <= limit + TIME_EPS)
            })
            .collect();
        Some(ExactOracle {
            instance,
            table,
            day_travel,
        })
    }

    /// Best plan under `model`; applies the model's mandatory fallback when
    /// the mandatory set cannot be served.
    pub fn solve(&self, model: &ScoreModel) -> OracleResult {
        let result = self.solve_strict(model);
        if result.status == OracleStatus::Infeasible && model.fallback() {
            let mut relaxed = self.solve_strict(&model.demoted(self.instance));
            relaxed.enumerated_assignments += result.enumerated_assignments;
            relaxed.demoted = true;
            return relaxed;
        }
        result
    }

    fn solve_strict(&self, model: &ScoreModel) -> OracleResult {
        let inst = self.instance;
        let n = inst.len();
        let size = 1usize << n;
        let weights = model.weights();
        let mut mask_weight = vec![0.0; size];
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            mask_weight[mask] = mask_weight[mask & (mask - 1)] + weights[low];
        }
        let single: Vec<Option<Value>> = (0..size)
            .map(|mask| {
                self.day_travel[mask].map(|travel| Value {
                    objective: mask_weight[mask],
                    travel,
                })
            })
            .collect();
        let mandatory_mask = inst
            .customers()
            .iter()
            .enumerate()
            .filter(|(_, c)| model.mandatory().contains(&c.id))
            .fold(0usize, |m, (i, _)| m | (1 << i));

        let days = inst.horizon_days().min(n.max(1));
        // layers[k][S]: best split of exactly S into at most k+1 day tours
        let mut layers: Vec<Vec<Option<(Value, usize)>>> = Vec::with_capacity(days);
        let mut enumerated = 0u64;
        layers.push(
            single
                .iter()
                .enumerate()
                .map(|(mask, v)| v.map(|v| (v, mask)))
                .collect(),
        );
        enumerated += size as u64;
        for _ in 1..days {
            let prev = layers.last().expect("first layer present");
            let next: Vec<(Option<(Value, usize)>, u64)> = (0..size)
                .into_par_iter()
                .map(|s| split(s, &single, prev))
                .collect();
            enumerated += next.iter().map(|(_, c)| c).sum::<u64>();
            layers.push(next.into_iter().map(|(v, _)| v).collect());
        }

        let top = layers.last().expect("at least one layer");
        let mut best: Option<(Value, usize)> = None;
        for (s, entry) in top.iter().enumerate() {
            if s & mandatory_mask != mandatory_mask {
                continue;
            }
            if let Some((v, _)) = entry {
                if best.is_none_or(|(b, _)| v.better_than(b)) {
                    best = Some((*v, s));
                }
            }
        }
        let Some((value, set)) = best else {
            return OracleResult::bare(OracleStatus::Infeasible, enumerated);
        };

        let mut parts = Vec::with_capacity(days);
        let mut rest = set;
        for layer in layers.iter().rev() {
            if rest == 0 {
                break;
            }
            let (_, first) = layer[rest].expect("reconstruction follows stored choices");
            parts.push(first);
            rest &= !first;
        }
        let mut tours: Vec<Tour> = parts
            .iter()
            .enumerate()
            .map(|(day, &mask)| {
                let visits = self
                    .table
                    .order(mask)
                    .into_iter()
                    .map(|i| inst.customers()[i].id)
                    .collect();
                Tour::new(day, visits)
            })
            .collect();
        for day in tours.len()..inst.horizon_days() {
            tours.push(Tour::new(day, Vec::new()));
        }
        OracleResult {
            status: OracleStatus::Optimal,
            solution: Some(Solution {
                instance: inst.name().to_string(),
                tours,
            }),
            objective: value.objective,
            total_travel: value.travel,
            enumerated_assignments: enumerated,
            demoted: false,
        }
    }
}

/// Best way to serve exactly `s` with one day tour containing its lowest
/// customer plus a plan for the remainder from `prev`.
fn split(
    s: usize,
    single: &[Option<Value>],
    prev: &[Option<(Value, usize)>],
) -> (Option<(Value, usize)>, u64) {
    if s == 0 {
        return (Some((Value::ZERO, 0)), 1);
    }
    let low = s & s.wrapping_neg();
    let others = s & !low;
    let mut best: Option<(Value, usize)> = None;
    let mut count = 0u64;
    // first part = low | sub for every sub of the other members
    let mut sub = others;
    loop {
        count += 1;
        let part = low | sub;
        if let (Some(day), Some((rest, _))) = (single[part], prev[s & !part]) {
            let v = day.add(rest);
            if best.is_none_or(|(b, _)| v.better_than(b)) {
                best = Some((v, part));
            }
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & others;
    }
    (best, count)
}

/// Solves `instance` exactly, or reports [`OracleStatus::SizeExceeded`]
/// when it has more than `size_limit` customers.
pub fn solve_exact(instance: &Instance, model: &ScoreModel, size_limit: usize) -> OracleResult {
    if instance.len() > size_limit.min(HARD_SIZE_LIMIT) {
        return OracleResult::bare(OracleStatus::SizeExceeded, 0);
    }
    ExactOracle::new(instance)
        .expect("size checked")
        .solve(model)
}

/// Ids of the visited customers per day of an oracle plan.
pub fn visited_ids(result: &OracleResult) -> Vec<CustomerId> {
    result
        .solution
        .as_ref()
        .map(|s| s.visited().into_iter().collect())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Customer, TravelMatrix};
    use crate::scoring::{build_mws, build_ns, build_ws};
    use std::collections::BTreeSet;

    fn line(limit: f64, days: usize, mandatory: &[u32]) -> Instance {
        // customers at 10, 20, 30 minutes out along one road
        let pos: [f64; 4] = [0.0, 10.0, 20.0, 30.0];
        let n = pos.len();
        let times = (0..n * n)
            .map(|k| (pos[k / n] - pos[k % n]).abs())
            .collect();
        let customers = (1..=3)
            .map(|i| Customer::new(i, 5.0, i as f64).mandatory(mandatory.contains(&i)))
            .collect();
        Instance::new(
            "line",
            days,
            limit,
            customers,
            TravelMatrix::new(n, times).unwrap(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn empty_instance_is_trivially_optimal() {
        let inst = Instance::new(
            "e",
            2,
            10.0,
            vec![],
            TravelMatrix::new(1, vec![0.0]).unwrap(),
            None,
        )
        .unwrap();
        let r = solve_exact(&inst, &build_ns(&inst), DEFAULT_SIZE_LIMIT);
        assert_eq!(r.status, OracleStatus::Optimal);
        assert_eq!(r.objective, 0.0);
        assert!(r.solution.unwrap().tours.iter().all(Tour::is_empty));
    }

    #[test]
    fn unreachable_mandatory_is_infeasible() {
        let inst = line(30.0, 1, &[3]);
        let r = solve_exact(&inst, &build_ns(&inst), DEFAULT_SIZE_LIMIT);
        assert_eq!(r.status, OracleStatus::Infeasible);
        assert!(r.solution.is_none());
    }

    #[test]
    fn fallback_demotes_unreachable_mandatory() {
        // customer 3 needs 65 min alone; limit 60 -> can never be served
        let inst = line(60.0, 1, &[]);
        let extra: BTreeSet<_> = [CustomerId(3)].into();
        let strict = build_mws(&inst, &extra, false).unwrap();
        assert_eq!(
            solve_exact(&inst, &strict, 12).status,
            OracleStatus::Infeasible
        );
        let lenient = build_mws(&inst, &extra, true).unwrap();
        let r = solve_exact(&inst, &lenient, 12);
        assert_eq!(r.status, OracleStatus::Optimal);
        assert!(r.demoted);
        // 1 and 2 fit: 40 travel + 10 service
        assert_eq!(visited_ids(&r), vec![CustomerId(1), CustomerId(2)]);
    }

    #[test]
    fn whole_line_in_one_day() {
        let inst = line(75.0, 1, &[]);
        let r = solve_exact(&inst, &build_ws(&inst).unwrap(), 12);
        assert_eq!(r.objective, 6.0);
        assert_eq!(r.total_travel, 60.0);
        let sol = r.solution.unwrap();
        assert_eq!(sol.tours[0].visits.len(), 3);
    }

    #[test]
    fn size_guard() {
        let customers = (0..13).map(|i| Customer::new(i, 1.0, 1.0)).collect();
        let inst = Instance::new(
            "g",
            1,
            10.0,
            customers,
            TravelMatrix::new(14, vec![0.0; 196]).unwrap(),
            None,
        )
        .unwrap();
        let r = solve_exact(&inst, &build_ns(&inst), DEFAULT_SIZE_LIMIT);
        assert_eq!(r.status, OracleStatus::SizeExceeded);
        assert_eq!(
            solve_exact(&inst, &build_ns(&inst), 13).status,
            OracleStatus::Optimal
        );
    }
}
