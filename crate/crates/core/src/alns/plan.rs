//! Working representation of a solution during the search.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::scoring::ScoreModel;
use crate::solution::{walk_duration, walk_travel, Solution, Tour, TIME_EPS};

/// Instance data the operators need, laid out by customer position.
pub(crate) struct Context<'a> {
    pub inst: &'a Instance,
    pub weights: Vec<f64>,
    pub mandatory: Vec<bool>,
    pub service: Vec<f64>,
    pub limit: f64,
    /// Other customers by increasing travel time from each customer.
    pub neighbors: Vec<Vec<usize>>,
    pub has_coords: bool,
}

impl<'a> Context<'a> {
    pub fn new(inst: &'a Instance, model: &ScoreModel) -> Self {
        let n = inst.len();
        let mandatory = (0..n)
            .map(|p| model.is_mandatory_position(inst, p))
            .collect();
        let service = inst.customers().iter().map(|c| c.service_time).collect();
        let neighbors = (0..n)
            .map(|i| {
                let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                others.sort_by(|&a, &b| {
                    inst.travel(Some(i), Some(a))
                        .total_cmp(&inst.travel(Some(i), Some(b)))
                        .then(a.cmp(&b))
                });
                others
            })
            .collect();
        Context {
            inst,
            weights: model.weights().to_vec(),
            mandatory,
            service,
            limit: inst.max_daily_minutes() + TIME_EPS,
            neighbors,
            has_coords: inst.has_coordinates(),
        }
    }

    pub fn n(&self) -> usize {
        self.inst.len()
    }

    pub fn days(&self) -> usize {
        self.inst.horizon_days()
    }

    /// Travel between nodes (0 is home, customer `p` is node `p + 1`).
    pub fn t(&self, a: usize, b: usize) -> f64 {
        self.inst.matrix().time(a, b)
    }

    /// Cheapest feasible slot for customer `c` in route `day`.
    pub fn best_slot(&self, plan: &Plan, c: usize, day: usize) -> Option<(f64, usize)> {
        let route = &plan.routes[day];
        let cn = c + 1;
        let budget = self.limit - plan.durations[day] - self.service[c];
        let mut best: Option<(f64, usize)> = None;
        let mut prev = 0;
        for k in 0..=route.len() {
            let next = if k < route.len() { route[k] + 1 } else { 0 };
            let detour = self.t(prev, cn) + self.t(cn, next) - self.t(prev, next);
            if detour <= budget && best.is_none_or(|(b, _)| detour < b) {
                best = Some((detour, k));
            }
            prev = next;
        }
        best
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Plan {
    pub routes: Vec<Vec<usize>>,
    pub durations: Vec<f64>,
    pub travels: Vec<f64>,
    pub day_of: Vec<Option<usize>>,
    pub objective: f64,
    pub travel: f64,
    pub feasible: bool,
}

impl Plan {
    pub fn empty(ctx: &Context) -> Self {
        let d = ctx.days();
        Plan {
            routes: vec![Vec::new(); d],
            durations: vec![0.0; d],
            travels: vec![0.0; d],
            day_of: vec![None; ctx.n()],
            objective: 0.0,
            travel: 0.0,
            feasible: !ctx.mandatory.iter().any(|&m| m),
        }
    }

    pub fn from_solution(ctx: &Context, sol: &Solution) -> Result<Self> {
        let mut plan = Plan::empty(ctx);
        for tour in &sol.tours {
            if tour.day >= ctx.days() {
                return Err(Error::InvalidArgument(format!(
                    "day {} outside horizon",
                    tour.day
                )));
            }
            for &id in &tour.visits {
                let p = ctx.inst.position(id).ok_or(Error::InvalidReference(id))?;
                if plan.day_of[p].is_some() {
                    return Err(Error::InvalidArgument(format!(
                        "customer {id} visited twice"
                    )));
                }
                plan.day_of[p] = Some(tour.day);
                plan.routes[tour.day].push(p);
            }
        }
        for d in 0..ctx.days() {
            plan.refresh(ctx, d);
        }
        plan.finish(ctx);
        Ok(plan)
    }

    pub fn to_solution(&self, inst: &Instance) -> Solution {
        Solution {
            instance: inst.name().to_string(),
            tours: self
                .routes
                .iter()
                .enumerate()
                .map(|(d, r)| Tour::new(d, r.iter().map(|&p| inst.customers()[p].id).collect()))
                .collect(),
        }
    }

    pub fn visited(&self) -> impl Iterator<Item = usize> + '_ {
        self.routes.iter().flatten().copied()
    }

    #[cfg(test)]
    pub fn visit_count(&self) -> usize {
        self.routes.iter().map(Vec::len).sum()
    }

    pub fn refresh(&mut self, ctx: &Context, day: usize) {
        self.durations[day] = walk_duration(&self.routes[day], ctx.inst);
        self.travels[day] = walk_travel(&self.routes[day], ctx.inst);
    }

    pub fn insert(&mut self, ctx: &Context, c: usize, day: usize, at: usize) {
        debug_assert!(self.day_of[c].is_none());
        self.routes[day].insert(at, c);
        self.day_of[c] = Some(day);
        self.refresh(ctx, day);
    }

    /// Drops every customer flagged in `gone` from the routes.
    pub fn remove_all(&mut self, ctx: &Context, gone: &[bool]) {
        for d in 0..self.routes.len() {
            let before = self.routes[d].len();
            self.routes[d].retain(|&p| !gone[p]);
            if self.routes[d].len() != before {
                self.refresh(ctx, d);
            }
        }
        for (p, &g) in gone.iter().enumerate() {
            if g {
                self.day_of[p] = None;
            }
        }
    }

    /// Recomputes objective, travel and the mandatory check from scratch.
    pub fn finish(&mut self, ctx: &Context) {
        self.travel = self.travels.iter().sum();
        self.objective = self.visited().map(|p| ctx.weights[p]).sum();
        self.feasible = ctx
            .mandatory
            .iter()
            .zip(&self.day_of)
            .all(|(&m, d)| !m || d.is_some());
    }

    pub fn mandatory_visited(&self, ctx: &Context) -> usize {
        self.visited().filter(|&p| ctx.mandatory[p]).count()
    }
}

/// Objective tolerance used when comparing plans.
pub(crate) fn same_objective(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Lexicographic order: higher objective, then lower travel.
pub(crate) fn better(obj: f64, travel: f64, than_obj: f64, than_travel: f64) -> bool {
    if same_objective(obj, than_obj) {
        travel < than_travel - TIME_EPS
    } else {
        obj > than_obj
    }
}
