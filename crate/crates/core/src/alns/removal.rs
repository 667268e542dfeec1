//! Destroy operators.

use rand::seq::index::sample;
use rand::Rng as _;

use super::plan::{Context, Plan};
use super::Removal;
use crate::rng::Rng;

/// Length of SEQU-NN sequences.
const SEQUENCE_LEN: (usize, usize) = (2, 6);
/// SKEL-TOUR removes this many consecutive customers, then keeps one.
const SEGMENT_LEN: usize = 3;
/// Rank bias of the worst-removal operators; larger is greedier.
const WORST_BIAS: i32 = 3;
/// Unvisited neighbors marked per removed customer.
pub(crate) const NEIGHBORS: usize = 5;

/// Inclusive range of the number of customers removed per iteration for an
/// instance with `n` customers.
pub fn removal_range(n: usize) -> (usize, usize) {
    let lo = n.div_ceil(10).max(10);
    let hi = (3 * n / 10).min(100);
    (lo.min(hi), lo.max(hi))
}

/// Removes `q` visited customers (fewer if not enough are visited) and returns
/// the reinsertion pool: the removed customers plus unvisited candidates.
pub(crate) fn remove(
    ctx: &Context,
    plan: &mut Plan,
    strategy: Removal,
    q: usize,
    rng: &mut Rng,
) -> Vec<usize> {
    let visited: Vec<usize> = plan.visited().collect();
    let q = q.min(visited.len());
    if q == 0 {
        return Vec::new();
    }
    let mut m = Marks {
        gone: vec![false; ctx.n()],
        count: 0,
        q,
    };

    let mut extra = Vec::new();
    match strategy {
        Removal::RndNn => {
            for i in sample(rng, visited.len(), q) {
                m.take(visited[i]);
            }
        }
        Removal::SequNn => {
            while m.count < q {
                let start = visited[rng.random_range(0..visited.len())];
                let day = plan.day_of[start].expect("visited");
                let route = &plan.routes[day];
                let at = route.iter().position(|&p| p == start).expect("in route");
                let len = rng.random_range(SEQUENCE_LEN.0..=SEQUENCE_LEN.1);
                for &p in route.iter().skip(at).take(len) {
                    m.take(p);
                }
            }
        }
        Removal::ScoreDelta => {
            let mut optional: Vec<(f64, u64, usize)> = visited
                .iter()
                .filter(|&&p| !ctx.mandatory[p])
                .map(|&p| (ctx.weights[p], rng.random(), p))
                .collect();
            optional.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(_, _, p) in optional.iter().take(q) {
                m.take(p);
            }
            let mut unvisited: Vec<(f64, u64, usize)> = (0..ctx.n())
                .filter(|&p| plan.day_of[p].is_none())
                .map(|p| (ctx.weights[p], rng.random(), p))
                .collect();
            unvisited.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            extra.extend(unvisited.iter().take(q).map(|&(_, _, p)| p));
        }
        Removal::SkelTour => {
            let mut days: Vec<usize> = (0..plan.routes.len())
                .filter(|&d| !plan.routes[d].is_empty())
                .collect();
            shuffle(&mut days, rng);
            'outer: for d in days {
                let route = &plan.routes[d];
                let offset = rng.random_range(0..route.len());
                for j in 0..route.len() {
                    if m.count >= q {
                        break 'outer;
                    }
                    if j % (SEGMENT_LEN + 1) < SEGMENT_LEN {
                        m.take(route[(offset + j) % route.len()]);
                    }
                }
            }
        }
        Removal::WorstDetour => {
            let mut ranked: Vec<(f64, usize)> = Vec::with_capacity(visited.len());
            for route in &plan.routes {
                for (k, &p) in route.iter().enumerate() {
                    let prev = if k == 0 { 0 } else { route[k - 1] + 1 };
                    let next = route.get(k + 1).map_or(0, |&x| x + 1);
                    let detour = ctx.t(prev, p + 1) + ctx.t(p + 1, next) - ctx.t(prev, next);
                    ranked.push((detour, p));
                }
            }
            ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let mut order: Vec<usize> = ranked.into_iter().map(|(_, p)| p).collect();
            while m.count < q {
                let p = biased_pick(&mut order, rng);
                m.take(p);
            }
        }
        Removal::WorstAngle => {
            let mut ranked: Vec<(f64, usize, usize, usize)> = Vec::new();
            for (d, route) in plan.routes.iter().enumerate() {
                for (k, &p) in route.iter().enumerate() {
                    let prev = if k == 0 { 0 } else { route[k - 1] + 1 };
                    let next = route.get(k + 1).map_or(0, |&x| x + 1);
                    ranked.push((angle(ctx, prev, p + 1, next), p, d, k));
                }
            }
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut order: Vec<(usize, usize, usize)> =
                ranked.into_iter().map(|(_, p, d, k)| (p, d, k)).collect();
            while m.count < q && !order.is_empty() {
                let (p, d, k) = biased_pick(&mut order, rng);
                let route = &plan.routes[d];
                m.take(p);
                if k > 0 {
                    m.take(route[k - 1]);
                }
                if let Some(&after) = route.get(k + 1) {
                    m.take(after);
                }
            }
        }
    }

    let gone = m.gone;
    let removed: Vec<usize> = (0..ctx.n()).filter(|&p| gone[p]).collect();
    if strategy != Removal::ScoreDelta {
        for &p in &removed {
            extra.extend(
                ctx.neighbors[p]
                    .iter()
                    .copied()
                    .filter(|&j| plan.day_of[j].is_none() && !gone[j])
                    .take(NEIGHBORS),
            );
        }
    }
    plan.remove_all(ctx, &gone);
    let mut pool = removed;
    pool.extend(extra);
    pool.sort_unstable();
    pool.dedup();
    pool
}

struct Marks {
    gone: Vec<bool>,
    count: usize,
    q: usize,
}

impl Marks {
    fn take(&mut self, p: usize) {
        if !self.gone[p] && self.count < self.q {
            self.gone[p] = true;
            self.count += 1;
        }
    }
}

/// Picks from a list sorted best-first, biased towards the front, and
/// removes the picked element.
fn biased_pick<T>(order: &mut Vec<T>, rng: &mut Rng) -> T {
    let y: f64 = rng.random();
    let i = ((y.powi(WORST_BIAS) * order.len() as f64) as usize).min(order.len() - 1);
    order.remove(i)
}

/// Interior angle at node `at` between its tour predecessor and successor, in
/// radians. Degenerate geometry counts as a straight line.
fn angle(ctx: &Context, prev: usize, at: usize, next: usize) -> f64 {
    let (Some(a), Some(b), Some(c)) = (
        ctx.inst.node_point(prev),
        ctx.inst.node_point(at),
        ctx.inst.node_point(next),
    ) else {
        return std::f64::consts::PI;
    };
    let (ux, uy) = (a.x - b.x, a.y - b.y);
    let (vx, vy) = (c.x - b.x, c.y - b.y);
    let norm = (ux * ux + uy * uy).sqrt() * (vx * vx + vy * vy).sqrt();
    if norm <= 0.0 {
        return std::f64::consts::PI;
    }
    ((ux * vx + uy * vy) / norm).clamp(-1.0, 1.0).acos()
}

pub(crate) fn shuffle<T>(items: &mut [T], rng: &mut Rng) {
    use rand::seq::SliceRandom;
    items.shuffle(rng);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Customer, Instance};
    use crate::rng::seeded;
    use crate::scoring::build_ws;

    #[test]
    fn range_examples() {
        assert_eq!(removal_range(50), (10, 15));
        assert_eq!(removal_range(1000), (100, 100));
        assert_eq!(removal_range(10), (3, 10));
        assert_eq!(removal_range(283), (29, 84));
    }

    fn grid(n: u32) -> Instance {
        let customers = (1..=n)
            .map(|i| Customer::new(i, 1.0, i as f64 * 10.0).at(i as f64, (i % 3) as f64))
            .collect();
        Instance::from_coordinates("g", 2, 1000.0, customers, None, 1.0).unwrap()
    }

    fn full_plan<'a>(
        inst: &'a Instance,
        model: &crate::scoring::ScoreModel,
    ) -> (Context<'a>, Plan) {
        let ctx = Context::new(inst, model);
        let mut plan = Plan::empty(&ctx);
        for p in 0..inst.len() {
            let day = p % 2;
            let at = plan.routes[day].len();
            plan.insert(&ctx, p, day, at);
        }
        plan.finish(&ctx);
        (ctx, plan)
    }

    #[test]
    fn score_delta_takes_lowest_scores() {
        let inst = grid(12);
        let model = build_ws(&inst).unwrap();
        let (ctx, mut plan) = full_plan(&inst, &model);
        let pool = remove(&ctx, &mut plan, Removal::ScoreDelta, 4, &mut seeded(1));
        assert_eq!(pool, vec![0, 1, 2, 3]);
        assert_eq!(plan.visit_count(), 8);
        assert!((0..4).all(|p| plan.day_of[p].is_none()));
    }

    #[test]
    fn every_strategy_removes_exactly_q() {
        let inst = grid(20);
        let model = build_ws(&inst).unwrap();
        for s in Removal::ALL {
            for seed in 0..20 {
                let (ctx, mut plan) = full_plan(&inst, &model);
                let pool = remove(&ctx, &mut plan, *s, 7, &mut seeded(seed));
                assert_eq!(plan.visit_count(), 13, "{s}");
                assert!(pool.len() >= 7);
                let total: f64 = plan.durations.iter().sum();
                let fresh: f64 = (0..2)
                    .map(|d| crate::solution::walk_duration(&plan.routes[d], &inst))
                    .sum();
                assert!((total - fresh).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn empty_plan_is_a_no_op() {
        let inst = grid(5);
        let model = build_ws(&inst).unwrap();
        let ctx = Context::new(&inst, &model);
        let mut plan = Plan::empty(&ctx);
        assert!(remove(&ctx, &mut plan, Removal::RndNn, 3, &mut seeded(0)).is_empty());
    }
}
