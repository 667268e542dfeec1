//! Seeded multi-start construction.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;

use super::insertion::insert;
use super::plan::{better, Context, Plan};
use super::Insertion;
use crate::rng::Rng;

fn sym(ctx: &Context, a: usize, b: usize) -> f64 {
    0.5 * (ctx.t(a, b) + ctx.t(b, a))
}

/// One seed customer per day at most, drawn k-means++ style: the chance of
/// a candidate grows with the square of its distance to home and to the seeds
/// already drawn. Mandatory customers are drawn first; only customers that
/// fit into a day on their own qualify.
pub(crate) fn seeds(ctx: &Context, rng: &mut Rng) -> Vec<usize> {
    let fits = |p: usize| ctx.t(0, p + 1) + ctx.service[p] + ctx.t(p + 1, 0) <= ctx.limit;
    let mut chosen: Vec<usize> = Vec::new();
    for _ in 0..ctx.days() {
        let open = |p: &usize| !chosen.contains(p) && fits(*p);
        let mut cands: Vec<usize> = (0..ctx.n())
            .filter(|p| ctx.mandatory[*p])
            .filter(open)
            .collect();
        if cands.is_empty() {
            cands = (0..ctx.n())
                .filter(|&p| !ctx.mandatory[p] && ctx.weights[p] > 0.0)
                .filter(open)
                .collect();
        }
        if cands.is_empty() {
            break;
        }
        let d2: Vec<f64> = cands
            .iter()
            .map(|&p| {
                let near = chosen
                    .iter()
                    .map(|&s| sym(ctx, s + 1, p + 1))
                    .fold(sym(ctx, 0, p + 1), f64::min);
                near * near
            })
            .collect();
        let pick = match WeightedIndex::new(&d2) {
            Ok(dist) => dist.sample(rng),
            Err(_) => rng.random_range(0..cands.len()),
        };
        chosen.push(cands[pick]);
    }
    chosen
}

/// Builds `starts` solutions from fresh seeds, cycling through the insertion
/// strategies, and returns the best. Plans that keep every mandatory customer
/// beat those that do not.
pub(crate) fn multistart(ctx: &Context, starts: usize, randomize: f64, rng: &mut Rng) -> Plan {
    let mut best: Option<Plan> = None;
    for k in 0..starts.max(1) {
        let strategy = Insertion::ALL[k % Insertion::ALL.len()];
        let mut plan = Plan::empty(ctx);
        let seeded = seeds(ctx, rng);
        for (day, &s) in seeded.iter().enumerate() {
            plan.insert(ctx, s, day, 0);
        }
        let pool: Vec<usize> = (0..ctx.n()).filter(|p| !seeded.contains(p)).collect();
        insert(ctx, &mut plan, &pool, strategy, randomize, rng);
        if best.as_ref().is_none_or(|b| plan_beats(ctx, &plan, b)) {
            best = Some(plan);
        }
    }
    best.expect("at least one start")
}

pub(crate) fn plan_beats(ctx: &Context, a: &Plan, b: &Plan) -> bool {
    if a.feasible != b.feasible {
        return a.feasible;
    }
    if !a.feasible {
        let (ma, mb) = (a.mandatory_visited(ctx), b.mandatory_visited(ctx));
        if ma != mb {
            return ma > mb;
        }
    }
    better(a.objective, a.travel, b.objective, b.travel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Customer, Instance};
    use crate::rng::seeded;
    use crate::scoring::{build_mns, build_ws};

    fn line(n: u32, days: usize) -> Instance {
        let customers = (1..=n)
            .map(|i| Customer::new(i, 5.0, i as f64).at(i as f64 * 3.0, 0.0))
            .collect();
        Instance::from_coordinates(
            "line",
            days,
            200.0,
            customers,
            Some(crate::instance::Point { x: 0.0, y: 0.0 }),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn single_mandatory_customer_is_the_seed() {
        let inst = line(6, 1);
        let model = build_mns(&inst, &[inst.customers()[3].id].into()).unwrap();
        let ctx = Context::new(&inst, &model);
        for s in 0..10 {
            assert_eq!(seeds(&ctx, &mut seeded(s)), vec![3]);
        }
    }

    #[test]
    fn seeds_come_from_mandatory_set() {
        let inst = line(12, 3);
        let ids = [1, 4, 7, 9].map(|p| inst.customers()[p].id).into();
        let model = build_mns(&inst, &ids).unwrap();
        let ctx = Context::new(&inst, &model);
        for s in 0..20 {
            let got = seeds(&ctx, &mut seeded(s));
            assert_eq!(got.len(), 3);
            assert!(got.iter().all(|&p| ctx.mandatory[p]));
        }
    }

    #[test]
    fn multistart_is_deterministic() {
        let inst = line(12, 2);
        let model = build_ws(&inst).unwrap();
        let ctx = Context::new(&inst, &model);
        let a = multistart(&ctx, 10, 0.05, &mut seeded(4));
        let b = multistart(&ctx, 10, 0.05, &mut seeded(4));
        assert_eq!(a.routes, b.routes);
        assert!(a.feasible);
    }
}
