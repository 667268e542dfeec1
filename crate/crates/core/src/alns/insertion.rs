//! Repair operators.

use rand::Rng as _;

use super::plan::{Context, Plan};
use super::removal::shuffle;
use super::Insertion;
use crate::rng::Rng;

/// Result of one repair pass.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Repair {
    /// False if a mandatory customer could not be placed.
    pub feasible: bool,
    /// Customers placed, in insertion order.
    pub inserted: Vec<usize>,
}

type Slot = Option<(f64, usize)>;

/// Inserts pool customers into `plan`, mandatory ones first. With
/// probability `randomize` an optional customer is chosen uniformly instead
/// of by the strategy's rule (never for [`Insertion::Rnd`], which is random
/// anyway).
pub(crate) fn insert(
    ctx: &Context,
    plan: &mut Plan,
    pool: &[usize],
    strategy: Insertion,
    randomize: f64,
    rng: &mut Rng,
) -> Repair {
    let mut repair = Repair {
        feasible: true,
        inserted: Vec::new(),
    };
    let (mandatory, optional): (Vec<usize>, Vec<usize>) = pool
        .iter()
        .copied()
        .filter(|&p| plan.day_of[p].is_none())
        .partition(|&p| ctx.mandatory[p]);
    // missing mandatory customers outside the pool still have to come back
    let mut mandatory = mandatory;
    mandatory.extend(
        (0..ctx.n())
            .filter(|&p| ctx.mandatory[p] && plan.day_of[p].is_none() && !pool.contains(&p)),
    );
    let optional: Vec<usize> = optional
        .into_iter()
        .filter(|&p| ctx.weights[p] > 0.0)
        .collect();

    if !phase(
        ctx,
        plan,
        mandatory,
        strategy,
        0.0,
        true,
        rng,
        &mut repair.inserted,
    ) {
        repair.feasible = false;
        plan.finish(ctx);
        return repair;
    }
    let randomize = if strategy == Insertion::Rnd {
        0.0
    } else {
        randomize
    };
    phase(
        ctx,
        plan,
        optional,
        strategy,
        randomize,
        false,
        rng,
        &mut repair.inserted,
    );
    plan.finish(ctx);
    repair.feasible = plan.feasible;
    repair
}

fn best_over_days(slots: &[Slot]) -> Option<(f64, usize, usize)> {
    let mut best: Option<(f64, usize, usize)> = None;
    for (d, s) in slots.iter().enumerate() {
        if let Some((detour, at)) = *s {
            if best.is_none_or(|(b, _, _)| detour < b) {
                best = Some((detour, d, at));
            }
        }
    }
    best
}

/// Strategy preference; larger is inserted earlier.
fn key(ctx: &Context, strategy: Insertion, c: usize, detour: f64) -> (f64, f64) {
    let w = ctx.weights[c];
    let cost = (detour + ctx.service[c]).max(1e-9);
    match strategy {
        Insertion::MaxScore => (w, -detour),
        Insertion::ScoreRatio => (w / cost, -detour),
        Insertion::ScoreRatio2 => (w * w / cost, -detour),
        Insertion::Greedy | Insertion::Rnd => (-detour, w),
    }
}

#[allow(clippy::too_many_arguments)]
fn phase(
    ctx: &Context,
    plan: &mut Plan,
    mut todo: Vec<usize>,
    strategy: Insertion,
    randomize: f64,
    required: bool,
    rng: &mut Rng,
    inserted: &mut Vec<usize>,
) -> bool {
    if todo.is_empty() {
        return true;
    }
    let days = ctx.days();
    if strategy == Insertion::Rnd {
        shuffle(&mut todo, rng);
        for c in todo {
            let slots: Vec<Slot> = (0..days).map(|d| ctx.best_slot(plan, c, d)).collect();
            match best_over_days(&slots) {
                Some((_, d, at)) => {
                    plan.insert(ctx, c, d, at);
                    inserted.push(c);
                }
                None if required => return false,
                None => {}
            }
        }
        return true;
    }

    let mut cache: Vec<Vec<Slot>> = todo
        .iter()
        .map(|&c| (0..days).map(|d| ctx.best_slot(plan, c, d)).collect())
        .collect();
    loop {
        // a customer that fits nowhere never fits later: routes only grow
        let mut options = Vec::with_capacity(todo.len());
        let mut keep = Vec::with_capacity(todo.len());
        for (i, slots) in cache.iter().enumerate() {
            match best_over_days(slots) {
                Some(b) => {
                    options.push((i, b));
                    keep.push(true);
                }
                None if required => return false,
                None => keep.push(false),
            }
        }
        if options.is_empty() {
            return true;
        }
        let pick = if randomize > 0.0 && rng.random::<f64>() < randomize {
            rng.random_range(0..options.len())
        } else {
            let mut best = 0;
            let mut best_key = key(ctx, strategy, todo[options[0].0], options[0].1 .0);
            for (k, &(i, (detour, _, _))) in options.iter().enumerate().skip(1) {
                let kk = key(ctx, strategy, todo[i], detour);
                if kk.0 > best_key.0 || (kk.0 == best_key.0 && kk.1 > best_key.1) {
                    best = k;
                    best_key = kk;
                }
            }
            best
        };
        let (i, (_, day, at)) = options[pick];
        let c = todo[i];
        plan.insert(ctx, c, day, at);
        inserted.push(c);
        keep[i] = false;

        let mut next_todo = Vec::with_capacity(todo.len());
        let mut next_cache = Vec::with_capacity(todo.len());
        for (j, (c, mut slots)) in todo.into_iter().zip(cache).enumerate() {
            if keep[j] {
                slots[day] = ctx.best_slot(plan, c, day);
                next_todo.push(c);
                next_cache.push(slots);
            }
        }
        todo = next_todo;
        cache = next_cache;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Customer, Instance, TravelMatrix};
    use crate::rng::seeded;
    use crate::scoring::{build_mns, build_ws};

    /// Home plus three customers at round-trip detours 5, 9 and 2 from an
    /// empty tour, far apart from each other.
    fn star() -> Instance {
        let legs = [2.5, 4.5, 1.0];
        let n = 4;
        let mut times = vec![100.0; n * n];
        for i in 0..n {
            times[i * n + i] = 0.0;
        }
        for (k, &l) in legs.iter().enumerate() {
            times[k + 1] = l;
            times[(k + 1) * n] = l;
        }
        let customers = (1..=3).map(|i| Customer::new(i, 0.0, 1.0)).collect();
        Instance::new(
            "star",
            3,
            1000.0,
            customers,
            TravelMatrix::new(n, times).unwrap(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn greedy_orders_by_detour() {
        let inst = star();
        let model = build_ws(&inst).unwrap();
        let ctx = Context::new(&inst, &model);
        let mut plan = Plan::empty(&ctx);
        let r = insert(
            &ctx,
            &mut plan,
            &[0, 1, 2],
            Insertion::Greedy,
            0.0,
            &mut seeded(0),
        );
        assert!(r.feasible);
        assert_eq!(r.inserted, vec![2, 0, 1]);
        // each customer opens its own day: joining another costs 100+
        assert!(plan.routes.iter().all(|r| r.len() == 1));
    }

    #[test]
    fn lone_customer_sits_next_to_home() {
        let inst = star();
        let model = build_ws(&inst).unwrap();
        let ctx = Context::new(&inst, &model);
        let mut plan = Plan::empty(&ctx);
        insert(
            &ctx,
            &mut plan,
            &[1],
            Insertion::MaxScore,
            0.0,
            &mut seeded(0),
        );
        assert_eq!(plan.routes[0], vec![1]);
        assert!((plan.durations[0] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_customer_stays_out() {
        let times = vec![0.0, 60.0, 60.0, 0.0];
        let inst = Instance::new(
            "far",
            2,
            100.0,
            vec![Customer::new(1, 1.0, 5.0)],
            TravelMatrix::new(2, times).unwrap(),
            None,
        )
        .unwrap();
        let model = build_ws(&inst).unwrap();
        let ctx = Context::new(&inst, &model);
        let mut plan = Plan::empty(&ctx);
        for s in Insertion::ALL {
            let r = insert(&ctx, &mut plan, &[0], *s, 0.0, &mut seeded(0));
            assert!(r.feasible && r.inserted.is_empty());
        }

        let forced = build_mns(&inst, &[inst.customers()[0].id].into()).unwrap();
        let ctx = Context::new(&inst, &forced);
        let mut plan = Plan::empty(&ctx);
        let r = insert(
            &ctx,
            &mut plan,
            &[0],
            Insertion::Greedy,
            0.0,
            &mut seeded(0),
        );
        assert!(!r.feasible);
    }
}
