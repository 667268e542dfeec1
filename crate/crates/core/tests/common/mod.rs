//! Independent reference implementations used by the integration tests.
//! Nothing here calls the solver internals: durations are recomputed from
//! the raw matrix and optima are found by enumeration.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use mpop::kit::classify_instance;
use mpop::solution::Violation;
use mpop::{Customer, CustomerId, Instance, Solution, TravelMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EPS: f64 = 1e-6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Travel + service of visiting `order` (customer positions) from home.
pub fn route_duration(inst: &Instance, order: &[usize]) -> f64 {
    let m = inst.matrix();
    let mut prev = 0;
    let mut travel = 0.0;
    for &p in order {
        travel += m.time(prev, p + 1);
        prev = p + 1;
    }
    travel += m.time(prev, 0);
    let service: f64 = order
        .iter()
        .map(|&p| inst.customers()[p].service_time)
        .sum();
    travel + service
}

/// Cheapest duration of each customer subset (bit `p` = position `p`) by
/// trying every visiting order. Only for small `n`.
pub fn subset_durations_factorial(inst: &Instance) -> Vec<f64> {
    let n = inst.len();
    assert!(n <= 9, "factorial enumeration is for tiny instances");
    let mut best = vec![f64::INFINITY; 1 << n];
    best[0] = 0.0;
    for mask in 1usize..(1 << n) {
        let mut items: Vec<usize> = (0..n).filter(|&p| mask >> p & 1 == 1).collect();
        let k = items.len();
        // Heap's algorithm
        let mut c = vec![0usize; k];
        let mut b = route_duration(inst, &items);
        let mut i = 0;
        while i < k {
            if c[i] < i {
                if i % 2 == 0 {
                    items.swap(0, i);
                } else {
                    items.swap(c[i], i);
                }
                b = b.min(route_duration(inst, &items));
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        best[mask] = b;
    }
    best
}

/// Cheapest duration of each subset by dynamic programming over
/// (visited set, last customer); used where `n!` is out of reach.
pub fn subset_durations_dp(inst: &Instance) -> Vec<f64> {
    let n = inst.len();
    let m = inst.matrix();
    let full = 1usize << n;
    let mut path = vec![f64::INFINITY; full * n.max(1)];
    for j in 0..n {
        path[(1 << j) * n + j] = m.time(0, j + 1);
    }
    for mask in 1..full {
        for j in 0..n {
            let cur = path[mask * n + j];
            if mask >> j & 1 == 0 || !cur.is_finite() {
                continue;
            }
            for k in 0..n {
                if mask >> k & 1 == 1 {
                    continue;
                }
                let next = mask | 1 << k;
                let v = cur + m.time(j + 1, k + 1);
                if v < path[next * n + k] {
                    path[next * n + k] = v;
                }
            }
        }
    }
    let mut best = vec![f64::INFINITY; full];
    best[0] = 0.0;
    for mask in 1..full {
        let service: f64 = (0..n)
            .filter(|&p| mask >> p & 1 == 1)
            .map(|p| inst.customers()[p].service_time)
            .sum();
        let travel = (0..n)
            .filter(|&j| mask >> j & 1 == 1)
            .map(|j| path[mask * n + j] + m.time(j + 1, 0))
            .fold(f64::INFINITY, f64::min);
        best[mask] = travel + service;
    }
    best
}

/// Subsets that can be split into at most `days` tours within the limit.
pub fn servable_sets(inst: &Instance, durations: &[f64]) -> Vec<bool> {
    let full = durations.len();
    let limit = inst.max_daily_minutes() + EPS;
    let one: Vec<bool> = durations.iter().map(|&d| d <= limit).collect();
    let mut ok = vec![false; full];
    ok[0] = true;
    for _ in 0..inst.horizon_days() {
        let prev = ok.clone();
        for mask in 1..full {
            if ok[mask] {
                continue;
            }
            // the tour holding the lowest customer of `mask`
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            let mut sub = rest;
            loop {
                let tour = sub | low;
                if one[tour] && prev[mask ^ tour] {
                    ok[mask] = true;
                    break;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
    }
    ok
}

/// Best objective over every assignment of customers to days (or to no
/// day), using per-day durations from `durations`. `None` if no assignment
/// visits every mandatory customer.
pub fn brute_force_assignments(
    inst: &Instance,
    durations: &[f64],
    weights: &[f64],
    mandatory: &BTreeSet<CustomerId>,
) -> Option<f64> {
    let n = inst.len();
    let d = inst.horizon_days();
    let limit = inst.max_daily_minutes() + EPS;
    let must: usize = inst
        .customers()
        .iter()
        .enumerate()
        .filter(|(_, c)| mandatory.contains(&c.id))
        .map(|(p, _)| 1 << p)
        .sum();
    let total = (d + 1).pow(n as u32);
    let mut best: Option<f64> = None;
    let mut day_masks = vec![0usize; d];
    for code in 0..total {
        day_masks.iter_mut().for_each(|m| *m = 0);
        let mut x = code;
        let mut visited = 0usize;
        for p in 0..n {
            let a = x % (d + 1);
            x /= d + 1;
            if a > 0 {
                day_masks[a - 1] |= 1 << p;
                visited |= 1 << p;
            }
        }
        if visited & must != must || day_masks.iter().any(|&m| durations[m] > limit) {
            continue;
        }
        let obj: f64 = (0..n)
            .filter(|&p| visited >> p & 1 == 1)
            .map(|p| weights[p])
            .sum();
        if best.is_none_or(|b| obj > b) {
            best = Some(obj);
        }
    }
    best
}

/// Random instance with `n` customers, Euclidean or arbitrary asymmetric
/// travel times, ABC classes from its scores and `m` flagged customers.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, days: usize, m: usize) -> Instance {
    let limit = rng.random_range(60.0..300.0);
    let customers: Vec<Customer> = (0..n)
        .map(|i| {
            Customer::new(
                i as u32 + 1,
                rng.random_range(0.0..30.0),
                rng.random_range(1.0..1000.0),
            )
            .at(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0))
        })
        .collect();
    let inst = if rng.random_bool(0.5) {
        Instance::from_coordinates("rand", days, limit, customers, None, 1.0).unwrap()
    } else {
        let nodes = n + 1;
        let times = (0..nodes * nodes)
            .map(|k| {
                if k / nodes == k % nodes {
                    0.0
                } else {
                    rng.random_range(1.0..80.0)
                }
            })
            .collect();
        Instance::new(
            "rand",
            days,
            limit,
            customers,
            TravelMatrix::new(nodes, times).unwrap(),
            None,
        )
        .unwrap()
    };
    let (inst, _) = classify_instance(&inst, rng.random());
    let mut ids: Vec<CustomerId> = inst.customers().iter().map(|c| c.id).collect();
    let mut flagged = BTreeSet::new();
    for _ in 0..m.min(n) {
        let k = rng.random_range(0..ids.len());
        flagged.insert(ids.swap_remove(k));
    }
    inst.with_mandatory(&flagged)
}

/// Violations of `sol` in the documented order: per tour (day range, then
/// repeated day, then unknown ids in visit order), repeated visits by id,
/// missing mandatory customers by id, overlong days by day.
pub fn expected_violations(sol: &Solution, inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut counts: BTreeMap<CustomerId, usize> = BTreeMap::new();
    let mut days_seen = Vec::new();
    let mut over = Vec::new();
    for t in &sol.tours {
        let in_range = t.day < inst.horizon_days();
        if !in_range {
            out.push(Violation::DayOutOfRange { day: t.day });
        } else if days_seen.contains(&t.day) {
            out.push(Violation::DuplicateDay { day: t.day });
        } else {
            days_seen.push(t.day);
        }
        let mut order = Vec::new();
        for &id in &t.visits {
            *counts.entry(id).or_insert(0) += 1;
            match inst.customers().iter().position(|c| c.id == id) {
                Some(p) => order.push(p),
                None => out.push(Violation::UnknownCustomer { day: t.day, id }),
            }
        }
        if in_range {
            let d = route_duration(inst, &order);
            if d > inst.max_daily_minutes() + EPS {
                over.push((t.day, d));
            }
        }
    }
    for (&id, &count) in &counts {
        if count > 1 {
            out.push(Violation::DuplicateVisit { id, count });
        }
    }
    for c in inst.customers() {
        if c.mandatory && !counts.contains_key(&c.id) {
            out.push(Violation::MissingMandatory { id: c.id });
        }
    }
    over.sort_by_key(|o| o.0);
    for (day, duration) in over {
        out.push(Violation::DayOverLimit {
            day,
            duration,
            limit: inst.max_daily_minutes(),
        });
    }
    out
}

/// Equal up to floating-point noise in reported durations.
pub fn same_violations(a: &[Violation], b: &[Violation]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| match (x, y) {
            (
                Violation::DayOverLimit {
                    day: d1,
                    duration: t1,
                    limit: l1,
                },
                Violation::DayOverLimit {
                    day: d2,
                    duration: t2,
                    limit: l2,
                },
            ) => d1 == d2 && l1 == l2 && (t1 - t2).abs() <= 1e-9 * t1.abs().max(1.0),
            _ => x == y,
        })
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}
