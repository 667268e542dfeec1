//! Instance preparation: ABC classes, mandatory selection, score variants,
//! small exact-solvable samples and synthetic benchmark instances.

mod abc;
mod generate;

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng as _;
use rand_distr::{Distribution, Uniform};

pub use abc::{abc_classify, kmeans_1d, AbcClassification, KMeans1d, KMeansConfig};
pub use generate::{generate_preset, synthesize, GenConfig, Preset, ScoreMode};

use crate::error::{Error, Result};
use crate::instance::{AbcClass, Customer, CustomerId, Instance};
use crate::rng::{derive_seed, seeded};

/// Copy of `instance` whose ABC classes come from clustering its scores.
pub fn classify_instance(instance: &Instance, seed: u64) -> (Instance, AbcClassification) {
    let result = abc_classify(&instance.scores(), &KMeansConfig::default(), seed);
    let out = instance.map_customers(|i, c| c.abc_class = result.labels[i]);
    (out, result)
}

/// The `m` highest-scoring customers, ties broken by ascending id. `m` is
/// capped at the number of customers.
pub fn select_mandatory(instance: &Instance, m: usize) -> BTreeSet<CustomerId> {
    let mut ranked: Vec<&Customer> = instance.customers().iter().collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.id.cmp(&b.id)));
    ranked.into_iter().take(m).map(|c| c.id).collect()
}

/// New i.i.d. uniform scores on `[lo, hi]`; classes and the mandatory set
/// (same size as before) are recomputed from them.
pub fn rescore_uniform(instance: &Instance, lo: f64, hi: f64, seed: u64) -> Result<Instance> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "score bounds must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    let mut rng = seeded(derive_seed(seed, "rescore", 0));
    let dist = Uniform::new_inclusive(lo, hi).expect("bounds checked");
    let rescored = instance.map_customers(|_, c| c.score = dist.sample(&mut rng));
    let m = instance.mandatory_ids().len();
    let (classified, _) = classify_instance(&rescored, derive_seed(seed, "rescore-abc", 0));
    Ok(classified.with_mandatory(&select_mandatory(&classified, m)))
}

/// Largest-remainder apportionment of `n` slots over class sizes.
pub fn stratified_quota(class_sizes: &[usize], n: usize) -> Vec<usize> {
    let total: usize = class_sizes.iter().sum();
    if total == 0 {
        return vec![0; class_sizes.len()];
    }
    let exact: Vec<f64> = class_sizes
        .iter()
        .map(|&s| n as f64 * s as f64 / total as f64)
        .collect();
    let mut quota: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
    let mut left = n - quota.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..class_sizes.len()).collect();
    // stable sort keeps class order on equal remainders
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra)
    });
    for &k in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if quota[k] < class_sizes[k] {
            quota[k] += 1;
            left -= 1;
        }
    }
    quota
}

const STRATA: [AbcClass; 4] = [
    AbcClass::A,
    AbcClass::B,
    AbcClass::C,
    AbcClass::Unclassified,
];

/// Stratified sample of `n` customers keeping the A/B/C proportions; the `m`
/// best-scoring sampled customers become mandatory and the horizon is set to
/// `d` days. Service times and pairwise travel times are kept unchanged.
pub fn subsample_small(
    instance: &Instance,
    n: usize,
    m: usize,
    d: usize,
    seed: u64,
) -> Result<Instance> {
    if n > instance.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot sample {n} customers from an instance with {}",
            instance.len()
        )));
    }
    if m > n {
        return Err(Error::InvalidArgument(format!(
            "mandatory count {m} exceeds sample size {n}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidArgument(
            "horizon must be at least one day".into(),
        ));
    }
    let mut rng = seeded(derive_seed(seed, "subsample", 0));
    let members: Vec<Vec<usize>> = STRATA
        .iter()
        .map(|&k| {
            (0..instance.len())
                .filter(|&i| instance.customers()[i].abc_class == k)
                .collect()
        })
        .collect();
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let quota = stratified_quota(&sizes, n);

    let mut picked: Vec<usize> = Vec::with_capacity(n);
    for (group, &q) in members.iter().zip(&quota) {
        picked.extend(
            sample(&mut rng, group.len(), q)
                .into_iter()
                .map(|j| group[j]),
        );
    }
    picked.sort_unstable();

    let mut nodes = vec![0];
    nodes.extend(picked.iter().map(|&p| p + 1));
    let matrix = instance.matrix().restrict(&nodes);
    let customers: Vec<Customer> = picked
        .iter()
        .map(|&p| instance.customers()[p].clone())
        .collect();
    let name = format!(
        "{}-n{}m{}d{}-{:x}",
        instance.name(),
        n,
        m,
        d,
        rng.random::<u16>()
    );
    let small = Instance::new(
        name,
        d,
        instance.max_daily_minutes(),
        customers,
        matrix,
        instance.home(),
    )?;
    Ok(small.with_mandatory(&select_mandatory(&small, m)))
}
