//! ABC classes from scores via one-dimensional k-means.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::instance::AbcClass;
use crate::rng::{derive_seed, seeded};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            k: 3,
            restarts: 10,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcClassification {
    pub labels: Vec<AbcClass>,
    /// Cluster means ordered A, B, C. Empty for degenerate input.
    pub centroids: Vec<f64>,
    pub inertia: f64,
    /// Fewer than three distinct scores: labels come from rank, not clustering.
    pub degenerate: bool,
}

/// Result of one best-of-restarts k-means run.
#[derive(Debug, Clone)]
pub struct KMeans1d {
    pub centroids: Vec<f64>,
    pub assignment: Vec<usize>,
    pub inertia: f64,
}

fn nearest(centroids: &[f64], v: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, &c) in centroids.iter().enumerate() {
        let d = (v - c).abs();
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

fn plus_plus_init(values: &[f64], k: usize, rng: &mut crate::rng::Rng) -> Vec<f64> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(values[rng.random_range(0..values.len())]);
    while centroids.len() < k {
        let d2: Vec<f64> = values
            .iter()
            .map(|&v| {
                centroids
                    .iter()
                    .map(|&c| (v - c) * (v - c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            centroids.push(values[rng.random_range(0..values.len())]);
            continue;
        }
        let mut r = rng.random::<f64>() * total;
        let mut pick = values.len() - 1;
        for (i, &w) in d2.iter().enumerate() {
            if r < w {
                pick = i;
                break;
            }
            r -= w;
        }
        centroids.push(values[pick]);
    }
    centroids
}

fn lloyd(values: &[f64], mut centroids: Vec<f64>, max_iter: usize) -> KMeans1d {
    let k = centroids.len();
    let mut assignment: Vec<usize> = values.iter().map(|&v| nearest(&centroids, v)).collect();
    for _ in 0..max_iter {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&v, &a) in values.iter().zip(&assignment) {
            sums[a] += v;
            counts[a] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = sums[j] / counts[j] as f64;
            }
        }
        let next: Vec<usize> = values.iter().map(|&v| nearest(&centroids, v)).collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }
    let inertia = values
        .iter()
        .zip(&assignment)
        .map(|(&v, &a)| (v - centroids[a]).powi(2))
        .sum();
    KMeans1d {
        centroids,
        assignment,
        inertia,
    }
}

/// k-means++ seeded Lloyd iterations, best inertia over `restarts` runs.
pub fn kmeans_1d(values: &[f64], cfg: &KMeansConfig, seed: u64) -> KMeans1d {
    assert!(
        cfg.k >= 1 && values.len() >= cfg.k,
        "need at least k values"
    );
    let mut best: Option<KMeans1d> = None;
    for r in 0..cfg.restarts.max(1) {
        let mut rng = seeded(derive_seed(seed, "kmeans", r as u64));
        let init = plus_plus_init(values, cfg.k, &mut rng);
        let run = lloyd(values, init, cfg.max_iter);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    best.expect("at least one restart")
}

/// Three-class ABC labels: the cluster with the highest mean is A, the
/// lowest is C.
pub fn abc_classify(scores: &[f64], cfg: &KMeansConfig, seed: u64) -> AbcClassification {
    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_by(|a, b| b.total_cmp(a));
    distinct.dedup();

    if distinct.len() < 3 {
        // highest distinct value gets the class just above C, ties go down
        let labels = scores
            .iter()
            .map(|&s| {
                if distinct.len() == 2 && s == distinct[0] {
                    AbcClass::B
                } else {
                    AbcClass::C
                }
            })
            .collect();
        return AbcClassification {
            labels,
            centroids: Vec::new(),
            inertia: 0.0,
            degenerate: true,
        };
    }

    let cfg = KMeansConfig { k: 3, ..*cfg };
    let km = kmeans_1d(scores, &cfg, seed);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| km.centroids[b].total_cmp(&km.centroids[a]));
    let mut rank = [0usize; 3];
    for (r, &j) in order.iter().enumerate() {
        rank[j] = r;
    }
    let labels = km
        .assignment
        .iter()
        .map(|&j| match rank[j] {
            0 => AbcClass::A,
            1 => AbcClass::B,
            _ => AbcClass::C,
        })
        .collect();
    AbcClassification {
        labels,
        centroids: order.iter().map(|&j| km.centroids[j]).collect(),
        inertia: km.inertia,
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use AbcClass::*;

    #[test]
    fn one_per_class_when_k_equals_n() {
        let r = abc_classify(&[1.0, 2.0, 3.0], &KMeansConfig::default(), 1);
        assert_eq!(r.labels, vec![C, B, A]);
        assert!(!r.degenerate);
    }

    #[test]
    fn degenerate_inputs() {
        let r = abc_classify(&[5.0, 5.0], &KMeansConfig::default(), 1);
        assert_eq!(r.labels, vec![C, C]);
        assert!(r.degenerate);
        let r = abc_classify(&[5.0, 1.0, 5.0], &KMeansConfig::default(), 1);
        assert_eq!(r.labels, vec![B, C, B]);
        assert!(abc_classify(&[], &KMeansConfig::default(), 1)
            .labels
            .is_empty());
    }

    #[test]
    fn deterministic_under_seed() {
        let s: Vec<f64> = (0..50).map(|i| ((i * 37) % 101) as f64).collect();
        let cfg = KMeansConfig::default();
        assert_eq!(abc_classify(&s, &cfg, 9), abc_classify(&s, &cfg, 9));
    }
}
