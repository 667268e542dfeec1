//! Simulated score realizations and model robustness under prediction error.
//!
//! Plans are always made with the predicted scores. A scenario draws
//! realized scores `p + e` with Gaussian noise `e ~ N(0, coe * mean(p))` and
//! re-evaluates each model's fixed plan against them. Realizations may be
//! negative and are kept as drawn. ABC classes are never recomputed.

use std::collections::BTreeMap;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rng::{derive_seed, seeded};
use crate::scoring::ModelVariant;
use crate::solution::Solution;

/// Default coefficient-of-variation levels, 0.1 to 1.3 in steps of 0.1.
pub fn default_coe_levels() -> Vec<f64> {
    (1..=13).map(|k| k as f64 / 10.0).collect()
}

pub const DEFAULT_SCENARIOS_PER_LEVEL: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub coe: f64,
    pub index: usize,
    /// Noise standard deviation, `coe` times the mean predicted score.
    pub sigma: f64,
    pub seed: u64,
    /// Realized score per customer, aligned with [`Instance::customers`].
    pub p_sim: Vec<f64>,
}

/// One realization with noise level `coe`.
pub fn simulate_scores(instance: &Instance, coe: f64, seed: u64) -> Result<Scenario> {
    simulate_indexed(instance, coe, 0, seed)
}

fn simulate_indexed(instance: &Instance, coe: f64, index: usize, seed: u64) -> Result<Scenario> {
    if !(coe.is_finite() && coe > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "coe must be positive, got {coe}"
        )));
    }
    let mean = instance.mean_score().ok_or_else(|| {
        Error::InvalidArgument("cannot simulate scores of an empty instance".into())
    })?;
    let sigma = coe * mean;
    let noise = Normal::new(0.0, sigma.abs())
        .map_err(|e| Error::InvalidArgument(format!("noise distribution: {e}")))?;
    let mut rng = seeded(seed);
    let p_sim = instance
        .customers()
        .iter()
        .map(|c| c.score + noise.sample(&mut rng))
        .collect();
    Ok(Scenario {
        coe,
        index,
        sigma,
        seed,
        p_sim,
    })
}

/// `per_level` scenarios for each noise level, in level order.
pub fn scenario_grid(
    instance: &Instance,
    coe_levels: &[f64],
    per_level: usize,
    seed: u64,
) -> Result<Vec<Scenario>> {
    let mut grid = Vec::with_capacity(coe_levels.len() * per_level);
    for (l, &coe) in coe_levels.iter().enumerate() {
        for k in 0..per_level {
            let s = derive_seed(seed, "scenario", (l * per_level + k) as u64);
            grid.push(simulate_indexed(instance, coe, k, s)?);
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    /// Sum of realized scores over the customers the plan visits.
    pub realized_sim: f64,
    /// `realized_sim` relative to the WS plan; `None` if that is zero.
    pub rws_sim: Option<f64>,
}

/// Realized score of every model's plan under `scenario`, relative to WS.
pub fn evaluate_under_scenario(
    solutions: &BTreeMap<ModelVariant, Solution>,
    scenario: &Scenario,
    instance: &Instance,
) -> Result<BTreeMap<ModelVariant, ScenarioOutcome>> {
    let ws = solutions
        .get(&ModelVariant::Ws)
        .ok_or_else(|| Error::InvalidArgument("a WS plan is required as reference".into()))?;
    let realized = |sol: &Solution| -> Result<f64> {
        sol.visited()
            .into_iter()
            .map(|id| {
                instance
                    .position(id)
                    .map(|p| scenario.p_sim[p])
                    .ok_or(Error::InvalidReference(id))
            })
            .sum()
    };
    let base = realized(ws)?;
    solutions
        .iter()
        .map(|(&v, sol)| {
            let r = realized(sol)?;
            let rws_sim = if v == ModelVariant::Ws {
                (base != 0.0).then_some(1.0)
            } else {
                (base != 0.0).then(|| r / base)
            };
            Ok((
                v,
                ScenarioOutcome {
                    realized_sim: r,
                    rws_sim,
                },
            ))
        })
        .collect()
}

/// One long-format output row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub instance: String,
    pub model: ModelVariant,
    pub coe: f64,
    pub scenario: usize,
    pub realized_sim: f64,
    pub rws_sim: Option<f64>,
}

/// Evaluates every scenario of `grid` against `solutions`; rows are ordered
/// by scenario, then model.
pub fn sensitivity_rows(
    instance: &Instance,
    solutions: &BTreeMap<ModelVariant, Solution>,
    grid: &[Scenario],
) -> Result<Vec<SensitivityRow>> {
    let mut rows = Vec::with_capacity(grid.len() * solutions.len());
    for s in grid {
        for (model, out) in evaluate_under_scenario(solutions, s, instance)? {
            rows.push(SensitivityRow {
                instance: instance.name().to_string(),
                model,
                coe: s.coe,
                scenario: s.index,
                realized_sim: out.realized_sim,
                rws_sim: out.rws_sim,
            });
        }
    }
    Ok(rows)
}

pub fn write_sensitivity_csv(rows: &[SensitivityRow], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "instance",
        "model",
        "coe",
        "scenario",
        "realized_sim",
        "rws_sim",
    ])?;
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.model.to_string(),
            r.coe.to_string(),
            r.scenario.to_string(),
            r.realized_sim.to_string(),
            r.rws_sim.map(|x| x.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Customer, CustomerId, TravelMatrix};
    use crate::solution::Tour;

    fn scored(scores: &[f64]) -> Instance {
        let n = scores.len() + 1;
        let customers = scores
            .iter()
            .enumerate()
            .map(|(i, &s)| Customer::new(i as u32 + 1, 1.0, s))
            .collect();
        Instance::new(
            "s",
            2,
            100.0,
            customers,
            TravelMatrix::new(n, vec![0.0; n * n]).unwrap(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn sigma_follows_mean() {
        let inst = scored(&[50.0, 150.0]);
        let s = simulate_scores(&inst, 0.5, 1).unwrap();
        assert_eq!(s.sigma, 50.0);
        let tiny = simulate_scores(&inst, 1e-9, 2).unwrap();
        for (a, b) in tiny.p_sim.iter().zip(inst.scores()) {
            assert!((a - b).abs() < 1e-5 * 100.0);
        }
        assert!(simulate_scores(&inst, 0.0, 1).is_err());
        assert!(simulate_scores(&scored(&[]), 0.5, 1).is_err());
    }

    #[test]
    fn grid_shape() {
        let inst = scored(&[1.0, 2.0, 3.0]);
        let g =
            scenario_grid(&inst, &default_coe_levels(), DEFAULT_SCENARIOS_PER_LEVEL, 5).unwrap();
        assert_eq!(g.len(), 130);
        assert_eq!(
            g,
            scenario_grid(&inst, &default_coe_levels(), 10, 5).unwrap()
        );
        assert_eq!(scenario_grid(&inst, &[0.4], 1, 5).unwrap().len(), 1);
    }

    #[test]
    fn ws_is_the_reference() {
        let inst = scored(&[10.0, 20.0, 30.0]);
        let sol = |ids: &[u32]| Solution {
            instance: "s".into(),
            tours: vec![Tour::new(0, ids.iter().map(|&i| CustomerId(i)).collect())],
        };
        let mut map = BTreeMap::new();
        map.insert(ModelVariant::Ws, sol(&[2, 3]));
        map.insert(ModelVariant::Ns, sol(&[1, 2]));
        let sc = Scenario {
            coe: 0.1,
            index: 0,
            sigma: 2.0,
            seed: 0,
            p_sim: vec![10.0, 20.0, 30.0],
        };
        let out = evaluate_under_scenario(&map, &sc, &inst).unwrap();
        assert_eq!(out[&ModelVariant::Ws].rws_sim, Some(1.0));
        assert_eq!(out[&ModelVariant::Ns].realized_sim, 30.0);
        assert_eq!(out[&ModelVariant::Ns].rws_sim, Some(0.6));

        let zero = Scenario {
            p_sim: vec![0.0; 3],
            ..sc
        };
        let out = evaluate_under_scenario(&map, &zero, &inst).unwrap();
        assert_eq!(out[&ModelVariant::Ns].rws_sim, None);
        map.remove(&ModelVariant::Ws);
        assert!(evaluate_under_scenario(&map, &zero, &inst).is_err());
    }
}
