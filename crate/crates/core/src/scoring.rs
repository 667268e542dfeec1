//! Score models: how a scoring category turns into objective weights and a
//! mandatory set for the planner.
//!
//! Mandatory customers always get weight 0, so the objective only counts
//! optional visits and stays a plain weighted sum.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{AbcClass, CustomerId, Instance};
use crate::solution::{check_feasible_with, objective_value, FeasibilityReport, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelVariant {
    Ns,
    Mns,
    Sabc,
    Wabc,
    Ws,
    Mws,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 6] = [
        ModelVariant::Ns,
        ModelVariant::Mns,
        ModelVariant::Sabc,
        ModelVariant::Wabc,
        ModelVariant::Ws,
        ModelVariant::Mws,
    ];

    /// Lowercase flag spelling (`ns`, `sabc`, ...).
    pub fn key(self) -> &'static str {
        match self {
            ModelVariant::Ns => "ns",
            ModelVariant::Mns => "mns",
            ModelVariant::Sabc => "sabc",
            ModelVariant::Wabc => "wabc",
            ModelVariant::Ws => "ws",
            ModelVariant::Mws => "mws",
        }
    }

    pub fn has_designated_mandatory(self) -> bool {
        matches!(self, ModelVariant::Mns | ModelVariant::Mws)
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelVariant::Ns => "NS",
            ModelVariant::Mns => "MNS",
            ModelVariant::Sabc => "sABC",
            ModelVariant::Wabc => "wABC",
            ModelVariant::Ws => "WS",
            ModelVariant::Mws => "MWS",
        };
        f.pad(s)
    }
}

impl FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelVariant::ALL
            .into_iter()
            .find(|v| v.key().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model variant '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ClassWeights {
    /// The judgmental defaults: three B visits are worth one A visit, five C
    /// visits are worth one B visit.
    pub const DEFAULT_WABC: ClassWeights = ClassWeights {
        a: 15.0,
        b: 5.0,
        c: 1.0,
    };

    pub fn of(&self, class: AbcClass) -> Option<f64> {
        match class {
            AbcClass::A => Some(self.a),
            AbcClass::B => Some(self.b),
            AbcClass::C => Some(self.c),
            AbcClass::Unclassified => None,
        }
    }
}

impl FromStr for ClassWeights {
    type Err = Error;

    /// Parses `A,B,C`, e.g. `15,5,1`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidArgument(format!("expected A,B,C weights, got '{s}'")))?;
        match parts[..] {
            [a, b, c] => Ok(ClassWeights { a, b, c }),
            _ => Err(Error::InvalidArgument(format!(
                "expected three comma-separated weights, got '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Plain,
    Manual {
        ids: BTreeSet<CustomerId>,
    },
    Strict {
        weights: ClassWeights,
    },
    Weighted {
        weights: ClassWeights,
        class_means: bool,
    },
    ExtraMandatory {
        ids: BTreeSet<CustomerId>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreModel {
    variant: ModelVariant,
    weights: Vec<f64>,
    /// Weight each customer would carry if it were optional.
    base_weights: Vec<f64>,
    mandatory: BTreeSet<CustomerId>,
    params: ModelParams,
    fallback: bool,
    demoted: bool,
}

impl ScoreModel {
    fn assemble(
        variant: ModelVariant,
        instance: &Instance,
        base_weights: Vec<f64>,
        mandatory: BTreeSet<CustomerId>,
        params: ModelParams,
    ) -> Self {
        let weights = instance
            .customers()
            .iter()
            .zip(&base_weights)
            .map(|(c, &w)| if mandatory.contains(&c.id) { 0.0 } else { w })
            .collect();
        ScoreModel {
            variant,
            weights,
            base_weights,
            mandatory,
            params,
            fallback: false,
            demoted: false,
        }
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant
    }

    /// Effective objective weight per customer, aligned with
    /// [`Instance::customers`].
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mandatory(&self) -> &BTreeSet<CustomerId> {
        &self.mandatory
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn fallback(&self) -> bool {
        self.fallback
    }

    /// True if this model came from [`ScoreModel::demoted`].
    pub fn is_demoted(&self) -> bool {
        self.demoted
    }

    pub fn with_fallback(mut self, fallback: bool) -> Self {
        self.fallback = fallback;
        self
    }

    /// Fallback for an infeasible mandatory set: every mandatory customer
    /// becomes optional with a weight exceeding all optional weights combined
    /// (the sum of all base weights plus one).
    pub fn demoted(&self, instance: &Instance) -> ScoreModel {
        let big = self.base_weights.iter().sum::<f64>() + 1.0;
        let weights = instance
            .customers()
            .iter()
            .zip(&self.weights)
            .map(|(c, &w)| {
                if self.mandatory.contains(&c.id) {
                    big
                } else {
                    w
                }
            })
            .collect();
        ScoreModel {
            variant: self.variant,
            weights,
            base_weights: self.base_weights.clone(),
            mandatory: BTreeSet::new(),
            params: self.params.clone(),
            fallback: false,
            demoted: true,
        }
    }

    pub fn is_mandatory_position(&self, instance: &Instance, position: usize) -> bool {
        self.mandatory.contains(&instance.customers()[position].id)
    }

    pub fn check(&self, sol: &Solution, instance: &Instance) -> FeasibilityReport {
        check_feasible_with(sol, instance, &self.mandatory)
    }

    pub fn objective(&self, sol: &Solution, instance: &Instance) -> Result<f64> {
        objective_value(sol, instance, &self.weights)
    }
}

fn validate_ids(instance: &Instance, ids: &BTreeSet<CustomerId>) -> Result<()> {
    match ids.iter().find(|id| instance.position(**id).is_none()) {
        Some(&id) => Err(Error::InvalidReference(id)),
        None => Ok(()),
    }
}

fn class_of_all(instance: &Instance) -> Result<Vec<AbcClass>> {
    instance
        .customers()
        .iter()
        .map(|c| match c.abc_class {
            AbcClass::Unclassified => Err(Error::Unclassified(c.id)),
            k => Ok(k),
        })
        .collect()
}

fn class_weighted(instance: &Instance, w: ClassWeights) -> Result<Vec<f64>> {
    Ok(class_of_all(instance)?
        .into_iter()
        .map(|k| w.of(k).expect("classified"))
        .collect())
}

fn reject_negative(instance: &Instance) -> Result<()> {
    match instance.customers().iter().find(|c| c.score < 0.0) {
        Some(c) => Err(Error::NegativeScore {
            id: c.id,
            score: c.score,
        }),
        None => Ok(()),
    }
}

/// Every customer counts the same; the planner maximizes the visit count.
pub fn build_ns(instance: &Instance) -> ScoreModel {
    ScoreModel::assemble(
        ModelVariant::Ns,
        instance,
        vec![1.0; instance.len()],
        instance.mandatory_ids(),
        ModelParams::Plain,
    )
}

/// Manually selected customers join the mandatory set; the rest count 1.
pub fn build_mns(instance: &Instance, manual_ids: &BTreeSet<CustomerId>) -> Result<ScoreModel> {
    validate_ids(instance, manual_ids)?;
    let mut mandatory = instance.mandatory_ids();
    mandatory.extend(manual_ids.iter().copied());
    Ok(ScoreModel::assemble(
        ModelVariant::Mns,
        instance,
        vec![1.0; instance.len()],
        mandatory,
        ModelParams::Manual {
            ids: manual_ids.clone(),
        },
    ))
}

/// Hierarchical class weights: one A visit outweighs all B and C visits
/// together, one B visit outweighs all C visits.
pub fn sabc_weights(count_b: usize, count_c: usize) -> ClassWeights {
    let c = 1.0;
    let b = c * count_c as f64 + 1.0;
    let a = c * count_c as f64 + b * count_b as f64 + 1.0;
    ClassWeights { a, b, c }
}

pub fn build_sabc(instance: &Instance) -> Result<ScoreModel> {
    let classes = class_of_all(instance)?;
    let count = |k| classes.iter().filter(|&&c| c == k).count();
    let w = sabc_weights(count(AbcClass::B), count(AbcClass::C));
    Ok(ScoreModel::assemble(
        ModelVariant::Sabc,
        instance,
        class_weighted(instance, w)?,
        instance.mandatory_ids(),
        ModelParams::Strict { weights: w },
    ))
}

/// Class-uniform weights from a judgmental assessment; requires
/// `a >= b >= c > 0`.
pub fn build_wabc(instance: &Instance, w: ClassWeights) -> Result<ScoreModel> {
    if !(w.a >= w.b && w.b >= w.c && w.c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "wABC weights must satisfy A >= B >= C > 0, got {},{},{}",
            w.a, w.b, w.c
        )));
    }
    Ok(ScoreModel::assemble(
        ModelVariant::Wabc,
        instance,
        class_weighted(instance, w)?,
        instance.mandatory_ids(),
        ModelParams::Weighted {
            weights: w,
            class_means: false,
        },
    ))
}

/// Class-uniform weights equal to the mean score of each class. An empty
/// class gets weight 0 (it has nobody to weigh).
pub fn build_wabc_class_means(instance: &Instance) -> Result<ScoreModel> {
    let classes = class_of_all(instance)?;
    let mean = |k: AbcClass| {
        let (sum, n) = instance
            .customers()
            .iter()
            .zip(&classes)
            .filter(|(_, &c)| c == k)
            .fold((0.0, 0usize), |(s, n), (cu, _)| (s + cu.score, n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    };
    let w = ClassWeights {
        a: mean(AbcClass::A),
        b: mean(AbcClass::B),
        c: mean(AbcClass::C),
    };
    if w.a < 0.0 || w.b < 0.0 || w.c < 0.0 {
        return Err(Error::InvalidArgument(
            "class-mean weights must be non-negative".into(),
        ));
    }
    Ok(ScoreModel::assemble(
        ModelVariant::Wabc,
        instance,
        class_weighted(instance, w)?,
        instance.mandatory_ids(),
        ModelParams::Weighted {
            weights: w,
            class_means: true,
        },
    ))
}

/// Raw predicted scores as weights.
pub fn build_ws(instance: &Instance) -> Result<ScoreModel> {
    reject_negative(instance)?;
    Ok(ScoreModel::assemble(
        ModelVariant::Ws,
        instance,
        instance.scores(),
        instance.mandatory_ids(),
        ModelParams::Plain,
    ))
}

/// Raw scores plus an enlarged mandatory set. With `fallback_on_infeasible`
/// the solvers switch to [`ScoreModel::demoted`] when the mandatory set
/// cannot be served.
pub fn build_mws(
    instance: &Instance,
    extra_mandatory: &BTreeSet<CustomerId>,
    fallback_on_infeasible: bool,
) -> Result<ScoreModel> {
    reject_negative(instance)?;
    validate_ids(instance, extra_mandatory)?;
    let mut mandatory = instance.mandatory_ids();
    mandatory.extend(extra_mandatory.iter().copied());
    Ok(ScoreModel::assemble(
        ModelVariant::Mws,
        instance,
        instance.scores(),
        mandatory,
        ModelParams::ExtraMandatory {
            ids: extra_mandatory.clone(),
        },
    )
    .with_fallback(fallback_on_infeasible))
}

/// Where mandatory customers come from when building a model through
/// [`build_model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MandatorySource {
    /// Flagged customers are the designated key accounts: only MNS and MWS
    /// enforce them, the other variants plan with no mandatory customers.
    #[default]
    Designated,
    /// Every variant enforces the instance's flags.
    Instance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WabcMode {
    Fixed(ClassWeights),
    ClassMeans,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOptions {
    pub mandatory: MandatorySource,
    pub wabc: WabcMode,
    pub fallback: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            mandatory: MandatorySource::Designated,
            wabc: WabcMode::Fixed(ClassWeights::DEFAULT_WABC),
            fallback: false,
        }
    }
}

/// Builds any variant from an instance whose mandatory flags are read
/// according to `opts.mandatory`.
pub fn build_model(
    variant: ModelVariant,
    instance: &Instance,
    opts: &ModelOptions,
) -> Result<ScoreModel> {
    let flagged = instance.mandatory_ids();
    let stripped;
    let (base, extra) = match opts.mandatory {
        MandatorySource::Instance => (instance, BTreeSet::new()),
        MandatorySource::Designated => {
            stripped = instance.with_mandatory(&BTreeSet::new());
            (&stripped, flagged)
        }
    };
    let model = match variant {
        ModelVariant::Ns => build_ns(base),
        ModelVariant::Mns => build_mns(base, &extra)?,
        ModelVariant::Sabc => build_sabc(base)?,
        ModelVariant::Wabc => match opts.wabc {
            WabcMode::Fixed(w) => build_wabc(base, w)?,
            WabcMode::ClassMeans => build_wabc_class_means(base)?,
        },
        ModelVariant::Ws => build_ws(base)?,
        ModelVariant::Mws => build_mws(base, &extra, opts.fallback)?,
    };
    Ok(model.with_fallback(opts.fallback))
}
