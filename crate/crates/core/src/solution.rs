//! Tour plans and their evaluation: durations, feasibility, objective and
//! the evaluation shares used in reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{CustomerId, Instance};

/// Absolute slack, in minutes, for working-time comparisons.
pub const TIME_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tour {
    pub day: usize,
    pub visits: Vec<CustomerId>,
}

impl Tour {
    pub fn new(day: usize, visits: Vec<CustomerId>) -> Self {
        Tour { day, visits }
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub instance: String,
    pub tours: Vec<Tour>,
}

impl Solution {
    /// One empty tour per day of the horizon.
    pub fn empty(instance: &Instance) -> Self {
        Solution {
            instance: instance.name().to_string(),
            tours: (0..instance.horizon_days())
                .map(|d| Tour::new(d, Vec::new()))
                .collect(),
        }
    }

    pub fn visited(&self) -> BTreeSet<CustomerId> {
        self.tours
            .iter()
            .flat_map(|t| t.visits.iter().copied())
            .collect()
    }

    pub fn visit_count(&self) -> usize {
        self.tours.iter().map(|t| t.visits.len()).sum()
    }

    pub fn day_durations(&self, instance: &Instance) -> Result<Vec<f64>> {
        self.tours.iter().map(|t| duration(t, instance)).collect()
    }

    pub fn total_travel(&self, instance: &Instance) -> Result<f64> {
        self.tours.iter().map(|t| travel_time(t, instance)).sum()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("solution serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }
}

fn positions(tour: &Tour, instance: &Instance) -> Result<Vec<usize>> {
    tour.visits
        .iter()
        .map(|&id| instance.position(id).ok_or(Error::InvalidReference(id)))
        .collect()
}

/// Travel minutes of the closed walk home -> visits -> home.
pub fn travel_time(tour: &Tour, instance: &Instance) -> Result<f64> {
    Ok(walk_travel(&positions(tour, instance)?, instance))
}

/// Working time of a tour: travel of the closed walk plus service times.
pub fn duration(tour: &Tour, instance: &Instance) -> Result<f64> {
    Ok(walk_duration(&positions(tour, instance)?, instance))
}

pub(crate) fn walk_travel(route: &[usize], instance: &Instance) -> f64 {
    let mut prev = None;
    let mut total = 0.0;
    for &c in route {
        total += instance.travel(prev, Some(c));
        prev = Some(c);
    }
    if prev.is_some() {
        total += instance.travel(prev, None);
    }
    total
}

pub(crate) fn walk_duration(route: &[usize], instance: &Instance) -> f64 {
    let service: f64 = route
        .iter()
        .map(|&c| instance.customers()[c].service_time)
        .sum();
    walk_travel(route, instance) + service
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    UnknownCustomer {
        day: usize,
        id: CustomerId,
    },
    DayOutOfRange {
        day: usize,
    },
    DuplicateDay {
        day: usize,
    },
    DuplicateVisit {
        id: CustomerId,
        count: usize,
    },
    MissingMandatory {
        id: CustomerId,
    },
    DayOverLimit {
        day: usize,
        duration: f64,
        limit: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownCustomer { day, id } => {
                write!(f, "unknown customer {id} on day {day}")
            }
            Violation::DayOutOfRange { day } => write!(f, "day {day} is outside the horizon"),
            Violation::DuplicateDay { day } => write!(f, "more than one tour for day {day}"),
            Violation::DuplicateVisit { id, count } => {
                write!(f, "customer {id} visited more than once ({count} visits)")
            }
            Violation::MissingMandatory { id } => write!(f, "mandatory unvisited: customer {id}"),
            Violation::DayOverLimit {
                day,
                duration,
                limit,
            } => write!(
                f,
                "day {day} takes {duration:.3} min, above the limit of {limit}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Checks a solution against the instance's own mandatory set.
pub fn check_feasible(sol: &Solution, instance: &Instance) -> FeasibilityReport {
    check_feasible_with(sol, instance, &instance.mandatory_ids())
}

/// Checks a solution with an explicit mandatory set (score models may
/// enlarge the instance's set).
///
/// Violations are listed in a fixed order: per-tour structural problems in
/// tour order, then repeated visits by id, missing mandatory customers by
/// id, and finally overlong days by day index. Unknown ids are skipped when
/// computing a day's duration.
pub fn check_feasible_with(
    sol: &Solution,
    instance: &Instance,
    mandatory: &BTreeSet<CustomerId>,
) -> FeasibilityReport {
    let mut violations = Vec::new();
    let mut counts: BTreeMap<CustomerId, usize> = BTreeMap::new();
    let mut seen_days = BTreeSet::new();
    let mut overlong = Vec::new();
    let limit = instance.max_daily_minutes();

    for tour in &sol.tours {
        let in_range = tour.day < instance.horizon_days();
        if !in_range {
            violations.push(Violation::DayOutOfRange { day: tour.day });
        } else if !seen_days.insert(tour.day) {
            violations.push(Violation::DuplicateDay { day: tour.day });
        }
        let mut route = Vec::with_capacity(tour.visits.len());
        for &id in &tour.visits {
            *counts.entry(id).or_default() += 1;
            match instance.position(id) {
                Some(p) => route.push(p),
                None => violations.push(Violation::UnknownCustomer { day: tour.day, id }),
            }
        }
        if in_range {
            let d = walk_duration(&route, instance);
            if d > limit + TIME_EPS {
                overlong.push((tour.day, d));
            }
        }
    }

    for (&id, &count) in &counts {
        if count > 1 {
            violations.push(Violation::DuplicateVisit { id, count });
        }
    }
    for &id in mandatory {
        if !counts.contains_key(&id) {
            violations.push(Violation::MissingMandatory { id });
        }
    }
    overlong.sort_by_key(|&(day, _)| day);
    violations.extend(
        overlong
            .into_iter()
            .map(|(day, duration)| Violation::DayOverLimit {
                day,
                duration,
                limit,
            }),
    );

    FeasibilityReport {
        ok: violations.is_empty(),
        violations,
    }
}

/// Sum of `weights` over the distinct visited customers. `weights` is
/// aligned with [`Instance::customers`].
pub fn objective_value(sol: &Solution, instance: &Instance, weights: &[f64]) -> Result<f64> {
    if weights.len() < instance.len() {
        return Err(Error::MissingWeight {
            expected: instance.len(),
            got: weights.len(),
        });
    }
    let mut total = 0.0;
    for id in sol.visited() {
        let p = instance.position(id).ok_or(Error::InvalidReference(id))?;
        total += weights[p];
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `None` for an instance without customers.
    pub share_visited: Option<f64>,
    /// `None` when the aggregate score of the instance is zero.
    pub share_realized: Option<f64>,
    pub total_travel: f64,
}

/// Shares of visited customers and of realized score (mandatory customers
/// included on both sides of the ratio).
pub fn metrics(sol: &Solution, instance: &Instance, true_scores: &[f64]) -> Result<Metrics> {
    if true_scores.len() < instance.len() {
        return Err(Error::MissingWeight {
            expected: instance.len(),
            got: true_scores.len(),
        });
    }
    let visited = sol.visited();
    let mut realized = 0.0;
    for &id in &visited {
        let p = instance.position(id).ok_or(Error::InvalidReference(id))?;
        realized += true_scores[p];
    }
    let aggregate: f64 = true_scores[..instance.len()].iter().sum();
    let share_visited = if instance.is_empty() {
        None
    } else {
        Some(visited.len() as f64 / instance.len() as f64)
    };
    let share_realized = if aggregate == 0.0 {
        None
    } else {
        Some(realized / aggregate)
    };
    Ok(Metrics {
        share_visited,
        share_realized,
        total_travel: sol.total_travel(instance)?,
    })
}
