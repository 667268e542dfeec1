//! Problem data: customers, the travel-time matrix and the planning horizon.
//!
//! Node 0 of the travel matrix is the sales representative's home; the
//! customer stored at position `i` of [`Instance::customers`] is node `i + 1`.
//! Instances are immutable once built and can be shared across threads.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CustomerId(pub u32);

impl fmt::Display for CustomerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub enum AbcClass {
    A,
    B,
    C,
    #[default]
    Unclassified,
}

impl fmt::Display for AbcClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AbcClass::A => "A",
            AbcClass::B => "B",
            AbcClass::C => "C",
            AbcClass::Unclassified => "Unclassified",
        };
        f.pad(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Customer {
    pub id: CustomerId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    pub service_time: f64,
    pub score: f64,
    #[serde(default)]
    pub abc_class: AbcClass,
    #[serde(default)]
    pub mandatory: bool,
}

impl Customer {
    pub fn new(id: u32, service_time: f64, score: f64) -> Self {
        Customer {
            id: CustomerId(id),
            x: None,
            y: None,
            service_time,
            score,
            abc_class: AbcClass::Unclassified,
            mandatory: false,
        }
    }

    pub fn at(mut self, x: f64, y: f64) -> Self {
        self.x = Some(x);
        self.y = Some(y);
        self
    }

    pub fn with_class(mut self, class: AbcClass) -> Self {
        self.abc_class = class;
        self
    }

    pub fn mandatory(mut self, mandatory: bool) -> Self {
        self.mandatory = mandatory;
        self
    }

    pub fn point(&self) -> Option<Point> {
        Some(Point {
            x: self.x?,
            y: self.y?,
        })
    }
}

/// Dense travel times in minutes, row-major, home at index 0.
///
/// Symmetry is not required.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelMatrix {
    n_nodes: usize,
    times: Vec<f64>,
}

impl TravelMatrix {
    pub fn new(n_nodes: usize, times: Vec<f64>) -> Result<Self> {
        if times.len() != n_nodes * n_nodes {
            return Err(Error::InvalidInstance(format!(
                "travel matrix has {} entries, expected {}x{}",
                times.len(),
                n_nodes,
                n_nodes
            )));
        }
        for i in 0..n_nodes {
            for j in 0..n_nodes {
                let t = times[i * n_nodes + j];
                if !t.is_finite() || t < 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "travel time ({i},{j}) = {t} is not a finite non-negative number"
                    )));
                }
                if i == j && t != 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "travel matrix diagonal entry ({i},{i}) is {t}, expected 0"
                    )));
                }
            }
        }
        Ok(TravelMatrix { n_nodes, times })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInstance("travel matrix is not square".into()));
        }
        Self::new(n, rows.into_iter().flatten().collect())
    }

    /// Euclidean distances scaled by `minutes_per_unit`.
    pub fn euclidean(points: &[Point], minutes_per_unit: f64) -> Self {
        let n = points.len();
        let mut times = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    times[i * n + j] = points[i].distance(&points[j]) * minutes_per_unit;
                }
            }
        }
        TravelMatrix { n_nodes: n, times }
    }

    #[inline]
    pub fn time(&self, from: usize, to: usize) -> f64 {
        self.times[from * self.n_nodes + to]
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.times
    }

    /// Submatrix over the given node indices, in that order.
    pub fn restrict(&self, nodes: &[usize]) -> Self {
        let n = nodes.len();
        let mut times = Vec::with_capacity(n * n);
        for &i in nodes {
            for &j in nodes {
                times.push(self.time(i, j));
            }
        }
        TravelMatrix { n_nodes: n, times }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    name: String,
    horizon_days: usize,
    max_daily_minutes: f64,
    customers: Vec<Customer>,
    matrix: TravelMatrix,
    home: Option<Point>,
    index: HashMap<CustomerId, usize>,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        horizon_days: usize,
        max_daily_minutes: f64,
        customers: Vec<Customer>,
        matrix: TravelMatrix,
        home: Option<Point>,
    ) -> Result<Self> {
        if horizon_days == 0 {
            return Err(Error::InvalidInstance(
                "horizon_days must be at least 1".into(),
            ));
        }
        if !(max_daily_minutes.is_finite() && max_daily_minutes > 0.0) {
            return Err(Error::InvalidInstance(format!(
                "max_daily_minutes must be positive, got {max_daily_minutes}"
            )));
        }
        if matrix.n_nodes() != customers.len() + 1 {
            return Err(Error::InvalidInstance(format!(
                "travel matrix has {} nodes but there are {} customers plus home",
                matrix.n_nodes(),
                customers.len()
            )));
        }
        let mut index = HashMap::with_capacity(customers.len());
        for (i, c) in customers.iter().enumerate() {
            if !(c.service_time.is_finite() && c.service_time >= 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "customer {} has invalid service time {}",
                    c.id, c.service_time
                )));
            }
            if !c.score.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "customer {} has non-finite score",
                    c.id
                )));
            }
            if index.insert(c.id, i).is_some() {
                return Err(Error::InvalidInstance(format!(
                    "duplicate customer id {}",
                    c.id
                )));
            }
        }
        Ok(Instance {
            name: name.into(),
            horizon_days,
            max_daily_minutes,
            customers,
            matrix,
            home,
            index,
        })
    }

    /// Builds the matrix from planar coordinates. When `home` is `None` the
    /// home location is the unweighted centroid of the customers.
    pub fn from_coordinates(
        name: impl Into<String>,
        horizon_days: usize,
        max_daily_minutes: f64,
        customers: Vec<Customer>,
        home: Option<Point>,
        minutes_per_unit: f64,
    ) -> Result<Self> {
        if !(minutes_per_unit.is_finite() && minutes_per_unit > 0.0) {
            return Err(Error::InvalidInstance(format!(
                "speed factor must be positive, got {minutes_per_unit}"
            )));
        }
        let mut points = Vec::with_capacity(customers.len() + 1);
        for c in &customers {
            points.push(c.point().ok_or_else(|| {
                Error::InvalidInstance(format!(
                    "customer {} has no coordinates and no travel matrix was given",
                    c.id
                ))
            })?);
        }
        let home = home.unwrap_or_else(|| centroid(&points));
        points.insert(0, home);
        let matrix = TravelMatrix::euclidean(&points, minutes_per_unit);
        Instance::new(
            name,
            horizon_days,
            max_daily_minutes,
            customers,
            matrix,
            Some(home),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn horizon_days(&self) -> usize {
        self.horizon_days
    }

    pub fn max_daily_minutes(&self) -> f64 {
        self.max_daily_minutes
    }

    pub fn customers(&self) -> &[Customer] {
        &self.customers
    }

    pub fn len(&self) -> usize {
        self.customers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.customers.is_empty()
    }

    pub fn matrix(&self) -> &TravelMatrix {
        &self.matrix
    }

    pub fn home(&self) -> Option<Point> {
        self.home
    }

    /// Position of a customer in [`Instance::customers`].
    pub fn position(&self, id: CustomerId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn customer(&self, id: CustomerId) -> Option<&Customer> {
        self.position(id).map(|i| &self.customers[i])
    }

    /// Travel time between customer positions, `None` meaning home.
    #[inline]
    pub fn travel(&self, from: Option<usize>, to: Option<usize>) -> f64 {
        self.matrix
            .time(from.map_or(0, |i| i + 1), to.map_or(0, |i| i + 1))
    }

    /// Coordinates of node `node` (0 = home), if the instance has them.
    pub fn node_point(&self, node: usize) -> Option<Point> {
        if node == 0 {
            self.home
        } else {
            self.customers[node - 1].point()
        }
    }

    /// True when home and every customer carry planar coordinates.
    pub fn has_coordinates(&self) -> bool {
        self.home.is_some() && self.customers.iter().all(|c| c.point().is_some())
    }

    pub fn mandatory_ids(&self) -> BTreeSet<CustomerId> {
        self.customers
            .iter()
            .filter(|c| c.mandatory)
            .map(|c| c.id)
            .collect()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.customers.iter().map(|c| c.score).collect()
    }

    pub fn total_score(&self) -> f64 {
        self.customers.iter().map(|c| c.score).sum()
    }

    pub fn mean_score(&self) -> Option<f64> {
        if self.customers.is_empty() {
            None
        } else {
            Some(self.total_score() / self.customers.len() as f64)
        }
    }

    /// Copy with per-customer fields rewritten; structure and matrix are kept.
    pub fn map_customers(&self, mut f: impl FnMut(usize, &mut Customer)) -> Self {
        let mut out = self.clone();
        for (i, c) in out.customers.iter_mut().enumerate() {
            f(i, c);
        }
        out
    }

    /// Copy whose mandatory flags are exactly `ids`.
    pub fn with_mandatory(&self, ids: &BTreeSet<CustomerId>) -> Self {
        self.map_customers(|_, c| c.mandatory = ids.contains(&c.id))
    }

    pub fn with_name(&self, name: impl Into<String>) -> Self {
        let mut out = self.clone();
        out.name = name.into();
        out
    }

    pub fn with_horizon(&self, horizon_days: usize) -> Result<Self> {
        if horizon_days == 0 {
            return Err(Error::InvalidInstance(
                "horizon_days must be at least 1".into(),
            ));
        }
        let mut out = self.clone();
        out.horizon_days = horizon_days;
        Ok(out)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.into_instance()
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&InstanceFile::from(self))
            .expect("instance serialization cannot fail");
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

fn centroid(points: &[Point]) -> Point {
    if points.is_empty() {
        return Point { x: 0.0, y: 0.0 };
    }
    let n = points.len() as f64;
    Point {
        x: points.iter().map(|p| p.x).sum::<f64>() / n,
        y: points.iter().map(|p| p.y).sum::<f64>() / n,
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixRepr {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

/// On-disk layout of an instance.
#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    name: String,
    horizon_days: usize,
    max_daily_minutes: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    home: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    minutes_per_unit: Option<f64>,
    customers: Vec<Customer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<MatrixRepr>,
}

impl InstanceFile {
    fn into_instance(self) -> Result<Instance> {
        match self.matrix {
            Some(repr) => {
                let n = self.customers.len() + 1;
                let matrix = match repr {
                    MatrixRepr::Flat(times) => TravelMatrix::new(n, times)?,
                    MatrixRepr::Rows(rows) => TravelMatrix::from_rows(rows)?,
                };
                let home = self.home.or_else(|| {
                    let pts: Option<Vec<Point>> =
                        self.customers.iter().map(Customer::point).collect();
                    pts.filter(|p| !p.is_empty()).map(|p| centroid(&p))
                });
                Instance::new(
                    self.name,
                    self.horizon_days,
                    self.max_daily_minutes,
                    self.customers,
                    matrix,
                    home,
                )
            }
            None => Instance::from_coordinates(
                self.name,
                self.horizon_days,
                self.max_daily_minutes,
                self.customers,
                self.home,
                self.minutes_per_unit.unwrap_or(1.0),
            ),
        }
    }
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        InstanceFile {
            name: inst.name.clone(),
            horizon_days: inst.horizon_days,
            max_daily_minutes: inst.max_daily_minutes,
            home: inst.home,
            minutes_per_unit: None,
            customers: inst.customers.clone(),
            matrix: Some(MatrixRepr::Flat(inst.matrix.times.clone())),
        }
    }
}
