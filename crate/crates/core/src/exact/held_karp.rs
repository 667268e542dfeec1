//! Held-Karp dynamic programs over customer subsets.

use crate::error::{Error, Result};
use crate::instance::{CustomerId, Instance};
use crate::solution::TIME_EPS;

/// Largest set [`min_tour_duration`] accepts.
pub const MAX_TOUR_SET: usize = 15;

const NONE: u8 = u8::MAX;

/// Minimum working time of a closed tour from home through every customer in
/// `set` (travel plus service).
pub fn min_tour_duration(set: &[CustomerId], instance: &Instance) -> Result<f64> {
    Ok(min_tour(set, instance)?.0)
}

/// Like [`min_tour_duration`], also returning an optimal visit order.
pub fn min_tour(set: &[CustomerId], instance: &Instance) -> Result<(f64, Vec<CustomerId>)> {
    if set.len() > MAX_TOUR_SET {
        return Err(Error::SizeExceeded {
            customers: set.len(),
            limit: MAX_TOUR_SET,
        });
    }
    let pos: Vec<usize> = set
        .iter()
        .map(|&id| instance.position(id).ok_or(Error::InvalidReference(id)))
        .collect::<Result<_>>()?;
    let table = PathTable::build(instance, &pos, None);
    let full = (1usize << pos.len()) - 1;
    match table.closed(full) {
        Some((travel, _)) => {
            let service: f64 = pos
                .iter()
                .map(|&p| instance.customers()[p].service_time)
                .sum();
            let order = table.order(full).into_iter().map(|k| set[k]).collect();
            Ok((travel + service, order))
        }
        None => unreachable!("unbounded table always closes"),
    }
}

/// Shortest open paths from home over every subset of a customer list.
///
/// `dist[mask * n + j]` is the least travel of a path leaving home, visiting
/// exactly `mask` and ending at `j`. With a time limit, states whose travel
/// plus service already exceed it are dropped; such a path cannot become
/// feasible by extending it.
pub(crate) struct PathTable {
    n: usize,
    dist: Vec<f64>,
    parent: Vec<u8>,
    service: Vec<f64>,
    home_back: Vec<f64>,
}

impl PathTable {
    pub(crate) fn build(instance: &Instance, positions: &[usize], limit: Option<f64>) -> Self {
        let n = positions.len();
        assert!(n <= 24, "subset table too large");
        let size = 1usize << n;
        let m = instance.matrix();
        let nodes: Vec<usize> = positions.iter().map(|&p| p + 1).collect();
        let svc: Vec<f64> = positions
            .iter()
            .map(|&p| instance.customers()[p].service_time)
            .collect();
        let mut service = vec![0.0; size];
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            service[mask] = service[mask & (mask - 1)] + svc[low];
        }
        let cap = limit.map_or(f64::INFINITY, |t| t + TIME_EPS);
        let mut dist = vec![f64::INFINITY; size * n];
        let mut parent = vec![NONE; size * n];
        for j in 0..n {
            let t = m.time(0, nodes[j]);
            if t + svc[j] <= cap {
                dist[(1 << j) * n + j] = t;
            }
        }
        for mask in 1..size {
            if service[mask] > cap {
                continue;
            }
            for j in 0..n {
                let here = dist[mask * n + j];
                if !here.is_finite() {
                    continue;
                }
                let mut rest = !mask & (size - 1);
                while rest != 0 {
                    let k = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    let next = mask | (1 << k);
                    let cand = here + m.time(nodes[j], nodes[k]);
                    if cand + service[next] > cap {
                        continue;
                    }
                    let slot = next * n + k;
                    if cand < dist[slot] {
                        dist[slot] = cand;
                        parent[slot] = j as u8;
                    }
                }
            }
        }
        let home_back = nodes.iter().map(|&v| m.time(v, 0)).collect();
        PathTable {
            n,
            dist,
            parent,
            service,
            home_back,
        }
    }

    pub(crate) fn service(&self, mask: usize) -> f64 {
        self.service[mask]
    }

    /// Least travel of a closed tour over `mask` and its last customer.
    pub(crate) fn closed(&self, mask: usize) -> Option<(f64, usize)> {
        if mask == 0 {
            return Some((0.0, usize::MAX));
        }
        let mut best: Option<(f64, usize)> = None;
        for j in 0..self.n {
            if mask & (1 << j) == 0 {
                continue;
            }
            let d = self.dist[mask * self.n + j];
            if !d.is_finite() {
                continue;
            }
            let total = d + self.home_back[j];
            if best.is_none_or(|(b, _)| total < b) {
                best = Some((total, j));
            }
        }
        best
    }

    /// Local indices of an optimal closed tour over `mask`, in visit order.
    pub(crate) fn order(&self, mask: usize) -> Vec<usize> {
        let Some((_, mut last)) = self.closed(mask) else {
            return Vec::new();
        };
        if mask == 0 {
            return Vec::new();
        }
        let mut order = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        loop {
            order.push(last);
            let p = self.parent[m * self.n + last];
            m &= !(1 << last);
            if p == NONE {
                break;
            }
            last = p as usize;
        }
        debug_assert_eq!(m, 0);
        order.reverse();
        order
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Customer, TravelMatrix};

    #[test]
    fn trivial_sets() {
        let times = vec![0.0, 10.0, 10.0, 0.0];
        let inst = Instance::new(
            "one",
            1,
            100.0,
            vec![Customer::new(4, 15.0, 1.0)],
            TravelMatrix::new(2, times).unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(min_tour_duration(&[], &inst).unwrap(), 0.0);
        assert_eq!(min_tour_duration(&[CustomerId(4)], &inst).unwrap(), 35.0);
        assert!(min_tour_duration(&[CustomerId(5)], &inst).is_err());
    }

    #[test]
    fn rejects_oversized_sets() {
        let n = 16;
        let customers = (0..n).map(|i| Customer::new(i, 1.0, 1.0)).collect();
        let inst = Instance::new(
            "big",
            1,
            100.0,
            customers,
            TravelMatrix::new(n as usize + 1, vec![0.0; (n as usize + 1).pow(2)]).unwrap(),
            None,
        )
        .unwrap();
        let all: Vec<_> = (0..n).map(CustomerId).collect();
        assert!(matches!(
            min_tour_duration(&all, &inst),
            Err(Error::SizeExceeded { .. })
        ));
    }
}
