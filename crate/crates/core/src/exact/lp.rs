//! CPLEX-LP text of the arc-based formulation, for external solvers.

use std::fmt::Write as _;

use crate::instance::Instance;
use crate::scoring::ScoreModel;

fn node_name(instance: &Instance, node: usize) -> String {
    if node == 0 {
        "h".to_string()
    } else {
        format!("c{}", instance.customers()[node - 1].id)
    }
}

fn terms(out: &mut String, parts: &[(f64, String)]) {
    for (i, (coef, var)) in parts.iter().enumerate() {
        let sign = if *coef < 0.0 { "-" } else { "+" };
        let mag = coef.abs();
        if i == 0 && sign == "+" {
            let _ = write!(out, " {mag} {var}");
        } else {
            let _ = write!(out, " {sign} {mag} {var}");
        }
    }
}

fn row(out: &mut String, name: &str, parts: &[(f64, String)], sense: &str, rhs: f64) {
    if parts.is_empty() {
        return;
    }
    let _ = write!(out, " {name}:");
    terms(out, parts);
    let _ = writeln!(out, " {sense} {rhs}");
}

/// Deterministic LP text: visit variables `v_<c>_d<day>`, arc variables
/// `x_<i>_<j>_d<day>` (`h` is home), visit-once and mandatory rows, flow
/// conservation, at most one tour per day, visit/arc linking, one
/// working-time row per day and subtour elimination over customer subsets of
/// size two and three. Larger subtour cuts are left to the solver, so the
/// model is a relaxation until cuts are added.
pub fn export_lp(instance: &Instance, model: &ScoreModel) -> String {
    let n = instance.len();
    let days = instance.horizon_days();
    let nodes = n + 1;
    let name = |node| node_name(instance, node);
    let v = |c: usize, d: usize| format!("v_{}_d{d}", name(c + 1));
    let x = |i: usize, j: usize, d: usize| format!("x_{}_{}_d{d}", name(i), name(j));

    let mut out = String::new();
    let _ = writeln!(out, "\\ multi-period orienteering: {}", instance.name());
    let _ = writeln!(
        out,
        "\\ {n} customers, {days} days, {} min per day, model {}",
        instance.max_daily_minutes(),
        model.variant()
    );
    let _ = writeln!(
        out,
        "\\ subtour elimination rows cover subsets of size 2 and 3 only; add the\n\\ remaining sum_(i,j in Q) x_ijd <= |Q| - 1 rows by cut generation"
    );

    out.push_str("Maximize\n obj:");
    let mut objective = Vec::new();
    if n > 0 {
        for d in 0..days {
            for c in 0..n {
                let w = model.weights()[c];
                if w != 0.0 {
                    objective.push((w, v(c, d)));
                }
            }
        }
    }
    if objective.is_empty() {
        out.push_str(" 0\n");
    } else {
        terms(&mut out, &objective);
        out.push('\n');
    }

    out.push_str("Subject To\n");
    if n > 0 {
        for c in 0..n {
            let parts: Vec<_> = (0..days).map(|d| (1.0, v(c, d))).collect();
            let mandatory = model.is_mandatory_position(instance, c);
            let sense = if mandatory { "=" } else { "<=" };
            row(
                &mut out,
                &format!("once_{}", name(c + 1)),
                &parts,
                sense,
                1.0,
            );
        }
        for d in 0..days {
            let leave: Vec<_> = (1..nodes).map(|j| (1.0, x(0, j, d))).collect();
            let enter: Vec<_> = (1..nodes).map(|j| (1.0, x(j, 0, d))).collect();
            row(&mut out, &format!("leave_h_d{d}"), &leave, "<=", 1.0);
            row(&mut out, &format!("enter_h_d{d}"), &enter, "<=", 1.0);
            for i in 0..nodes {
                let mut parts = Vec::new();
                for j in (0..nodes).filter(|&j| j != i) {
                    parts.push((1.0, x(i, j, d)));
                }
                for j in (0..nodes).filter(|&j| j != i) {
                    parts.push((-1.0, x(j, i, d)));
                }
                row(
                    &mut out,
                    &format!("flow_{}_d{d}", name(i)),
                    &parts,
                    "=",
                    0.0,
                );
            }
            for c in 0..n {
                let mut parts: Vec<_> = (0..nodes)
                    .filter(|&j| j != c + 1)
                    .map(|j| (1.0, x(c + 1, j, d)))
                    .collect();
                parts.push((-1.0, v(c, d)));
                row(
                    &mut out,
                    &format!("link_{}_d{d}", name(c + 1)),
                    &parts,
                    "=",
                    0.0,
                );
            }
            let mut time = Vec::new();
            for i in 0..nodes {
                let service = if i == 0 {
                    0.0
                } else {
                    instance.customers()[i - 1].service_time
                };
                for j in (0..nodes).filter(|&j| j != i) {
                    let coef = instance.matrix().time(i, j) + service;
                    time.push((coef, x(i, j, d)));
                }
            }
            row(
                &mut out,
                &format!("time_d{d}"),
                &time,
                "<=",
                instance.max_daily_minutes(),
            );
            for a in 1..nodes {
                for b in a + 1..nodes {
                    let pair = vec![(1.0, x(a, b, d)), (1.0, x(b, a, d))];
                    row(
                        &mut out,
                        &format!("sec_{}_{}_d{d}", name(a), name(b)),
                        &pair,
                        "<=",
                        1.0,
                    );
                    for c in b + 1..nodes {
                        let q = [a, b, c];
                        let mut parts = Vec::new();
                        for &i in &q {
                            for &j in &q {
                                if i != j {
                                    parts.push((1.0, x(i, j, d)));
                                }
                            }
                        }
                        let label = format!("sec_{}_{}_{}_d{d}", name(a), name(b), name(c));
                        row(&mut out, &label, &parts, "<=", 2.0);
                    }
                }
            }
        }
    }

    if n > 0 {
        out.push_str("Binary\n");
        for d in 0..days {
            for c in 0..n {
                let _ = writeln!(out, " {}", v(c, d));
            }
            for i in 0..nodes {
                for j in (0..nodes).filter(|&j| j != i) {
                    let _ = writeln!(out, " {}", x(i, j, d));
                }
            }
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Customer, TravelMatrix};
    use crate::scoring::build_ws;

    fn tiny(n: usize) -> Instance {
        let customers = (0..n)
            .map(|i| Customer::new(i as u32 + 1, 10.0, 2.0))
            .collect();
        let m = n + 1;
        let times = (0..m * m)
            .map(|k| if k / m == k % m { 0.0 } else { 5.0 })
            .collect();
        Instance::new(
            "lp",
            1,
            100.0,
            customers,
            TravelMatrix::new(m, times).unwrap(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn two_customers_one_day() {
        let inst = tiny(2);
        let lp = export_lp(&inst, &build_ws(&inst).unwrap());
        let binaries: Vec<&str> = lp
            .split("Binary\n")
            .nth(1)
            .unwrap()
            .lines()
            .map(str::trim)
            .collect();
        assert_eq!(binaries.iter().filter(|l| l.starts_with("v_")).count(), 2);
        assert_eq!(
            lp.lines()
                .filter(|l| l.trim_start().starts_with("time_"))
                .count(),
            1
        );
        assert!(lp.contains(" sec_c1_c2_d0: 1 x_c1_c2_d0 + 1 x_c2_c1_d0 <= 1"));
    }

    #[test]
    fn empty_instance_has_only_an_objective() {
        let inst = tiny(0);
        let lp = export_lp(&inst, &build_ws(&inst).unwrap());
        let body: Vec<&str> = lp.lines().filter(|l| !l.starts_with('\\')).collect();
        assert_eq!(body, vec!["Maximize", " obj: 0", "Subject To", "End"]);
    }

    #[test]
    fn deterministic() {
        let inst = tiny(4);
        let m = build_ws(&inst).unwrap();
        assert_eq!(export_lp(&inst, &m), export_lp(&inst, &m));
    }
}
