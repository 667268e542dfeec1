//! Build a tiny instance by hand and check plans against it.
//!
//! cargo run --example feasibility

use mpop::{check_feasible, Customer, CustomerId, Instance, Solution, Tour};

fn main() -> mpop::Result<()> {
    // four customers on a line, home at the origin, 1 minute per unit
    let customers = vec![
        Customer::new(1, 10.0, 50.0).at(10.0, 0.0).mandatory(true),
        Customer::new(2, 10.0, 30.0).at(20.0, 0.0),
        Customer::new(3, 10.0, 80.0).at(-15.0, 0.0),
        Customer::new(4, 10.0, 20.0).at(0.0, 40.0),
    ];
    let inst = Instance::from_coordinates("line", 2, 90.0, customers, None, 1.0)?.with_name("line");
    println!("home at {:?}", inst.home());

    let ids = |v: &[u32]| v.iter().map(|&i| CustomerId(i)).collect();
    let good = Solution {
        instance: inst.name().into(),
        tours: vec![Tour::new(0, ids(&[1, 2])), Tour::new(1, ids(&[3]))],
    };
    let bad = Solution {
        instance: inst.name().into(),
        tours: vec![Tour::new(0, ids(&[2, 4, 3])), Tour::new(1, ids(&[3]))],
    };
    for (label, sol) in [("good", &good), ("bad", &bad)] {
        let report = check_feasible(sol, &inst);
        println!(
            "{label}: ok = {}, durations = {:?}",
            report.ok,
            sol.day_durations(&inst)?
        );
        for v in &report.violations {
            println!("  {v}");
        }
    }
    Ok(())
}
