//! How much each model's plan keeps of the WS plan's score when the
//! predicted scores turn out wrong.
//!
//! cargo run --release --example sensitivity

use std::collections::BTreeMap;

use mpop::exact::{solve_exact, DEFAULT_SIZE_LIMIT};
use mpop::kit::{generate_preset, Preset};
use mpop::scoring::{build_model, ModelOptions};
use mpop::sensitivity::{default_coe_levels, scenario_grid, sensitivity_rows};
use mpop::ModelVariant;

fn main() -> mpop::Result<()> {
    let mut sums: BTreeMap<(ModelVariant, u64), (f64, usize)> = BTreeMap::new();
    for k in 0..5 {
        let inst = generate_preset(Preset::Small10, k, 3)?;
        let mut plans = BTreeMap::new();
        for v in ModelVariant::ALL {
            let model = build_model(v, &inst, &ModelOptions::default())?;
            if let Some(sol) = solve_exact(&inst, &model, DEFAULT_SIZE_LIMIT).solution {
                plans.insert(v, sol);
            }
        }
        let grid = scenario_grid(&inst, &default_coe_levels(), 10, k as u64)?;
        for row in sensitivity_rows(&inst, &plans, &grid)? {
            if let Some(r) = row.rws_sim {
                let e = sums
                    .entry((row.model, (row.coe * 10.0).round() as u64))
                    .or_default();
                e.0 += r;
                e.1 += 1;
            }
        }
    }
    print!("{:>5}", "coe");
    for v in ModelVariant::ALL {
        print!("{v:>7}");
    }
    println!();
    for level in [1u64, 4, 7, 10, 13] {
        print!("{:>5.1}", level as f64 / 10.0);
        for v in ModelVariant::ALL {
            let (s, n) = sums.get(&(v, level)).copied().unwrap_or_default();
            print!("{:>7.3}", s / n.max(1) as f64);
        }
        println!();
    }
    Ok(())
}
