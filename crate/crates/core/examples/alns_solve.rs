//! 2MLS on a large instance: best of several seeded runs.
//!
//! cargo run --release --example alns_solve

use mpop::alns::{best_of_runs, AlnsConfig};
use mpop::kit::{synthesize, GenConfig};
use mpop::scoring::{build_model, ModelOptions};
use mpop::ModelVariant;

fn main() -> mpop::Result<()> {
    let inst = synthesize(&GenConfig::setn_like(150), 5)?;
    let model = build_model(ModelVariant::Mws, &inst, &ModelOptions::default())?;
    let cfg = AlnsConfig {
        stagnation: 200,
        ..AlnsConfig::default()
    };
    let (best, runs) = best_of_runs(&inst, &model, &cfg, 4, 99);
    for (r, o) in runs.iter().enumerate() {
        println!(
            "run {r}: {:?} objective {:.1} travel {:.1}, {} iterations ({:?}), {} ms",
            o.status,
            o.objective,
            o.total_travel,
            o.stats.iterations,
            o.stats.stopped_by,
            o.stats.wall_ms
        );
    }
    let b = &runs[best];
    println!(
        "best run {best}: {} of {} customers visited",
        b.solution.visit_count(),
        inst.len()
    );
    for (s, st) in &b.stats.removal {
        println!("  {s:<13} used {:>4}x weight {:.2}", st.uses, st.weight);
    }
    Ok(())
}
