//! Exact and 2MLS side by side on a few size-10 instances.
//!
//! cargo run --release --example model_comparison

use mpop::alns::AlnsConfig;
use mpop::experiment::{alns_artifacts, comparison, exact_artifact};
use mpop::kit::{generate_preset, Preset};
use mpop::scoring::ModelOptions;
use mpop::ModelVariant;

fn main() -> mpop::Result<()> {
    let opts = ModelOptions::default();
    let mut arts = Vec::new();
    for k in 0..5 {
        let inst = generate_preset(Preset::Small10, k, 21)?;
        for v in ModelVariant::ALL {
            arts.push(exact_artifact(&inst, v, &opts, 12, "example")?);
            let (runs, _) = alns_artifacts(
                &inst,
                v,
                &opts,
                &AlnsConfig::default(),
                10,
                k as u64,
                "example",
            )?;
            arts.extend(runs);
        }
    }
    let rows = comparison(&arts);
    let matched = rows.iter().filter(|r| r.matched).count();
    for r in rows.iter().filter(|r| !r.matched) {
        println!(
            "{} {}: exact {:.1}, 2MLS {:?}",
            r.instance, r.model, r.exact_objective, r.alns_objective
        );
    }
    println!(
        "2MLS found the optimum on {matched} of {} pairs",
        rows.len()
    );
    Ok(())
}
