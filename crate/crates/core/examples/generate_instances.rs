//! Synthetic instances: presets, explicit parameters and derived variants.
//!
//! cargo run --example generate_instances

use mpop::kit::{
    classify_instance, generate_preset, rescore_uniform, select_mandatory, subsample_small,
    synthesize, GenConfig, Preset,
};

fn main() -> mpop::Result<()> {
    for p in Preset::ALL {
        let inst = generate_preset(p, 0, 42)?;
        println!(
            "{:<12} {:>3} customers, {} days, {} mandatory, mean score {:.1}",
            inst.name(),
            inst.len(),
            inst.horizon_days(),
            inst.mandatory_ids().len(),
            inst.mean_score().unwrap_or(0.0)
        );
    }

    let big = synthesize(&GenConfig::setb_like(40), 3)?;
    let (classified, abc) = classify_instance(&big, 3);
    println!(
        "ABC centroids {:.1?}, degenerate: {}",
        abc.centroids, abc.degenerate
    );
    println!("top 3 by score: {:?}", select_mandatory(&classified, 3));

    let small = subsample_small(&classified, 10, 2, 2, 9)?;
    println!(
        "sample {} keeps {} of {} customers",
        small.name(),
        small.len(),
        big.len()
    );
    let uniform = rescore_uniform(&small, 1.0, 1000.0, 9)?;
    println!(
        "rescored total {:.1} (was {:.1})",
        uniform.total_score(),
        small.total_score()
    );
    println!("{}", &uniform.to_json_string()[..200]);
    Ok(())
}
