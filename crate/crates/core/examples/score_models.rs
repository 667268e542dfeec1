//! The six score models on one instance: weights and mandatory sets.
//!
//! cargo run --example score_models

use mpop::kit::generate_preset;
use mpop::kit::Preset;
use mpop::scoring::{build_model, ModelOptions, WabcMode};
use mpop::ModelVariant;

fn main() -> mpop::Result<()> {
    let inst = generate_preset(Preset::Small10, 0, 1)?;
    println!("{:>4} {:>8} {:>6}", "id", "score", "class");
    for c in inst.customers() {
        let flag = if c.mandatory { " *" } else { "" };
        println!("{:>4} {:>8.1} {:>6}{flag}", c.id, c.score, c.abc_class);
    }

    let mut opts = ModelOptions::default();
    for v in ModelVariant::ALL {
        let m = build_model(v, &inst, &opts)?;
        let w: Vec<String> = m.weights().iter().map(|w| format!("{w:.0}")).collect();
        println!(
            "{v:>5}: mandatory {:?} weights [{}]",
            m.mandatory(),
            w.join(" ")
        );
    }
    opts.wabc = WabcMode::ClassMeans;
    let m = build_model(ModelVariant::Wabc, &inst, &opts)?;
    println!("wABC with class-mean weights: {:?}", m.params());
    Ok(())
}
