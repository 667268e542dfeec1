//! Optimal plans for a small instance, and the same model as an LP file.
//!
//! cargo run --release --example exact_oracle

use mpop::exact::{export_lp, solve_exact, DEFAULT_SIZE_LIMIT};
use mpop::kit::{generate_preset, Preset};
use mpop::scoring::{build_model, ModelOptions};
use mpop::ModelVariant;

fn main() -> mpop::Result<()> {
    let inst = generate_preset(Preset::Small10, 3, 7)?;
    for v in ModelVariant::ALL {
        let model = build_model(v, &inst, &ModelOptions::default())?;
        let r = solve_exact(&inst, &model, DEFAULT_SIZE_LIMIT);
        let tours: Vec<String> = r
            .solution
            .iter()
            .flat_map(|s| &s.tours)
            .map(|t| format!("{:?}", t.visits.iter().map(|c| c.0).collect::<Vec<_>>()))
            .collect();
        println!(
            "{v:>5} {:?} objective {:>9.1} travel {:>6.1} {}",
            r.status,
            r.objective,
            r.total_travel,
            tours.join(" | ")
        );
    }

    let lp = export_lp(
        &inst,
        &build_model(ModelVariant::Mws, &inst, &ModelOptions::default())?,
    );
    println!("LP export: {} lines, first rows:", lp.lines().count());
    for line in lp.lines().take(6) {
        println!("  {line}");
    }

    let big = generate_preset(Preset::Setb, 0, 7)?;
    let r = solve_exact(
        &big,
        &build_model(ModelVariant::Ws, &big, &ModelOptions::default())?,
        DEFAULT_SIZE_LIMIT,
    );
    println!("{} customers: {:?}", big.len(), r.status);
    Ok(())
}
