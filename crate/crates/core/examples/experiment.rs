//! A complete study from a TOML config: instances, both solvers, the
//! sensitivity grid, report and comparison table. A second call resumes and
//! finds nothing left to do.
//!
//! cargo run --release --example experiment

use mpop::experiment::{run_experiment, ExperimentConfig};

const CONFIG: &str = r#"
name = "demo"
seed = 1
models = ["ns", "sabc", "ws", "mws"]
solvers = ["exact", "2mls"]
runs = 5

[[instances.presets]]
preset = "small10"
count = 6

[sensitivity]
enabled = true
scenarios_per_level = 5
"#;

fn main() -> mpop::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(CONFIG)?;
    let out = std::env::temp_dir().join("mpop-experiment-example");
    let first = run_experiment(&cfg, None, Some(&out))?;
    println!("first pass: {first:?}");
    let second = run_experiment(&cfg, None, Some(&out))?;
    println!(
        "second pass: {} run, {} skipped",
        second.units_run, second.units_skipped
    );
    println!(
        "{}",
        std::fs::read_to_string(out.join("comparison.csv")).unwrap_or_default()
    );
    Ok(())
}
