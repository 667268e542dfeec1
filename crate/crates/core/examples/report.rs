//! Turn run artifacts into per-run rows, best-of-runs rows and a summary.
//!
//! cargo run --release --example report

use mpop::alns::AlnsConfig;
use mpop::experiment::alns_artifacts;
use mpop::kit::{generate_preset, Preset};
use mpop::report::{build_report, write_report};
use mpop::scoring::ModelOptions;
use mpop::ModelVariant;

fn main() -> mpop::Result<()> {
    let mut arts = Vec::new();
    for k in 0..4 {
        let inst = generate_preset(Preset::Setb, k, 5)?;
        for v in ModelVariant::ALL {
            let (runs, _) = alns_artifacts(
                &inst,
                v,
                &ModelOptions::default(),
                &AlnsConfig::default(),
                3,
                1,
                "example",
            )?;
            arts.extend(runs);
        }
    }
    let report = build_report(&arts)?;
    println!(
        "{} runs, {} best rows, {} of {} instances kept",
        report.raw.len(),
        report.best.len(),
        report.summary.instances_kept,
        report.summary.instances_total
    );
    for row in &report.summary.rows {
        let rws = row.stats.get("rws").copied().flatten();
        let share = row.stats.get("share_realized").copied().flatten();
        println!(
            "{:<12} realized {:.3}  rws {}",
            row.key.join(" "),
            share.map_or(f64::NAN, |s| s.mean),
            rws.map_or("-".to_string(), |s| format!(
                "{:.3} +/- {:.3}",
                s.mean, s.ci95
            ))
        );
    }
    let dir = std::env::temp_dir().join("mpop-report-example");
    write_report(&report, &dir)?;
    println!("CSV and JSON written to {}", dir.display());
    Ok(())
}
