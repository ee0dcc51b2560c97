//! Failure sweep on the desk preset: a share of static nodes fails halfway
//! through each run. Prints how coverage and repairs hold up.
//!
//! `cargo run --release --example failure_sweep -- [seeds]`

use holesim::config::Config;
use holesim::protocol::ProtocolKind;
use holesim::results::{run_sweep, SweepSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seeds = std::env::args().nth(1).map_or(Ok(3), |s| s.parse())?;
    let base = Config::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/presets/desk.toml"))?;
    let spec = SweepSpec {
        name: "desk".into(),
        nodes: vec![],
        failures: vec![0.0, 25.0, 50.0, 75.0],
        seeds,
        protocols: vec![ProtocolKind::Proposed, ProtocolKind::Baseline],
    };
    let rows = run_sweep(&base, &spec, 4)?;
    println!("{:<9} {:>5} {:>4}  {:>6} {:>10} {:>9}", "protocol", "fail%", "seed", "holes", "unrecovered", "coverage");
    for r in &rows {
        let m = &r.metrics;
        println!(
            "{:<9} {:>5} {:>4}  {:>6} {:>10} {:>9.3}",
            r.protocol.as_str(),
            r.failure_pct,
            r.seed,
            m.holes_total,
            m.holes_unrecovered,
            m.final_coverage_ratio
        );
    }
    Ok(())
}
