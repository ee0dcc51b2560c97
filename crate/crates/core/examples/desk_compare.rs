//! Runs the desk preset with both protocols over a few seeds and prints the
//! metric rows side by side.
//!
//! `cargo run --release --example desk_compare -- [seeds] [nodes] [failure%]`

use holesim::config::Config;
use holesim::protocol::ProtocolKind;
use holesim::results::{csv_string, run_sweep, SweepSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seeds = args.first().map_or(Ok(3), |s| s.parse())?;
    let nodes = args.get(1).map_or(Ok(100), |s| s.parse())?;
    let failures = args.get(2).map_or(Ok(0.0), |s| s.parse())?;
    let base = Config::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/presets/desk.toml"))?;
    let spec = SweepSpec {
        name: "desk".into(),
        nodes: vec![nodes],
        failures: vec![failures],
        seeds,
        protocols: vec![ProtocolKind::Proposed, ProtocolKind::Baseline],
    };
    let rows = run_sweep(&base, &spec, 8)?;
    print!("{}", csv_string(&rows));
    Ok(())
}
