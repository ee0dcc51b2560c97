//! Node-count sweep on the desk preset: mean and spread of each metric per
//! protocol and node count.
//!
//! `cargo run --release --example node_sweep -- [seeds] [jobs]`

use std::collections::BTreeMap;

use holesim::config::Config;
use holesim::protocol::ProtocolKind;
use holesim::results::{run_sweep, SweepSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seeds = args.first().map_or(Ok(5), |s| s.parse())?;
    let jobs = args.get(1).map_or(Ok(4), |s| s.parse())?;
    let base = Config::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/presets/desk.toml"))?;
    let spec = SweepSpec {
        name: "desk".into(),
        nodes: vec![50, 100, 150, 200],
        failures: vec![],
        seeds,
        protocols: vec![ProtocolKind::Proposed, ProtocolKind::Baseline],
    };
    let rows = run_sweep(&base, &spec, jobs)?;

    let mut groups: BTreeMap<(&str, usize), Vec<[f64; 3]>> = BTreeMap::new();
    for r in &rows {
        let m = &r.metrics;
        groups.entry((r.protocol.as_str(), r.n_nodes)).or_default().push([
            m.avg_energy_consumed.unwrap_or(f64::NAN),
            m.load_balance.unwrap_or(f64::NAN),
            m.hole_coverage_lifetime.unwrap_or(0.0),
        ]);
    }
    println!("{:<9} {:>5}  {:>10}  {:>8}  {:>12}", "protocol", "nodes", "energy J", "jain", "lifetime s");
    for ((proto, n), v) in &groups {
        let mean = |k: usize| v.iter().map(|x| x[k]).sum::<f64>() / v.len() as f64;
        println!("{proto:<9} {n:>5}  {:>10.4}  {:>8.4}  {:>12.1}", mean(0), mean(1), mean(2));
    }
    Ok(())
}
