//! Runs a small node sweep and writes one SVG chart per metric next to the
//! CSV, the same files `holesim sweep` and `holesim plot` produce.
//!
//! `cargo run --release --example plot_sweep -- [out_dir]`

use std::path::PathBuf;

use holesim::config::Config;
use holesim::plot::{render_svg, XAxis};
use holesim::protocol::ProtocolKind;
use holesim::results::{csv_string, run_sweep, SweepSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "plots".into()));
    std::fs::create_dir_all(&dir)?;
    let mut base = Config::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/presets/desk.toml"))?;
    base.sim.duration_s = Some(400.0);
    let spec = SweepSpec {
        name: "desk".into(),
        nodes: vec![50, 100, 150],
        failures: vec![],
        seeds: 3,
        protocols: vec![ProtocolKind::Proposed, ProtocolKind::Baseline],
    };
    let csv = csv_string(&run_sweep(&base, &spec, 4)?);
    std::fs::write(dir.join("sweep.csv"), &csv)?;
    for metric in ["avg_energy_j", "load_balance", "hole_cov_lifetime_s"] {
        let path = dir.join(format!("{metric}.svg"));
        std::fs::write(&path, render_svg(&csv, metric, XAxis::Nodes)?)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
