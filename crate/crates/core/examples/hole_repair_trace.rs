//! The repair ladder on a hand-built network. A node fails, its neighbor
//! cannot reach the gap, the cluster has no spare mobile, so the head of the
//! next cluster lends one. The event trace shows each step.
//!
//! `cargo run --example hole_repair_trace`

use holesim::energy::RadioModel;
use holesim::geometry::{GridSpec, Point};
use holesim::protocol::{NodeKind, ProtocolKind, ProtocolParams, TraceEvent};
use holesim::sim::{run, NodeSpec, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = GridSpec::new(200.0, 100.0, 10.0, 100.0)?;
    let at = |kind, x, y, r_s| NodeSpec::new(kind, Point::new(x, y), 4.0, 20.0, r_s);
    let nodes = vec![
        at(NodeKind::Static, 20.0, 50.0, 20.0),
        at(NodeKind::Static, 60.0, 50.0, 20.0),
        at(NodeKind::Static, 120.0, 50.0, 60.0),
        at(NodeKind::Mobile, 180.0, 90.0, 20.0),
    ];
    let mut params = ProtocolParams::new(ProtocolKind::Proposed, Point::new(100.0, 50.0));
    // keep the energy-share prevention phase quiet in this tiny network
    params.crisis_threshold = 0.0;
    let mut scenario = Scenario::new(grid, RadioModel::physical(), params, nodes, 80.0);
    scenario.scripted_kills = vec![(15.0, vec![1])];
    scenario.trace = true;

    let out = run(&scenario)?;
    for rec in &out.trace {
        if matches!(rec.event, TraceEvent::RoundStart { .. } | TraceEvent::HeadElected { .. }) {
            continue;
        }
        println!("{:>8.3}  {}", rec.t, serde_json::to_string(&rec.event)?);
    }
    for h in &out.holes {
        println!(
            "hole {} in cluster {:?}: {} cells, closed by {:?} after {:?} s",
            h.hole_id,
            h.cluster_id,
            h.cells.len(),
            h.covered_by,
            h.recovery_time()
        );
    }
    Ok(())
}
