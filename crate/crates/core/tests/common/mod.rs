//! Constructed scenarios shared by the integration tests and the acceptance
//! harness.

#![allow(dead_code)]

use rand::Rng;

use holesim::energy::RadioModel;
use holesim::geometry::{distance, CellSet, GridSpec, Point};
use holesim::protocol::{CoverMechanism, NodeKind, ProtocolKind, ProtocolParams, TraceEvent, TraceRecord};
use holesim::sim::{run, NodeSpec, RunOutput, Scenario};

pub const INITIAL: f64 = 4.0;

pub fn node(kind: NodeKind, x: f64, y: f64, r_l: f64, r_s: f64) -> NodeSpec {
    NodeSpec::new(kind, Point::new(x, y), INITIAL, r_l, r_s)
}

pub fn spent(mut n: NodeSpec, spent: f64) -> NodeSpec {
    n.spent = spent;
    n
}

/// Radio and idle costs switched off so residual energy only moves when a
/// fixture says so.
pub fn free_scenario(kind: ProtocolKind, grid: GridSpec, nodes: Vec<NodeSpec>, duration: f64) -> Scenario {
    let mut p = ProtocolParams::new(kind, Point::new(grid.width / 2.0, grid.height / 2.0));
    p.power.idle_w = 0.0;
    p.power.sleep_w = 0.0;
    let mut s = Scenario::new(grid, RadioModel::simple(0.0, 0.0, 0.0), p, nodes, duration);
    s.trace = true;
    s
}

/// Default radio with prevention disabled, for the repair ladder.
pub fn ladder_scenario(grid: GridSpec, nodes: Vec<NodeSpec>, duration: f64) -> Scenario {
    let mut p = ProtocolParams::new(ProtocolKind::Proposed, Point::new(grid.width / 2.0, grid.height / 2.0));
    p.crisis_threshold = 0.0;
    let mut s = Scenario::new(grid, RadioModel::physical(), p, nodes, duration);
    s.trace = true;
    s
}

pub fn events(out: &RunOutput) -> impl Iterator<Item = (f64, &TraceEvent)> {
    out.trace.iter().map(|TraceRecord { t, event }| (*t, event))
}

/// One cluster of four 50 m zones. Zone 0 holds `zone0` residual energy, the
/// other three hold `others`; two sleeping mobiles wait in zone 3.
pub fn threshold_fixture(zone0: f64, others: [f64; 3]) -> Scenario {
    let grid = GridSpec::new(100.0, 100.0, 10.0, 100.0).unwrap();
    let at = [(25.0, 25.0), (75.0, 25.0), (25.0, 75.0), (75.0, 75.0)];
    let residuals = [zone0, others[0], others[1], others[2]];
    let mut nodes: Vec<NodeSpec> = at
        .iter()
        .zip(residuals)
        .map(|(&(x, y), r)| spent(node(NodeKind::Static, x, y, 20.0, 20.0), INITIAL - r))
        .collect();
    nodes.push(node(NodeKind::Mobile, 90.0, 90.0, 20.0, 20.0));
    nodes.push(node(NodeKind::Mobile, 95.0, 95.0, 20.0, 20.0));
    free_scenario(ProtocolKind::Proposed, grid, nodes, 5.0)
}

/// (a) A lone static node whose annulus is a hole it can reach by itself.
/// A sleeping mobile is available but must not be needed.
pub fn ladder_range() -> Scenario {
    let grid = GridSpec::new(100.0, 100.0, 10.0, 100.0).unwrap();
    let nodes = vec![node(NodeKind::Static, 50.0, 50.0, 20.0, 30.0), node(NodeKind::Mobile, 90.0, 90.0, 20.0, 20.0)];
    ladder_scenario(grid, nodes, 30.0)
}

/// (b) Node 1 fails; node 0 cannot reach its area, the cluster's only
/// mobile sits out of node 0's radio range.
pub fn ladder_cluster() -> Scenario {
    let grid = GridSpec::new(100.0, 100.0, 10.0, 100.0).unwrap();
    let nodes = vec![
        node(NodeKind::Static, 20.0, 50.0, 20.0, 20.0),
        node(NodeKind::Static, 60.0, 50.0, 20.0, 20.0),
        node(NodeKind::Mobile, 95.0, 95.0, 20.0, 20.0),
    ];
    let mut s = ladder_scenario(grid, nodes, 60.0);
    s.scripted_kills = vec![(15.0, vec![1])];
    s
}

/// (c) As (b) but the only mobile belongs to the right-hand cluster, whose
/// static node 2 could reach part of the hole.
pub fn ladder_neighbor() -> Scenario {
    let grid = GridSpec::new(200.0, 100.0, 10.0, 100.0).unwrap();
    let nodes = vec![
        node(NodeKind::Static, 20.0, 50.0, 20.0, 20.0),
        node(NodeKind::Static, 60.0, 50.0, 20.0, 20.0),
        node(NodeKind::Static, 120.0, 50.0, 20.0, 60.0),
        node(NodeKind::Mobile, 180.0, 90.0, 20.0, 20.0),
    ];
    let mut s = ladder_scenario(grid, nodes, 80.0);
    s.scripted_kills = vec![(15.0, vec![1])];
    s
}

/// Baseline fixture: two nearly co-located detectors with residuals of 75%
/// and 25% of initial. The stronger one's maximum range spans the whole hole.
pub fn priority_fixture(strong_first: bool) -> Scenario {
    let grid = GridSpec::new(100.0, 100.0, 10.0, 100.0).unwrap();
    let strong = spent(node(NodeKind::Static, 50.0, 50.0, 10.0, 40.0), 0.25 * INITIAL);
    let weak = spent(node(NodeKind::Static, 52.0, 50.0, 10.0, 30.0), 0.75 * INITIAL);
    let nodes = if strong_first { vec![strong, weak] } else { vec![weak, strong] };
    let mut s = ladder_scenario(grid, nodes, 30.0);
    s.protocol.kind = ProtocolKind::Baseline;
    s
}

pub fn covered_by(out: &RunOutput) -> Vec<CoverMechanism> {
    out.holes.iter().map(|h| h.covered_by).collect()
}

pub fn run_ok(s: &Scenario) -> RunOutput {
    run(s).expect("fixture runs")
}

/// Cells whose centers lie within `r`, by scanning the whole grid.
pub fn brute_disk(grid: &GridSpec, pos: Point, r: f64) -> CellSet {
    grid.cells().filter(|&c| distance(pos, grid.cell_center(c)) <= r).collect()
}

/// Detection result for node `id` computed from scratch: cells within `r_s`
/// but outside `r_l`, minus every cell inside the disk of an active node
/// whose broadcast (range `2 r_s` of the sender) reaches `id`.
pub fn brute_q_hat(grid: &GridSpec, nodes: &[NodeSpec], id: usize) -> CellSet {
    let me = &nodes[id];
    grid.cells()
        .filter(|&c| {
            let d = distance(me.pos, grid.cell_center(c));
            d <= me.r_s && d > me.r_l
        })
        .filter(|&c| {
            !nodes.iter().enumerate().any(|(j, n)| {
                j != id && distance(n.pos, me.pos) <= 2.0 * n.r_s && distance(n.pos, grid.cell_center(c)) <= n.r_l
            })
        })
        .collect()
}

/// Random detection instance: at most 50 x 50 cells, radii up to five cells.
pub fn random_detect_instance<R: Rng>(rng: &mut R) -> (GridSpec, Vec<NodeSpec>) {
    let side = rng.random_range(1..=10) as f64;
    let cols = rng.random_range(1..=50) as f64;
    let rows = rng.random_range(1..=50) as f64;
    let grid = GridSpec::new(cols * side, rows * side, side, side).unwrap();
    let n = rng.random_range(1..=8);
    let nodes = (0..n)
        .map(|_| {
            let pos = Point::new(rng.random_range(0.0..=grid.width), rng.random_range(0.0..=grid.height));
            let r_s = rng.random_range(0.0..=5.0 * side).max(1e-3);
            let r_l = rng.random_range(0.0..=r_s).max(1e-4);
            NodeSpec::new(NodeKind::Static, pos, INITIAL, r_l, r_s)
        })
        .collect();
    (grid, nodes)
}

/// `phase_detect` for every node of the instance, after one update phase.
pub fn detect_via_network(grid: GridSpec, nodes: &[NodeSpec]) -> Vec<CellSet> {
    let s = ladder_scenario(grid, nodes.to_vec(), 1.0);
    let mut net = s.build_network();
    net.phase_update();
    (0..nodes.len()).map(|id| net.phase_detect(id)).collect()
}

pub fn preset(name: &str) -> holesim::config::Config {
    holesim::config::Config::from_path(format!("{}/presets/{name}.toml", env!("CARGO_MANIFEST_DIR")))
        .expect("preset parses")
}
