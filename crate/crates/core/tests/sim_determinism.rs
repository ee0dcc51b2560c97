mod common;

use holesim::protocol::ProtocolKind;
use holesim::results::{csv_string, run_config, run_sweep, SweepSpec};
use holesim::sim::{run, stream_rng, EventQueue, Stream};
use rand::Rng;

use common::preset;

fn small() -> holesim::config::Config {
    let mut c = preset("desk");
    c.sim.duration_s = Some(200.0);
    c.nodes.count = Some(60);
    c
}

#[test]
fn same_seed_same_everything() {
    let mut s = small().to_scenario().unwrap();
    s.trace = true;
    let (a, b) = (run(&s).unwrap(), run(&s).unwrap());
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.coverage_series, b.coverage_series);
    assert_eq!(a.stats, b.stats);
    let (ra, _) = run_config(&small(), "x").unwrap();
    let (rb, _) = run_config(&small(), "x").unwrap();
    assert_eq!(csv_string(&[ra]), csv_string(&[rb]));
}

#[test]
fn different_seeds_differ() {
    let mut c = small();
    let a = c.to_scenario().unwrap();
    c.sim.seed = Some(2);
    let b = c.to_scenario().unwrap();
    assert_ne!(a.nodes, b.nodes);
}

#[test]
fn failures_do_not_perturb_placement() {
    let mut c = small();
    let plain = c.to_scenario().unwrap();
    c.failures.percent = 50.0;
    let failing = c.to_scenario().unwrap();
    assert_eq!(plain.nodes, failing.nodes);
}

#[test]
fn streams_are_independent() {
    let draw = |stream| {
        let mut r = stream_rng(9, stream);
        (0..4).map(|_| r.random::<u64>()).collect::<Vec<_>>()
    };
    assert_ne!(draw(Stream::Placement), draw(Stream::Failures));
    assert_ne!(draw(Stream::Placement), draw(Stream::Mobility));
}

#[test]
fn sweep_output_ignores_thread_count() {
    let spec = SweepSpec {
        name: "t".into(),
        nodes: vec![40, 60],
        failures: vec![],
        seeds: 2,
        protocols: vec![ProtocolKind::Proposed, ProtocolKind::Baseline],
    };
    let one = run_sweep(&small(), &spec, 1).unwrap();
    let four = run_sweep(&small(), &spec, 4).unwrap();
    assert_eq!(csv_string(&one), csv_string(&four));
    assert_eq!(one.len(), 8);
}

#[test]
fn queue_orders_simultaneous_events_by_insertion() {
    let mut q = EventQueue::new();
    q.schedule(1.0, 'b').unwrap();
    q.schedule(1.0, 'c').unwrap();
    q.schedule(0.5, 'a').unwrap();
    let order: Vec<char> = std::iter::from_fn(|| q.pop().map(|(_, _, e)| e)).collect();
    assert_eq!(order, vec!['a', 'b', 'c']);
}

#[test]
fn coverage_series_is_within_unit_interval() {
    let out = run(&small().to_scenario().unwrap()).unwrap();
    assert!(out.coverage_series.iter().all(|&(_, p)| (0.0..=1.0).contains(&p)));
    assert!(out.coverage_series.windows(2).all(|w| w[0].0 <= w[1].0));
}
