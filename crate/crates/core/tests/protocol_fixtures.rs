mod common;

use holesim::metrics::{jain_index, recovery_time};
use holesim::protocol::{CoverMechanism, NodeKind, TraceEvent};
use holesim::sim::RunOutput;

use common::*;

fn crisis_dispatches(out: &RunOutput) -> usize {
    events(out)
        .filter(|(_, e)| matches!(e, TraceEvent::MobileDispatched { purpose, .. } if purpose.starts_with("crisis")))
        .count()
}

fn crisis_zones(out: &RunOutput) -> usize {
    events(out).filter(|(_, e)| matches!(e, TraceEvent::CrisisZone { .. })).count()
}

#[test]
fn zone_at_exactly_the_threshold_is_not_in_crisis() {
    let out = run_ok(&threshold_fixture(1.0, [3.0; 3]));
    assert_eq!(crisis_zones(&out), 0);
    assert_eq!(crisis_dispatches(&out), 0);
}

#[test]
fn zone_just_below_the_threshold_gets_one_mobile() {
    let out = run_ok(&threshold_fixture(0.999, [3.001, 3.0, 3.0]));
    assert_eq!(crisis_zones(&out), 1);
    assert_eq!(crisis_dispatches(&out), 1);
}

fn hole_events(out: &RunOutput, hole: usize) -> Vec<&TraceEvent> {
    events(out)
        .map(|(_, e)| e)
        .filter(|e| match e {
            TraceEvent::RangeIncrease { hole: h, .. }
            | TraceEvent::HoleCovered { hole: h, .. }
            | TraceEvent::HelpRequest { hole: h, .. } => *h == hole,
            TraceEvent::MobileDispatched { purpose, .. } => *purpose == format!("hole:{hole}"),
            _ => false,
        })
        .collect()
}

#[test]
fn reachable_hole_closes_by_range_increase_alone() {
    let out = run_ok(&ladder_range());
    assert_eq!(covered_by(&out), vec![CoverMechanism::RangeIncrease]);
    assert!(!events(&out).any(|(_, e)| matches!(e, TraceEvent::MobileDispatched { .. })));
    let grown = &out.nodes[0];
    assert!(grown.r_l_current > grown.r_l_base && grown.r_l_current <= grown.r_s);
}

#[test]
fn unreachable_hole_takes_a_mobile_from_the_same_cluster() {
    let out = run_ok(&ladder_cluster());
    let hole = out.holes.iter().find(|h| h.detected_at >= 15.0).expect("hole after the failure");
    assert_eq!(hole.covered_by, CoverMechanism::ClusterMobile);
    let evs = hole_events(&out, hole.hole_id);
    assert!(matches!(evs[0], TraceEvent::MobileDispatched { mobile: 2, level: CoverMechanism::ClusterMobile, .. }));
    assert!(matches!(evs.last(), Some(TraceEvent::HoleCovered { by: CoverMechanism::ClusterMobile, .. })));
}

#[test]
fn neighbor_cluster_lends_a_mobile_without_extending_its_own_nodes() {
    let out = run_ok(&ladder_neighbor());
    let hole = out.holes.iter().find(|h| h.detected_at >= 15.0).expect("hole after the failure");
    assert_eq!(hole.cluster_id, Some(0));
    assert_eq!(hole.covered_by, CoverMechanism::NeighborClusterMobile);
    let evs = hole_events(&out, hole.hole_id);
    // the request goes to the neighbor head first, then its mobile moves
    let help = evs.iter().position(|e| matches!(e, TraceEvent::HelpRequest { to: 2, .. })).unwrap();
    let sent = evs
        .iter()
        .position(|e| {
            matches!(e, TraceEvent::MobileDispatched { mobile: 3, level: CoverMechanism::NeighborClusterMobile, .. })
        })
        .unwrap();
    assert!(help < sent);
    assert!(!evs.iter().any(|e| matches!(e, TraceEvent::RangeIncrease { cluster: Some(1), .. })));
    assert_eq!(out.nodes[3].kind, NodeKind::Mobile);
    assert!(out.nodes[3].flag);
}

fn first_mover(out: &RunOutput) -> usize {
    events(out)
        .find_map(|(_, e)| match e {
            TraceEvent::RangeIncrease { node, .. } => Some(*node),
            _ => None,
        })
        .expect("someone extends")
}

#[test]
fn baseline_richer_node_fires_first_and_the_other_cancels() {
    for strong_first in [true, false] {
        let out = run_ok(&priority_fixture(strong_first));
        let (strong, weak) = if strong_first { (0, 1) } else { (1, 0) };
        assert_eq!(first_mover(&out), strong);
        assert!(events(&out).any(|(_, e)| matches!(e, TraceEvent::TimerCancelled { node, .. } if *node == weak)));
        assert!(!events(&out).any(|(_, e)| matches!(e, TraceEvent::RangeIncrease { node, .. } if *node == weak)));
        assert_eq!(out.nodes[weak].r_l_current, out.nodes[weak].r_l_base);
    }
}

#[test]
fn pure_range_recovery_time_is_the_timer_delay() {
    let out = run_ok(&ladder_range());
    let delay = events(&out)
        .find_map(|(_, e)| match e {
            TraceEvent::TimerSet { delay, .. } => Some(*delay),
            _ => None,
        })
        .unwrap();
    let r = recovery_time(&out.holes).unwrap();
    assert!((r - delay).abs() < 1e-12, "{r} vs {delay}");
}

#[test]
fn jain_identities() {
    assert_eq!(jain_index(&[0.7; 9]), Some(1.0));
    for n in 1..=20 {
        let mut c = vec![0.0; n];
        c[n / 2] = 2.5;
        let j = jain_index(&c).unwrap();
        assert!((j - 1.0 / n as f64).abs() < 1e-15);
    }
}

#[test]
fn failed_node_ledger_is_frozen() {
    let out = run_ok(&ladder_cluster());
    let dead = &out.nodes[1];
    assert!(!dead.is_alive());
    assert!(dead.ledger.residual() > 0.0);
    assert_eq!(dead.died_at, Some(15.0));
}
