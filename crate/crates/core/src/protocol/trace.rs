use serde::Serialize;

use super::{ClusterId, CoverMechanism, HoleId, NodeId};
use crate::geometry::Point;

/// One line of the JSON-lines event log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t: f64,
    #[serde(flatten)]
    pub event: TraceEvent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event")]
pub enum TraceEvent {
    RoundStart { round: u64 },
    HeadElected { cluster: ClusterId, head: NodeId },
    Headless { cluster: ClusterId },
    CrisisZone { cluster: ClusterId, zone: usize, ratio: f64 },
    HoleDetected { hole: HoleId, cluster: Option<ClusterId>, detector: NodeId, cells: usize, responders: Vec<NodeId> },
    TimerSet { hole: HoleId, node: NodeId, delay: f64 },
    TimerCancelled { hole: HoleId, node: NodeId },
    RangeIncrease { hole: HoleId, node: NodeId, cluster: Option<ClusterId>, from: f64, to: f64 },
    RangeDecrease { node: NodeId, from: f64, to: f64 },
    HelpRequest { hole: HoleId, from: NodeId, to: NodeId },
    MobileDispatched { mobile: NodeId, purpose: String, level: CoverMechanism, target: Point, eta: f64 },
    MobileArrived { mobile: NodeId, cluster: Option<ClusterId> },
    HoleCovered { hole: HoleId, by: CoverMechanism, recovery: f64 },
    HoleStalled { hole: HoleId },
    HoleReopened { hole: HoleId },
    GlobalUpdate { counters: Vec<u64> },
    NodeDied { node: NodeId, cause: &'static str },
    FailureInjected { percent: f64, killed: Vec<NodeId> },
    SimEnd,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Trace {
    pub enabled: bool,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn push(&mut self, t: f64, event: impl FnOnce() -> TraceEvent) {
        if self.enabled {
            self.records.push(TraceRecord { t, event: event() });
        }
    }
}
