//! Hole prevention, detection and repair.
//!
//! Two protocols share the same node model, geometry and radio accounting:
//!
//! * [`ProtocolKind::Proposed`]: clustered network with per-round head
//!   election, energy-share crisis zones, annulus-based hole detection, timer
//!   driven range increase and an escalation ladder of sleeping mobile nodes
//!   (local, cluster, neighbor clusters), plus periodic sink pre-positioning.
//! * [`ProtocolKind::Baseline`]: static nodes only; neighbors detect holes the
//!   same way and compete to extend their sensing range, the node with the most
//!   residual energy going first.
//!
//! All state lives in [`Network`], driven event by event from the simulation
//! engine.

mod holes;
mod network;
mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::EnergyLedger;
use crate::geometry::{distance, CellSet, CoverageSets, Point};

pub use holes::detect_q_hat;
pub use network::{Action, Dispatch, MessageSizes, MessageStats, Network, PowerParams, ProtocolParams, Scheduled};
pub use trace::{TraceEvent, TraceRecord};

pub type NodeId = usize;
pub type ClusterId = usize;
pub type HoleId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("no free mobile node available")]
    NoMobileAvailable,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Baseline,
    #[default]
    Proposed,
}

impl ProtocolKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolKind::Baseline => "baseline",
            ProtocolKind::Proposed => "proposed",
        }
    }
}

impl std::str::FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proposed" => Ok(ProtocolKind::Proposed),
            "baseline" => Ok(ProtocolKind::Baseline),
            other => Err(format!("unknown protocol `{other}` (expected proposed or baseline)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Static,
    Mobile,
}

/// How a mobile is chosen among free candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    Nearest,
    Farthest,
}

/// Last neighbor broadcast seen from another node.
#[derive(Debug, Clone)]
pub struct NeighborEntry {
    pub pos: Point,
    pub q_l: std::sync::Arc<CellSet>,
}

pub type NeighborTable = std::collections::BTreeMap<NodeId, NeighborEntry>;

#[derive(Debug, Clone)]
pub struct SensorNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub pos: Point,
    pub ledger: EnergyLedger,
    pub r_l_base: f64,
    pub r_l_current: f64,
    pub r_s: f64,
    pub r_c: f64,
    pub asleep: bool,
    pub cluster_id: Option<ClusterId>,
    /// Set once a mobile has been dispatched; it is never selected again.
    pub flag: bool,
    pub coverage: CoverageSets,
    pub neighbors: NeighborTable,
    /// Table from the previous update round, used to notice vanished neighbors.
    pub previous_neighbors: NeighborTable,
    pub died_at: Option<f64>,
    pub(crate) q_l_shared: std::sync::Arc<CellSet>,
    /// Contributes its disk to the coverage map.
    pub(crate) active: bool,
    pub(crate) last_accrual: f64,
}

impl SensorNode {
    pub fn new(id: NodeId, kind: NodeKind, pos: Point, initial_energy: f64, r_l: f64, r_s: f64) -> Self {
        Self {
            id,
            kind,
            pos,
            ledger: EnergyLedger::new(initial_energy),
            r_l_base: r_l,
            r_l_current: r_l,
            r_s,
            r_c: 2.0 * r_s,
            asleep: kind == NodeKind::Mobile,
            cluster_id: None,
            flag: false,
            coverage: CoverageSets::default(),
            neighbors: NeighborTable::new(),
            previous_neighbors: NeighborTable::new(),
            died_at: None,
            q_l_shared: Default::default(),
            active: false,
            last_accrual: 0.0,
        }
    }

    pub fn is_alive(&self) -> bool {
        self.ledger.is_alive()
    }

    /// Alive and awake: senses, broadcasts and counts toward coverage.
    pub fn is_active(&self) -> bool {
        self.active
    }

    pub fn is_free_mobile(&self) -> bool {
        self.kind == NodeKind::Mobile && self.asleep && !self.flag && self.is_alive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn center(&self) -> Point {
        Point::new((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }
}

#[derive(Debug, Clone)]
pub struct Cluster {
    pub id: ClusterId,
    pub bounds: Rect,
    pub head_id: Option<NodeId>,
    pub member_ids: Vec<NodeId>,
    /// Detection events since the last sink report.
    pub event_counter: u64,
    pub zones_per_side: u32,
    pub crisis_zones: std::collections::BTreeSet<usize>,
    pub(crate) data_pending: bool,
    pub(crate) crisis_in_flight: std::collections::BTreeSet<usize>,
}

impl Cluster {
    pub fn zone_count(&self) -> usize {
        (self.zones_per_side * self.zones_per_side) as usize
    }

    pub fn zone_of(&self, p: Point) -> usize {
        let n = self.zones_per_side as f64;
        let w = (self.bounds.x1 - self.bounds.x0) / n;
        let h = (self.bounds.y1 - self.bounds.y0) / n;
        let zx = (((p.x - self.bounds.x0) / w).floor().max(0.0) as u32).min(self.zones_per_side - 1);
        let zy = (((p.y - self.bounds.y0) / h).floor().max(0.0) as u32).min(self.zones_per_side - 1);
        (zy * self.zones_per_side + zx) as usize
    }

    pub fn zone_centroid(&self, zone: usize) -> Point {
        let n = self.zones_per_side as usize;
        let (zx, zy) = ((zone % n) as f64, (zone / n) as f64);
        let w = (self.bounds.x1 - self.bounds.x0) / n as f64;
        let h = (self.bounds.y1 - self.bounds.y0) / n as f64;
        Point::new(self.bounds.x0 + (zx + 0.5) * w, self.bounds.y0 + (zy + 0.5) * h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MessageKind {
    Hello,
    HeadAnnounce,
    QlBroadcast,
    EnergyReport,
    CrisisAlert,
    HoleDetected,
    HelpRequest,
    MobileDispatch,
    SinkReport,
    DataPacket,
}

/// Which rung of the repair ladder closed a hole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CoverMechanism {
    RangeIncrease,
    LocalMobile,
    ClusterMobile,
    NeighborClusterMobile,
    Unrecovered,
}

#[derive(Debug, Clone, Serialize)]
pub struct HoleRecord {
    pub hole_id: HoleId,
    pub detecting_node: NodeId,
    pub cluster_id: Option<ClusterId>,
    pub cells: CellSet,
    pub detected_at: f64,
    pub covered_at: Option<f64>,
    pub covered_by: CoverMechanism,
    /// When a covered hole lost coverage again; closes its lifetime window.
    pub uncovered_at: Option<f64>,
    pub responders: Vec<NodeId>,
    #[serde(skip)]
    pub(crate) pending: std::collections::BTreeSet<NodeId>,
    #[serde(skip)]
    pub(crate) raised: std::collections::BTreeSet<NodeId>,
    #[serde(skip)]
    pub(crate) mobiles_in_flight: usize,
    #[serde(skip)]
    pub(crate) escalator: Option<NodeId>,
}

impl HoleRecord {
    pub fn is_open(&self) -> bool {
        self.covered_at.is_none()
    }

    pub fn recovery_time(&self) -> Option<f64> {
        self.covered_at.map(|c| c - self.detected_at)
    }
}

/// Delay before a node reacts to a hole it detected: larger holes react sooner.
pub fn coverage_timer(t_base: f64, q_hat_len: usize) -> f64 {
    t_base / (1.0 + q_hat_len as f64)
}

/// Baseline priority: more residual energy means a shorter wait.
pub fn baseline_delay(t_base: f64, residual: f64, initial: f64) -> f64 {
    if initial <= 0.0 {
        return t_base;
    }
    t_base * (1.0 - (residual / initial).clamp(0.0, 1.0))
}

/// A mobile eligible for dispatch: id, position and whether it is already in use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobileCandidate {
    pub id: NodeId,
    pub pos: Point,
    pub flag: bool,
}

/// Picks the free candidate closest to (or, with [`SelectionRule::Farthest`],
/// farthest from) `target`; ties go to the lowest id.
pub fn select_mobile(
    candidates: &[MobileCandidate],
    target: Point,
    rule: SelectionRule,
) -> Result<NodeId, ProtocolError> {
    let mut best: Option<(f64, NodeId)> = None;
    for c in candidates.iter().filter(|c| !c.flag) {
        let d = distance(c.pos, target);
        let better = match best {
            None => true,
            Some((bd, bid)) => match rule {
                SelectionRule::Nearest => d < bd || (d == bd && c.id < bid),
                SelectionRule::Farthest => d > bd || (d == bd && c.id < bid),
            },
        };
        if better {
            best = Some((d, c.id));
        }
    }
    best.map(|(_, id)| id).ok_or(ProtocolError::NoMobileAvailable)
}

/// Head choice for one cluster: the static member with the most residual
/// energy, lowest id on ties.
pub fn pick_head<'a>(members: impl IntoIterator<Item = &'a SensorNode>) -> Option<NodeId> {
    let mut best: Option<(f64, NodeId)> = None;
    for n in members {
        if n.kind != NodeKind::Static || !n.is_alive() {
            continue;
        }
        let r = n.ledger.residual();
        let better = match best {
            None => true,
            Some((br, bid)) => r > br || (r == br && n.id < bid),
        };
        if better {
            best = Some((r, n.id));
        }
    }
    best.map(|(_, id)| id)
}
