use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::trace::{Trace, TraceEvent, TraceRecord};
use super::{
    pick_head, Cluster, ClusterId, CoverMechanism, HoleId, HoleRecord, MessageKind, NeighborEntry, NodeId, NodeKind,
    ProtocolKind, Rect, SelectionRule, SensorNode,
};
use crate::energy::{zone_energy_ratio, Category, RadioModel};
use crate::geometry::{distance, Cell, CellSet, CoverageSets, GridSpec, Point};

/// Control and data message sizes, in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MessageSizes {
    pub control_bytes: f64,
    pub ql_base_bytes: f64,
    pub ql_per_cell_bytes: f64,
    pub sink_report_bytes: f64,
    pub data_bytes: f64,
}

impl Default for MessageSizes {
    fn default() -> Self {
        Self {
            control_bytes: 64.0,
            ql_base_bytes: 64.0,
            ql_per_cell_bytes: 2.0,
            sink_report_bytes: 128.0,
            data_bytes: 512.0,
        }
    }
}

/// Energy drawn outside the radio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerParams {
    pub idle_w: f64,
    pub sleep_w: f64,
    pub sense_j_per_event: f64,
    /// Continuous sensing power per square meter of sensing disk, so that a
    /// wider range drains the node faster.
    pub sense_w_per_m2: f64,
    pub move_j_per_m: f64,
}

impl Default for PowerParams {
    fn default() -> Self {
        Self { idle_w: 1e-4, sleep_w: 1e-5, sense_j_per_event: 0.0, sense_w_per_m2: 0.0, move_j_per_m: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub kind: ProtocolKind,
    pub t_base: f64,
    pub crisis_threshold: f64,
    pub zones_per_side: u32,
    pub selection: SelectionRule,
    pub mobile_speed: f64,
    pub sink: Point,
    pub messages: MessageSizes,
    pub power: PowerParams,
}

impl ProtocolParams {
    pub fn new(kind: ProtocolKind, sink: Point) -> Self {
        Self {
            kind,
            t_base: 1.0,
            crisis_threshold: 0.1,
            zones_per_side: 2,
            selection: SelectionRule::Nearest,
            mobile_speed: 5.0,
            sink,
            messages: MessageSizes::default(),
            power: PowerParams::default(),
        }
    }
}

/// Why a mobile is travelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dispatch {
    Hole { hole: HoleId, level: CoverMechanism },
    Crisis { cluster: ClusterId, zone: usize },
    Preposition { cluster: ClusterId },
}

impl Dispatch {
    pub(crate) fn label(&self) -> String {
        match self {
            Dispatch::Hole { hole, .. } => format!("hole:{hole}"),
            Dispatch::Crisis { cluster, zone } => format!("crisis:{cluster}:{zone}"),
            Dispatch::Preposition { cluster } => format!("sink:{cluster}"),
        }
    }
}

/// Work the protocol asks the engine to run later.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    CoverTimer { node: NodeId, hole: HoleId },
    MobileArrival { mobile: NodeId, target: Point, purpose: Dispatch },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scheduled {
    pub at: f64,
    pub action: Action,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MessageStats {
    pub messages: u64,
    pub receptions: u64,
    /// Receive energy implied by every delivery, before any death capping.
    pub rx_energy_expected: f64,
    pub detections: u64,
    pub data_packets: u64,
    pub mobile_dispatches: u64,
}

/// All protocol state of one simulated network.
pub struct Network {
    pub grid: GridSpec,
    pub radio: RadioModel,
    pub params: ProtocolParams,
    pub nodes: Vec<SensorNode>,
    pub clusters: Vec<Cluster>,
    pub holes: Vec<HoleRecord>,
    pub stats: MessageStats,
    pub coverage_series: Vec<(f64, f64)>,
    pub first_static_death: Option<f64>,
    pub(crate) now: f64,
    pub(crate) trace: Trace,
    /// Active disks covering each cell, indexed by `GridSpec::index`.
    coverage: Vec<u32>,
    /// Scratch marks for detection, one slot per cell.
    pub(crate) marks: Vec<u32>,
    pub(crate) mark_epoch: u32,
    outbox: Vec<Scheduled>,
    dying: Vec<NodeId>,
}

impl Network {
    pub fn new(grid: GridSpec, radio: RadioModel, params: ProtocolParams, nodes: Vec<SensorNode>, trace: bool) -> Self {
        let cols = grid.subregion_cols().max(1);
        let rows = grid.subregion_rows().max(1);
        let side = grid.subregion_side;
        let mut clusters = Vec::with_capacity((cols * rows) as usize);
        for cy in 0..rows {
            for cx in 0..cols {
                clusters.push(Cluster {
                    id: (cy * cols + cx) as usize,
                    bounds: Rect {
                        x0: cx as f64 * side,
                        y0: cy as f64 * side,
                        x1: (cx + 1) as f64 * side,
                        y1: (cy + 1) as f64 * side,
                    },
                    head_id: None,
                    member_ids: Vec::new(),
                    event_counter: 0,
                    zones_per_side: params.zones_per_side.max(1),
                    crisis_zones: BTreeSet::new(),
                    data_pending: false,
                    crisis_in_flight: BTreeSet::new(),
                });
            }
        }
        let mut net = Self {
            coverage: vec![0; grid.cell_count()],
            marks: vec![0; grid.cell_count()],
            mark_epoch: 0,
            grid,
            radio,
            params,
            nodes,
            clusters,
            holes: Vec::new(),
            stats: MessageStats::default(),
            coverage_series: Vec::new(),
            first_static_death: None,
            now: 0.0,
            trace: Trace { enabled: trace, records: Vec::new() },
            outbox: Vec::new(),
            dying: Vec::new(),
        };
        for id in 0..net.nodes.len() {
            net.nodes[id].id = id;
            net.nodes[id].cluster_id = Some(net.cluster_of(net.nodes[id].pos));
            net.refresh_sets(id);
            if net.nodes[id].is_alive() && !net.nodes[id].asleep {
                net.activate(id);
            }
        }
        net
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn set_now(&mut self, t: f64) {
        self.now = t;
    }

    pub fn trace_records(&self) -> &[TraceRecord] {
        &self.trace.records
    }

    pub fn take_trace(&mut self) -> Vec<TraceRecord> {
        std::mem::take(&mut self.trace.records)
    }

    pub(crate) fn log(&mut self, event: impl FnOnce() -> TraceEvent) {
        let t = self.now;
        self.trace.push(t, event);
    }

    pub fn drain_outbox(&mut self) -> Vec<Scheduled> {
        std::mem::take(&mut self.outbox)
    }

    pub(crate) fn schedule(&mut self, at: f64, action: Action) {
        self.outbox.push(Scheduled { at, action });
    }

    pub fn is_proposed(&self) -> bool {
        self.params.kind == ProtocolKind::Proposed
    }

    // ---------------------------------------------------------------------
    // coverage bookkeeping

    pub fn cluster_of(&self, p: Point) -> ClusterId {
        let cols = self.grid.subregion_cols().max(1);
        let rows = self.grid.subregion_rows().max(1);
        let side = self.grid.subregion_side;
        let cx = ((p.x / side).floor().max(0.0) as u32).min(cols - 1);
        let cy = ((p.y / side).floor().max(0.0) as u32).min(rows - 1);
        (cy * cols + cx) as usize
    }

    /// Clusters sharing an edge or a corner with `id`.
    pub fn neighbor_clusters(&self, id: ClusterId) -> Vec<ClusterId> {
        let cols = self.grid.subregion_cols().max(1) as i64;
        let rows = self.grid.subregion_rows().max(1) as i64;
        let (cx, cy) = (id as i64 % cols, id as i64 / cols);
        let mut out = Vec::new();
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (cx + dx, cy + dy);
                if (dx, dy) != (0, 0) && nx >= 0 && ny >= 0 && nx < cols && ny < rows {
                    out.push((ny * cols + nx) as usize);
                }
            }
        }
        out
    }

    pub fn coverage_count(&self, cell: Cell) -> u32 {
        self.coverage[self.grid.index(cell)]
    }

    pub fn is_covered(&self, cell: Cell) -> bool {
        self.coverage_count(cell) > 0
    }

    /// Fraction of cells covered by active nodes. In the proposed protocol the
    /// cells of a headless cluster count as holes.
    pub fn coverage_ratio(&self) -> f64 {
        let total = self.grid.cell_count();
        if total == 0 {
            return 0.0;
        }
        let headless: Vec<bool> = self.clusters.iter().map(|c| self.is_proposed() && c.head_id.is_none()).collect();
        let covered = self
            .grid
            .cells()
            .filter(|&c| self.is_covered(c) && !headless[self.cluster_of(self.grid.cell_center(c))])
            .count();
        covered as f64 / total as f64
    }

    pub fn record_coverage(&mut self) {
        let p = self.coverage_ratio();
        self.coverage_series.push((self.now, p));
    }

    pub(crate) fn refresh_sets(&mut self, id: NodeId) {
        let n = &self.nodes[id];
        let sets = CoverageSets::compute(n.pos, n.r_l_current, n.r_s, &self.grid);
        let n = &mut self.nodes[id];
        n.q_l_shared = Arc::new(sets.q_l.clone());
        n.coverage = sets;
    }

    fn add_disk(&mut self, id: NodeId) {
        for c in self.nodes[id].coverage.q_l.iter() {
            self.coverage[self.grid.index(*c)] += 1;
        }
    }

    fn remove_disk(&mut self, id: NodeId) {
        for c in self.nodes[id].coverage.q_l.iter() {
            let i = self.grid.index(*c);
            debug_assert!(self.coverage[i] > 0);
            self.coverage[i] -= 1;
        }
    }

    pub(crate) fn activate(&mut self, id: NodeId) {
        if !self.nodes[id].active {
            self.nodes[id].active = true;
            self.add_disk(id);
        }
    }

    fn deactivate(&mut self, id: NodeId) {
        if self.nodes[id].active {
            self.remove_disk(id);
            self.nodes[id].active = false;
            self.nodes[id].neighbors.clear();
            self.nodes[id].previous_neighbors.clear();
        }
    }

    /// Changes a node's sensing radius, keeping the coverage map in sync.
    pub(crate) fn set_radius(&mut self, id: NodeId, r: f64) {
        // bill the old radius up to now
        self.accrue_node(id, self.now);
        let active = self.nodes[id].active;
        if active {
            self.remove_disk(id);
        }
        self.nodes[id].r_l_current = r;
        self.refresh_sets(id);
        if active {
            self.add_disk(id);
        }
    }

    // ---------------------------------------------------------------------
    // energy

    pub(crate) fn charge(&mut self, id: NodeId, category: Category, amount: f64) {
        let node = &mut self.nodes[id];
        if !node.is_alive() {
            return;
        }
        let alive = node.ledger.charge(category, amount).unwrap_or(true);
        if !alive {
            self.dying.push(id);
        }
    }

    /// Bills idle (or sleep) power up to the current time.
    pub fn accrue_idle(&mut self) {
        let now = self.now;
        for id in 0..self.nodes.len() {
            self.accrue_node(id, now);
        }
        self.settle();
    }

    pub(crate) fn accrue_node(&mut self, id: NodeId, now: f64) {
        let n = &self.nodes[id];
        if !n.is_alive() {
            return;
        }
        let dt = now - n.last_accrual;
        if dt <= 0.0 {
            return;
        }
        let p = self.params.power;
        let (power, sensing) = if n.asleep {
            (p.sleep_w, 0.0)
        } else {
            (p.idle_w, p.sense_w_per_m2 * std::f64::consts::PI * n.r_l_current * n.r_l_current)
        };
        self.nodes[id].last_accrual = now;
        self.charge(id, Category::Idle, power * dt);
        if sensing > 0.0 {
            self.charge(id, Category::Sense, sensing * dt);
        }
    }

    /// Processes nodes whose energy ran out since the last call.
    pub fn settle(&mut self) {
        while let Some(id) = self.dying.pop() {
            if self.nodes[id].died_at.is_some() {
                continue;
            }
            self.retire(id, "energy");
        }
    }

    fn retire(&mut self, id: NodeId, cause: &'static str) {
        let now = self.now;
        self.nodes[id].died_at = Some(now);
        if cause == "energy" && self.nodes[id].kind == NodeKind::Static && self.first_static_death.is_none() {
            self.first_static_death = Some(now);
        }
        let was_active = self.nodes[id].active;
        self.deactivate(id);
        self.log(|| TraceEvent::NodeDied { node: id, cause });
        if was_active {
            self.after_coverage_loss();
        }
        self.drop_responder(id);
    }

    /// Hardware failure: the node stops at once, its ledger frozen.
    pub fn kill_node(&mut self, id: NodeId) {
        if !self.nodes[id].is_alive() {
            return;
        }
        self.nodes[id].ledger.kill();
        self.retire(id, "failure");
    }

    /// Kills `floor(percent/100 * alive static)` static nodes drawn uniformly
    /// without replacement. Mobile nodes are never failed.
    pub fn inject_failures<R: Rng + ?Sized>(&mut self, percent: f64, rng: &mut R) -> Vec<NodeId> {
        let alive: Vec<NodeId> =
            self.nodes.iter().filter(|n| n.kind == NodeKind::Static && n.is_alive()).map(|n| n.id).collect();
        let k = ((percent / 100.0) * alive.len() as f64).floor() as usize;
        let k = k.min(alive.len());
        let mut picked: Vec<NodeId> =
            rand::seq::index::sample(rng, alive.len(), k).into_iter().map(|i| alive[i]).collect();
        picked.sort_unstable();
        for &id in &picked {
            self.kill_node(id);
        }
        let killed = picked.clone();
        self.log(|| TraceEvent::FailureInjected { percent, killed });
        picked
    }

    // ---------------------------------------------------------------------
    // messaging

    fn bits(bytes: f64) -> f64 {
        bytes * 8.0
    }

    fn deliver(&mut self, dst: NodeId, bits: f64) {
        let rx = self.radio.rx_energy(bits).unwrap_or(0.0);
        self.stats.receptions += 1;
        self.stats.rx_energy_expected += rx;
        self.charge(dst, Category::Rx, rx);
    }

    fn transmit(&mut self, src: NodeId, bits: f64, d: f64) -> bool {
        if !self.nodes[src].is_alive() {
            return false;
        }
        let tx = self.radio.tx_energy(bits, d).unwrap_or(0.0);
        self.stats.messages += 1;
        self.charge(src, Category::Tx, tx);
        true
    }

    /// Point-to-point message. Returns false when the sender is already dead.
    pub(crate) fn unicast(&mut self, src: NodeId, dst: NodeId, kind: MessageKind) -> bool {
        let bits = Self::bits(self.message_bytes(kind, src));
        let d = distance(self.nodes[src].pos, self.nodes[dst].pos);
        if !self.transmit(src, bits, d) {
            return false;
        }
        if self.nodes[dst].is_alive() {
            self.deliver(dst, bits);
        }
        true
    }

    /// Radio broadcast reaching every active node within `range`.
    pub(crate) fn broadcast(&mut self, src: NodeId, range: f64, kind: MessageKind) -> Vec<NodeId> {
        let bits = Self::bits(self.message_bytes(kind, src));
        if !self.transmit(src, bits, range) {
            return Vec::new();
        }
        let origin = self.nodes[src].pos;
        let receivers: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| n.id != src && n.active && distance(n.pos, origin) <= range)
            .map(|n| n.id)
            .collect();
        for &r in &receivers {
            self.deliver(r, bits);
        }
        receivers
    }

    pub(crate) fn send_to_sink(&mut self, src: NodeId, kind: MessageKind) -> bool {
        let bits = Self::bits(self.message_bytes(kind, src));
        let d = distance(self.nodes[src].pos, self.params.sink);
        self.transmit(src, bits, d)
    }

    /// Message from the sink; only the receiver pays.
    pub(crate) fn sink_to(&mut self, dst: NodeId, kind: MessageKind) {
        let bits = Self::bits(self.message_bytes(kind, dst));
        self.stats.messages += 1;
        if self.nodes[dst].is_alive() {
            self.deliver(dst, bits);
        }
    }

    fn message_bytes(&self, kind: MessageKind, src: NodeId) -> f64 {
        let m = &self.params.messages;
        match kind {
            MessageKind::QlBroadcast => {
                m.ql_base_bytes + m.ql_per_cell_bytes * self.nodes[src].coverage.q_l.len() as f64
            }
            MessageKind::SinkReport => m.sink_report_bytes,
            MessageKind::DataPacket => m.data_bytes,
            _ => m.control_bytes,
        }
    }

    /// Sends the node's id, position and `q_l` to everything within `r_c`;
    /// receivers overwrite their table entry for it.
    pub(crate) fn announce_coverage(&mut self, id: NodeId) {
        let range = self.nodes[id].r_c;
        let entry = NeighborEntry { pos: self.nodes[id].pos, q_l: Arc::clone(&self.nodes[id].q_l_shared) };
        for r in self.broadcast(id, range, MessageKind::QlBroadcast) {
            self.nodes[r].neighbors.insert(id, entry.clone());
        }
    }

    // ---------------------------------------------------------------------
    // rounds

    /// One protocol round: heads, update, prevention, detection.
    pub fn on_round_start(&mut self, round: u64) {
        self.log(|| TraceEvent::RoundStart { round });
        self.accrue_idle();
        if self.is_proposed() {
            self.flush_cluster_data();
            self.elect_heads();
        } else {
            self.assign_clusters();
        }
        self.phase_update();
        if !self.is_proposed() {
            // second control message of the baseline detection phase
            for id in 0..self.nodes.len() {
                if self.nodes[id].active {
                    let range = self.nodes[id].r_c;
                    self.broadcast(id, range, MessageKind::Hello);
                }
            }
        }
        self.settle();
        if self.is_proposed() {
            self.phase_prevention();
            self.settle();
        }
        let detections = self.detect_all();
        self.form_holes(detections);
        self.settle();
        self.record_coverage();
    }

    fn assign_clusters(&mut self) {
        for c in &mut self.clusters {
            c.member_ids.clear();
        }
        for id in 0..self.nodes.len() {
            let cid = self.cluster_of(self.nodes[id].pos);
            self.nodes[id].cluster_id = Some(cid);
            if self.nodes[id].active {
                self.clusters[cid].member_ids.push(id);
            }
        }
    }

    /// Heads forward one aggregated data packet per round to the sink.
    fn flush_cluster_data(&mut self) {
        for cid in 0..self.clusters.len() {
            if !self.clusters[cid].data_pending {
                continue;
            }
            self.clusters[cid].data_pending = false;
            if let Some(h) = self.clusters[cid].head_id {
                if self.nodes[h].is_alive() && self.send_to_sink(h, MessageKind::DataPacket) {
                    self.stats.data_packets += 1;
                }
            }
        }
        self.settle();
    }

    /// Per cluster, the alive static member with the most residual energy
    /// becomes head and announces itself to the members.
    pub fn elect_heads(&mut self) {
        self.assign_clusters();
        for cid in 0..self.clusters.len() {
            let head = pick_head(self.clusters[cid].member_ids.iter().map(|&m| &self.nodes[m]));
            self.clusters[cid].head_id = head;
            match head {
                None => self.log(|| TraceEvent::Headless { cluster: cid }),
                Some(h) => {
                    self.log(|| TraceEvent::HeadElected { cluster: cid, head: h });
                    let hp = self.nodes[h].pos;
                    let reach = self.clusters[cid]
                        .member_ids
                        .iter()
                        .map(|&m| distance(self.nodes[m].pos, hp))
                        .fold(0.0, f64::max);
                    if reach > 0.0 {
                        self.broadcast(h, reach, MessageKind::HeadAnnounce);
                    }
                }
            }
        }
        self.settle();
    }

    /// Rebuilds neighbor tables from this round's `q_l` broadcasts. Cell sets
    /// are already current: they are recomputed whenever a radius changes.
    pub fn phase_update(&mut self) {
        for id in 0..self.nodes.len() {
            if self.nodes[id].active {
                let n = &mut self.nodes[id];
                n.previous_neighbors = std::mem::take(&mut n.neighbors);
            }
        }
        for id in 0..self.nodes.len() {
            if self.nodes[id].active && self.nodes[id].is_alive() {
                self.announce_coverage(id);
            }
        }
    }

    /// Members report residual energy to their head; zones holding less than
    /// the threshold share of the cluster's residual energy become crisis
    /// zones and get a sleeping mobile sent to their centroid.
    pub fn phase_prevention(&mut self) -> Vec<(ClusterId, usize)> {
        let mut raised = Vec::new();
        for cid in 0..self.clusters.len() {
            let Some(head) = self.clusters[cid].head_id else {
                continue;
            };
            let members = self.clusters[cid].member_ids.clone();
            for &m in &members {
                if m != head {
                    self.unicast(m, head, MessageKind::EnergyReport);
                }
            }
            let zones = self.clusters[cid].zone_count();
            let mut zone_res = vec![0.0; zones];
            for &m in &members {
                let z = self.clusters[cid].zone_of(self.nodes[m].pos);
                zone_res[z] += self.nodes[m].ledger.residual();
            }
            let total: f64 = zone_res.iter().sum();
            let mut crisis = BTreeSet::new();
            for (z, &res) in zone_res.iter().enumerate() {
                let ratio = zone_energy_ratio(res.min(total), total).unwrap_or(0.0);
                if ratio < self.params.crisis_threshold {
                    crisis.insert(z);
                    self.log(|| TraceEvent::CrisisZone { cluster: cid, zone: z, ratio });
                }
            }
            self.clusters[cid].crisis_zones = crisis.clone();
            for z in crisis {
                if self.clusters[cid].crisis_in_flight.contains(&z) {
                    continue;
                }
                raised.push((cid, z));
                let target = self.clusters[cid].zone_centroid(z);
                if self
                    .dispatch_from_clusters(cid, Some(head), target, Dispatch::Crisis { cluster: cid, zone: z })
                    .is_some()
                {
                    self.clusters[cid].crisis_in_flight.insert(z);
                }
            }
        }
        raised
    }

    /// Detection events for every target sample. Proposed: data goes to the
    /// cluster head and bumps the cluster's event counter. Baseline: straight
    /// to the sink.
    pub fn on_target_sample(&mut self, targets: &[Point]) {
        for &t in targets {
            for id in 0..self.nodes.len() {
                let n = &self.nodes[id];
                if !n.active || distance(n.pos, t) > n.r_l_current {
                    continue;
                }
                self.stats.detections += 1;
                let sense = self.params.power.sense_j_per_event;
                if sense > 0.0 {
                    self.charge(id, Category::Sense, sense);
                }
                if self.is_proposed() {
                    let cid = self.cluster_of(self.nodes[id].pos);
                    self.clusters[cid].event_counter += 1;
                    match self.clusters[cid].head_id {
                        Some(h) if h != id && self.nodes[h].is_alive() => {
                            if self.unicast(id, h, MessageKind::DataPacket) {
                                self.stats.data_packets += 1;
                            }
                            self.clusters[cid].data_pending = true;
                        }
                        Some(h) if h == id => self.clusters[cid].data_pending = true,
                        _ => {
                            if self.send_to_sink(id, MessageKind::DataPacket) {
                                self.stats.data_packets += 1;
                            }
                        }
                    }
                } else if self.send_to_sink(id, MessageKind::DataPacket) {
                    self.stats.data_packets += 1;
                }
            }
        }
        self.settle();
    }

    /// Periodic sink pass: heads report their event counters; clusters whose
    /// count is above the mean get the nearest free mobile, busiest first.
    /// Counters are then zeroed.
    pub fn sink_global_update(&mut self) -> Vec<(ClusterId, NodeId)> {
        let mut reporting = Vec::new();
        for cid in 0..self.clusters.len() {
            if let Some(h) = self.clusters[cid].head_id {
                if self.nodes[h].is_alive() {
                    self.send_to_sink(h, MessageKind::SinkReport);
                    reporting.push(cid);
                }
            }
        }
        let counters: Vec<u64> = self.clusters.iter().map(|c| c.event_counter).collect();
        self.log(|| TraceEvent::GlobalUpdate { counters: counters.clone() });
        let mut sent = Vec::new();
        if !reporting.is_empty() {
            let mean = reporting.iter().map(|&c| counters[c] as f64).sum::<f64>() / reporting.len() as f64;
            let mut flagged: Vec<ClusterId> = reporting.into_iter().filter(|&c| counters[c] as f64 > mean).collect();
            flagged.sort_by(|&a, &b| counters[b].cmp(&counters[a]).then(a.cmp(&b)));
            for cid in flagged {
                let target = self.clusters[cid].bounds.center();
                let candidates = self.free_mobiles(|_| true);
                let Ok(m) = super::select_mobile(&candidates, target, self.params.selection) else {
                    break;
                };
                self.sink_to(m, MessageKind::MobileDispatch);
                self.dispatch(m, target, Dispatch::Preposition { cluster: cid }, CoverMechanism::ClusterMobile);
                sent.push((cid, m));
            }
        }
        for c in &mut self.clusters {
            c.event_counter = 0;
        }
        self.settle();
        sent
    }

    pub(crate) fn free_mobiles(&self, filter: impl Fn(&SensorNode) -> bool) -> Vec<super::MobileCandidate> {
        self.nodes
            .iter()
            .filter(|n| n.is_free_mobile() && filter(n))
            .map(|n| super::MobileCandidate { id: n.id, pos: n.pos, flag: n.flag })
            .collect()
    }

    /// Cluster-level then neighbor-cluster search for a free mobile, requests
    /// travelling through the heads. Returns the mobile and the rung used.
    pub(crate) fn dispatch_from_clusters(
        &mut self,
        cid: ClusterId,
        requester: Option<NodeId>,
        target: Point,
        purpose: Dispatch,
    ) -> Option<(NodeId, CoverMechanism)> {
        let head = self.clusters[cid].head_id.filter(|&h| self.nodes[h].is_alive());
        let coordinator = head.or(requester);
        let hole = match purpose {
            Dispatch::Hole { hole, .. } => Some(hole),
            _ => None,
        };
        if let (Some(r), Some(h)) = (requester, head) {
            if r != h && hole.is_some() {
                self.unicast(r, h, MessageKind::HelpRequest);
                let hid = hole.unwrap_or_default();
                self.log(|| TraceEvent::HelpRequest { hole: hid, from: r, to: h });
            }
        }
        let in_cluster = self.free_mobiles(|n| self.cluster_of(n.pos) == cid);
        if let Ok(m) = super::select_mobile(&in_cluster, target, self.params.selection) {
            if let Some(c) = coordinator {
                self.unicast(c, m, MessageKind::MobileDispatch);
            }
            let purpose = with_level(purpose, CoverMechanism::ClusterMobile);
            self.dispatch(m, target, purpose, CoverMechanism::ClusterMobile);
            return Some((m, CoverMechanism::ClusterMobile));
        }
        let neighbors = self.neighbor_clusters(cid);
        if let Some(c) = coordinator {
            for &nc in &neighbors {
                if let Some(nh) = self.clusters[nc].head_id.filter(|&h| self.nodes[h].is_alive()) {
                    self.unicast(c, nh, MessageKind::HelpRequest);
                    if let Some(hid) = hole {
                        self.log(|| TraceEvent::HelpRequest { hole: hid, from: c, to: nh });
                    }
                }
            }
        }
        let around = self.free_mobiles(|n| neighbors.contains(&self.cluster_of(n.pos)));
        if let Ok(m) = super::select_mobile(&around, target, self.params.selection) {
            let mc = self.cluster_of(self.nodes[m].pos);
            let sender = self.clusters[mc].head_id.filter(|&h| self.nodes[h].is_alive()).or(coordinator);
            if let Some(s) = sender {
                self.unicast(s, m, MessageKind::MobileDispatch);
            }
            let purpose = with_level(purpose, CoverMechanism::NeighborClusterMobile);
            self.dispatch(m, target, purpose, CoverMechanism::NeighborClusterMobile);
            return Some((m, CoverMechanism::NeighborClusterMobile));
        }
        None
    }

    /// Flags the mobile and schedules its arrival at `target`.
    pub(crate) fn dispatch(&mut self, m: NodeId, target: Point, purpose: Dispatch, level: CoverMechanism) {
        let now = self.now;
        self.nodes[m].flag = true;
        self.stats.mobile_dispatches += 1;
        let eta = distance(self.nodes[m].pos, target) / self.params.mobile_speed;
        self.log(|| TraceEvent::MobileDispatched { mobile: m, purpose: purpose.label(), level, target, eta });
        if let Dispatch::Hole { hole, .. } = purpose {
            self.holes[hole].mobiles_in_flight += 1;
        }
        self.schedule(now + eta, Action::MobileArrival { mobile: m, target, purpose });
    }

    /// A dispatched mobile reaches its target, wakes up and joins the network.
    pub fn on_mobile_arrival(&mut self, m: NodeId, target: Point, purpose: Dispatch) {
        let now = self.now;
        if let Dispatch::Hole { hole, .. } = purpose {
            self.holes[hole].mobiles_in_flight = self.holes[hole].mobiles_in_flight.saturating_sub(1);
        }
        if let Dispatch::Crisis { cluster, zone } = purpose {
            self.clusters[cluster].crisis_in_flight.remove(&zone);
        }
        if self.nodes[m].is_alive() {
            self.accrue_node(m, now);
            let travelled = distance(self.nodes[m].pos, target);
            let move_cost = self.params.power.move_j_per_m * travelled;
            if move_cost > 0.0 {
                self.charge(m, Category::Move, move_cost);
            }
        }
        if !self.nodes[m].is_alive() {
            self.settle();
            if let Dispatch::Hole { hole, .. } = purpose {
                self.retry_hole(hole);
            }
            return;
        }
        {
            let n = &mut self.nodes[m];
            n.pos = target;
            n.asleep = false;
            n.last_accrual = now;
        }
        let cid = self.cluster_of(target);
        self.nodes[m].cluster_id = Some(cid);
        self.refresh_sets(m);
        self.activate(m);
        self.log(|| TraceEvent::MobileArrived { mobile: m, cluster: Some(cid) });
        self.announce_coverage(m);
        match purpose {
            Dispatch::Hole { hole, level } => self.after_mobile_arrival(hole, level),
            _ => self.refresh_open_holes(CoverMechanism::ClusterMobile),
        }
        self.settle();
    }

    pub fn scheduled_actions_pending(&self) -> bool {
        !self.outbox.is_empty()
    }
}

fn with_level(purpose: Dispatch, level: CoverMechanism) -> Dispatch {
    match purpose {
        Dispatch::Hole { hole, .. } => Dispatch::Hole { hole, level },
        other => other,
    }
}

/// Cells of `cells` no active disk covers.
pub(crate) fn uncovered_of<'a>(net: &Network, cells: impl IntoIterator<Item = &'a Cell>) -> CellSet {
    cells.into_iter().filter(|c| !net.is_covered(**c)).copied().collect()
}
