use std::collections::{BTreeMap, BTreeSet};

use super::network::{uncovered_of, Action, Dispatch, Network};
use super::trace::TraceEvent;
use super::{
    baseline_delay, coverage_timer, select_mobile, ClusterId, CoverMechanism, HoleId, HoleRecord, MessageKind, NodeId,
};
use crate::geometry::{distance, farthest_uncovered_distance, Cell, CellSet, Point};

/// Cells of the annulus that none of the neighbor disks covers.
pub fn detect_q_hat<'a>(annulus: &CellSet, neighbor_q_l: impl IntoIterator<Item = &'a CellSet>) -> CellSet {
    let mut q_hat = annulus.clone();
    for q in neighbor_q_l {
        if q_hat.is_empty() {
            break;
        }
        q_hat.retain(|c| !q.contains(c));
    }
    q_hat
}

/// Minimal union-find over a small index space.
struct Components(Vec<usize>);

impl Components {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

impl Network {
    /// Runs hole detection for one node from its current neighbor table and
    /// stores the result in its `q_hat`.
    pub fn phase_detect(&mut self, id: NodeId) -> CellSet {
        // same result as `detect_q_hat`, via per-cell marks instead of set algebra
        self.mark_epoch = self.mark_epoch.wrapping_add(1);
        if self.mark_epoch == 0 {
            self.marks.fill(0);
            self.mark_epoch = 1;
        }
        let epoch = self.mark_epoch;
        let node = &self.nodes[id];
        for e in node.neighbors.values() {
            for c in e.q_l.iter() {
                self.marks[self.grid.index(*c)] = epoch;
            }
        }
        let q_hat: CellSet =
            node.coverage.q_l_minus_s.iter().filter(|c| self.marks[self.grid.index(**c)] != epoch).copied().collect();
        self.nodes[id].coverage.q_hat = q_hat.clone();
        q_hat
    }

    /// Detection pass over all active nodes. Besides the annulus test, a node
    /// also reports cells that a neighbor from the previous round covered, if
    /// that neighbor has disappeared and nothing covers those cells now. Cells
    /// already in an open hole are not reported again.
    pub(crate) fn detect_all(&mut self) -> Vec<(NodeId, CellSet)> {
        let claimed: CellSet =
            self.holes.iter().filter(|h| h.is_open()).flat_map(|h| h.cells.iter().copied()).collect();
        let mut out = Vec::new();
        for id in 0..self.nodes.len() {
            if !self.nodes[id].active {
                continue;
            }
            let q_hat = self.phase_detect(id);
            let node = &self.nodes[id];
            let mut found: CellSet = q_hat.iter().filter(|c| !claimed.contains(c)).copied().collect();
            for (k, entry) in &node.previous_neighbors {
                if node.neighbors.contains_key(k) {
                    continue;
                }
                for c in entry.q_l.iter() {
                    if !claimed.contains(c)
                        && !self.is_covered(*c)
                        && !node.coverage.q_l.contains(c)
                        && !node.neighbors.values().any(|e| e.q_l.contains(c))
                    {
                        found.insert(*c);
                    }
                }
            }
            if !found.is_empty() {
                out.push((id, found));
            }
        }
        out
    }

    /// Turns per-node detections into hole records and starts the reaction
    /// timers. In the proposed protocol a cell belongs to the cluster it lies
    /// in when one of that cluster's nodes saw it, and only that cluster's
    /// detectors respond; the baseline has no clusters.
    pub(crate) fn form_holes(&mut self, detections: Vec<(NodeId, CellSet)>) -> Vec<HoleId> {
        if detections.is_empty() {
            return Vec::new();
        }
        let proposed = self.is_proposed();
        let size: BTreeMap<NodeId, usize> = detections.iter().map(|(id, c)| (*id, c.len())).collect();
        let better = |a: NodeId, b: NodeId| size[&a] > size[&b] || (size[&a] == size[&b] && a < b);
        let mut by_cell: BTreeMap<Cell, Vec<NodeId>> = BTreeMap::new();
        for (id, cells) in &detections {
            for c in cells {
                by_cell.entry(*c).or_default().push(*id);
            }
        }
        let slot: BTreeMap<NodeId, usize> = detections.iter().enumerate().map(|(i, (id, _))| (*id, i)).collect();
        let mut comps = Components((0..detections.len()).collect());
        // per cell: (group, responders)
        let mut assigned: Vec<(Cell, Option<ClusterId>, Vec<NodeId>)> = Vec::with_capacity(by_cell.len());
        for (cell, dets) in by_cell {
            let (group, responders) = if proposed {
                let home = self.cluster_of(self.grid.cell_center(cell));
                let cluster_of_node = |n: NodeId| self.cluster_of(self.nodes[n].pos);
                let group = if dets.iter().any(|&d| cluster_of_node(d) == home) {
                    home
                } else {
                    let best = dets.iter().copied().reduce(|a, b| if better(b, a) { b } else { a }).unwrap_or(dets[0]);
                    cluster_of_node(best)
                };
                let r: Vec<NodeId> = dets.iter().copied().filter(|&d| cluster_of_node(d) == group).collect();
                (Some(group), r)
            } else {
                (None, dets)
            };
            for w in responders.windows(2) {
                comps.union(slot[&w[0]], slot[&w[1]]);
            }
            assigned.push((cell, group, responders));
        }
        let mut groups: BTreeMap<usize, (Option<ClusterId>, CellSet, BTreeSet<NodeId>)> = BTreeMap::new();
        for (cell, group, responders) in assigned {
            let root = comps.find(slot[&responders[0]]);
            let entry = groups.entry(root).or_insert_with(|| (group, CellSet::new(), BTreeSet::new()));
            entry.1.insert(cell);
            entry.2.extend(responders);
        }
        let now = self.now;
        let mut created = Vec::new();
        for (_, (cluster, cells, responders)) in groups {
            let detector = responders.iter().copied().reduce(|a, b| if better(b, a) { b } else { a }).unwrap_or(0);
            let hole = self.holes.len();
            let responders: Vec<NodeId> = responders.into_iter().collect();
            let n_cells = cells.len();
            self.holes.push(HoleRecord {
                hole_id: hole,
                detecting_node: detector,
                cluster_id: cluster,
                cells,
                detected_at: now,
                covered_at: None,
                covered_by: CoverMechanism::Unrecovered,
                uncovered_at: None,
                responders: responders.clone(),
                pending: responders.iter().copied().collect(),
                raised: BTreeSet::new(),
                mobiles_in_flight: 0,
                escalator: None,
            });
            let logged = responders.clone();
            self.log(|| TraceEvent::HoleDetected { hole, cluster, detector, cells: n_cells, responders: logged });
            if proposed {
                if let Some(h) = cluster.and_then(|c| self.clusters[c].head_id) {
                    if h != detector {
                        self.unicast(detector, h, MessageKind::HoleDetected);
                    }
                }
            }
            for r in responders {
                let delay = if proposed {
                    coverage_timer(self.params.t_base, size[&r])
                } else {
                    let l = &self.nodes[r].ledger;
                    baseline_delay(self.params.t_base, l.residual(), l.initial)
                };
                self.log(|| TraceEvent::TimerSet { hole, node: r, delay });
                self.schedule(now + delay, Action::CoverTimer { node: r, hole });
            }
            created.push(hole);
        }
        created
    }

    /// A responder's timer fires: recheck the hole, extend the sensing range
    /// toward the uncovered cells it can reach, then escalate if needed.
    pub fn on_cover_timer(&mut self, node: NodeId, hole: HoleId) {
        if !self.holes[hole].is_open() || !self.holes[hole].pending.remove(&node) {
            return;
        }
        if !self.nodes[node].active {
            self.check_progress(hole, None);
            return;
        }
        let remaining = uncovered_of(self, self.holes[hole].cells.iter());
        let pos = self.nodes[node].pos;
        let r_s = self.nodes[node].r_s;
        let reachable: Vec<Cell> =
            remaining.iter().copied().filter(|&c| distance(self.grid.cell_center(c), pos) <= r_s).collect();
        if !reachable.is_empty() {
            let want = farthest_uncovered_distance(pos, reachable.iter(), &self.grid).unwrap_or(0.0).min(r_s);
            let from = self.nodes[node].r_l_current;
            if want > from {
                self.set_radius(node, want);
                let cluster = self.nodes[node].cluster_id;
                self.log(|| TraceEvent::RangeIncrease { hole, node, cluster, from, to: want });
                self.holes[hole].raised.insert(node);
                self.announce_coverage(node);
                self.refresh_open_holes(CoverMechanism::RangeIncrease);
            }
        }
        self.check_progress(hole, Some(node));
        self.settle();
    }

    /// Closes the hole if covered; otherwise, once no pending responder can
    /// reach what is left, hands over to mobiles (proposed) or gives up.
    fn check_progress(&mut self, hole: HoleId, requester: Option<NodeId>) {
        if !self.holes[hole].is_open() {
            return;
        }
        let remaining = uncovered_of(self, self.holes[hole].cells.iter());
        if remaining.is_empty() {
            self.close_hole(hole, CoverMechanism::RangeIncrease);
            return;
        }
        let can_help = self.holes[hole].pending.iter().any(|&p| {
            let n = &self.nodes[p];
            n.active && remaining.iter().any(|&c| distance(self.grid.cell_center(c), n.pos) <= n.r_s)
        });
        if can_help {
            return;
        }
        self.cancel_pending(hole);
        if self.is_proposed() {
            if requester.is_some() {
                self.holes[hole].escalator = requester;
            }
            self.retry_hole(hole);
        } else {
            self.log(|| TraceEvent::HoleStalled { hole });
        }
    }

    fn cancel_pending(&mut self, hole: HoleId) {
        let pending = std::mem::take(&mut self.holes[hole].pending);
        for node in pending {
            self.log(|| TraceEvent::TimerCancelled { hole, node });
        }
    }

    /// Asks for one more mobile for an open hole, climbing the ladder: a free
    /// mobile near the requester in its cluster, any free mobile of the
    /// cluster via the head, then the neighboring clusters via their heads.
    pub(crate) fn retry_hole(&mut self, hole: HoleId) {
        let h = &self.holes[hole];
        if !h.is_open() || h.mobiles_in_flight > 0 || !h.pending.is_empty() || !self.is_proposed() {
            return;
        }
        let remaining = uncovered_of(self, h.cells.iter());
        if remaining.is_empty() {
            self.close_hole(hole, CoverMechanism::RangeIncrease);
            return;
        }
        let requester = h
            .escalator
            .into_iter()
            .chain(std::iter::once(h.detecting_node))
            .chain(h.responders.iter().copied())
            .find(|&n| self.nodes[n].active);
        let cid = h
            .cluster_id
            .unwrap_or_else(|| remaining.first().map(|&c| self.cluster_of(self.grid.cell_center(c))).unwrap_or(0));
        let target = self.dispatch_target(&remaining);
        if let Some(req) = requester {
            let (rpos, rc) = (self.nodes[req].pos, self.nodes[req].r_c);
            let local = self.free_mobiles(|n| self.cluster_of(n.pos) == cid && distance(n.pos, rpos) <= rc);
            if let Ok(m) = select_mobile(&local, target, self.params.selection) {
                self.unicast(req, m, MessageKind::MobileDispatch);
                let level = CoverMechanism::LocalMobile;
                self.dispatch(m, target, Dispatch::Hole { hole, level }, level);
                return;
            }
        }
        let purpose = Dispatch::Hole { hole, level: CoverMechanism::ClusterMobile };
        if self.dispatch_from_clusters(cid, requester, target, purpose).is_none() {
            self.log(|| TraceEvent::HoleStalled { hole });
        }
    }

    /// Where to send a mobile: the centroid of the uncovered cells when a
    /// mobile there would cover at least one of them, else the uncovered cell
    /// nearest that centroid.
    fn dispatch_target(&self, remaining: &CellSet) -> Point {
        let n = remaining.len().max(1) as f64;
        let (sx, sy) = remaining.iter().fold((0.0, 0.0), |(x, y), &c| {
            let p = self.grid.cell_center(c);
            (x + p.x, y + p.y)
        });
        let centroid = Point::new(sx / n, sy / n);
        let r = self.nodes.iter().filter(|m| m.is_free_mobile()).map(|m| m.r_l_base).fold(f64::INFINITY, f64::min);
        let nearest = remaining
            .iter()
            .map(|&c| self.grid.cell_center(c))
            .min_by(|a, b| distance(*a, centroid).total_cmp(&distance(*b, centroid)))
            .unwrap_or(centroid);
        if r.is_finite() && distance(nearest, centroid) <= r {
            centroid
        } else {
            nearest
        }
    }

    /// Called when a mobile sent for `hole` has joined the network.
    pub(crate) fn after_mobile_arrival(&mut self, hole: HoleId, level: CoverMechanism) {
        if self.holes[hole].is_open() && uncovered_of(self, self.holes[hole].cells.iter()).is_empty() {
            self.close_hole(hole, level);
        }
        self.refresh_open_holes(CoverMechanism::ClusterMobile);
        if self.holes[hole].is_open() {
            self.retry_hole(hole);
        }
    }

    /// Shrinks a range-extended node back toward its base radius, keeping
    /// the cells only it covers.
    fn restore_range(&mut self, id: NodeId) {
        let n = &self.nodes[id];
        if !n.active || n.r_l_current <= n.r_l_base {
            return;
        }
        let keep = n
            .coverage
            .q_l
            .iter()
            .filter(|&&c| self.coverage_count(c) == 1)
            .map(|&c| distance(self.grid.cell_center(c), n.pos))
            .fold(n.r_l_base, f64::max);
        let from = n.r_l_current;
        if keep < from {
            self.set_radius(id, keep);
            self.log(|| TraceEvent::RangeDecrease { node: id, from, to: keep });
            self.announce_coverage(id);
        }
    }

    fn close_hole(&mut self, hole: HoleId, by: CoverMechanism) {
        let now = self.now;
        let h = &mut self.holes[hole];
        if !h.is_open() {
            return;
        }
        h.covered_at = Some(now);
        h.covered_by = by;
        let recovery = now - h.detected_at;
        self.log(|| TraceEvent::HoleCovered { hole, by, recovery });
        self.cancel_pending(hole);
        if matches!(
            by,
            CoverMechanism::LocalMobile | CoverMechanism::ClusterMobile | CoverMechanism::NeighborClusterMobile
        ) {
            let raised = std::mem::take(&mut self.holes[hole].raised);
            for r in raised {
                self.restore_range(r);
            }
        }
    }

    /// Closes every open hole whose cells are all covered now.
    pub(crate) fn refresh_open_holes(&mut self, cause: CoverMechanism) {
        for hole in 0..self.holes.len() {
            if self.holes[hole].is_open() && uncovered_of(self, self.holes[hole].cells.iter()).is_empty() {
                self.close_hole(hole, cause);
            }
        }
    }

    /// A covered hole that loses a cell again ends its lifetime window; the
    /// next detection pass opens a fresh record for the gap.
    pub(crate) fn after_coverage_loss(&mut self) {
        let now = self.now;
        for hole in 0..self.holes.len() {
            let h = &self.holes[hole];
            if h.covered_at.is_none() || h.uncovered_at.is_some() {
                continue;
            }
            if h.cells.iter().any(|&c| !self.is_covered(c)) {
                self.holes[hole].uncovered_at = Some(now);
                self.log(|| TraceEvent::HoleReopened { hole });
            }
        }
    }

    /// A responder died: it no longer answers for any hole.
    pub(crate) fn drop_responder(&mut self, id: NodeId) {
        for hole in 0..self.holes.len() {
            if self.holes[hole].is_open() && self.holes[hole].pending.remove(&id) {
                self.check_progress(hole, None);
            }
        }
    }

    /// Marks holes still open at the end of the run as unrecovered.
    pub fn finalize(&mut self) {
        for h in &mut self.holes {
            if h.is_open() {
                h.covered_by = CoverMechanism::Unrecovered;
                h.pending.clear();
            }
        }
    }
}
