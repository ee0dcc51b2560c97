//! Deterministic discrete-event engine that drives a [`Network`].

mod mobility;
mod placement;
mod queue;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{Category, RadioModel};
use crate::geometry::{GridSpec, Point};
use crate::protocol::{
    Action, Cluster, Dispatch, HoleRecord, MessageStats, Network, NodeId, NodeKind, ProtocolParams, SensorNode,
    TraceEvent, TraceRecord,
};

pub use mobility::{MobilityParams, TargetState};
pub use placement::{mobile_count, place_nodes};
pub use queue::{CausalityError, EventQueue};

/// Name of the generator behind every random stream, echoed into metadata.
pub const PRNG_NAME: &str = "ChaCha8 (rand_chacha 0.9), one stream per purpose";

/// Independent random streams derived from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Placement = 1,
    Mobility = 2,
    Failures = 3,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Causality(#[from] CausalityError),
}

/// One node of a scenario before the run starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub kind: NodeKind,
    pub pos: Point,
    pub initial_energy: f64,
    pub r_l: f64,
    pub r_s: f64,
    /// Energy already spent at t = 0 (booked as idle), for fixtures.
    #[serde(default)]
    pub spent: f64,
}

impl NodeSpec {
    pub fn new(kind: NodeKind, pos: Point, initial_energy: f64, r_l: f64, r_s: f64) -> Self {
        Self { kind, pos, initial_energy, r_l, r_s, spent: 0.0 }
    }
}

/// Everything a run depends on. Same scenario, same output.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub grid: GridSpec,
    pub radio: RadioModel,
    pub protocol: ProtocolParams,
    pub nodes: Vec<NodeSpec>,
    pub duration_s: f64,
    pub seed: u64,
    pub round_s: f64,
    /// Global sink pass period (proposed protocol only); 0 disables it.
    pub sink_update_s: f64,
    pub mobility: MobilityParams,
    /// `(time, percent)` failure injections.
    pub failure_plan: Vec<(f64, f64)>,
    /// `(time, node ids)` deterministic kills, for constructed scenarios.
    pub scripted_kills: Vec<(f64, Vec<NodeId>)>,
    pub trace: bool,
}

impl Scenario {
    /// A scenario with default timing over the given nodes; no targets,
    /// failures or sink passes.
    pub fn new(
        grid: GridSpec,
        radio: RadioModel,
        protocol: ProtocolParams,
        nodes: Vec<NodeSpec>,
        duration_s: f64,
    ) -> Self {
        Self {
            grid,
            radio,
            protocol,
            nodes,
            duration_s,
            seed: 0,
            round_s: 10.0,
            sink_update_s: 0.0,
            mobility: MobilityParams { target_count: 0, ..Default::default() },
            failure_plan: Vec::new(),
            scripted_kills: Vec::new(),
            trace: false,
        }
    }

    /// Every violated constraint, empty when the scenario can run.
    pub fn violations(&self) -> Vec<String> {
        let mut v = self.grid.violations();
        v.extend(self.radio.violations());
        let pos = |name: &str, x: f64, v: &mut Vec<String>| {
            if !(x > 0.0 && x.is_finite()) {
                v.push(format!("{name} must be positive, got {x}"));
            }
        };
        pos("duration_s", self.duration_s, &mut v);
        pos("round_s", self.round_s, &mut v);
        pos("mobile.speed_mps", self.protocol.mobile_speed, &mut v);
        if self.mobility.target_count > 0 {
            pos("mobility.sample_s", self.mobility.sample_s, &mut v);
            if !(self.mobility.v_min > 0.0 && self.mobility.v_max >= self.mobility.v_min) {
                v.push(format!(
                    "mobility speeds need 0 < v_min <= v_max, got [{}, {}]",
                    self.mobility.v_min, self.mobility.v_max
                ));
            }
            if self.mobility.pause_s < 0.0 {
                v.push("mobility.pause_s must be >= 0".into());
            }
        }
        if self.sink_update_s < 0.0 {
            v.push("sink.update_period_s must be >= 0".into());
        }
        if self.protocol.t_base < 0.0 {
            v.push("cover.t_base_s must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.protocol.crisis_threshold) {
            v.push("prevention.threshold must lie in [0, 1]".into());
        }
        if self.protocol.zones_per_side == 0 {
            v.push("prevention.zones_per_side must be >= 1".into());
        }
        let p = &self.protocol.power;
        for (name, x) in [
            ("energy.idle_w", p.idle_w),
            ("energy.sleep_w", p.sleep_w),
            ("energy.sense_j_per_event", p.sense_j_per_event),
            ("energy.sense_w_per_m2", p.sense_w_per_m2),
            ("energy.move_j_per_m", p.move_j_per_m),
        ] {
            if x < 0.0 {
                v.push(format!("{name} must be >= 0, got {x}"));
            }
        }
        if !self.grid.contains_point(self.protocol.sink) {
            v.push(format!("sink.pos {:?} lies outside the area", self.protocol.sink));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if !self.grid.contains_point(n.pos) {
                v.push(format!("node {i} at ({}, {}) lies outside the area", n.pos.x, n.pos.y));
            }
            if !(n.r_l > 0.0 && n.r_l <= n.r_s) {
                v.push(format!("node {i}: need 0 < r_l <= r_s, got r_l={} r_s={}", n.r_l, n.r_s));
            }
            if n.initial_energy.is_nan() || n.initial_energy < 0.0 {
                v.push(format!("node {i}: initial energy must be >= 0"));
            }
            if !(0.0..=n.initial_energy).contains(&n.spent) {
                v.push(format!("node {i}: spent energy must lie in [0, initial]"));
            }
        }
        for &(t, pct) in &self.failure_plan {
            if !(0.0..=100.0).contains(&pct) {
                v.push(format!("failure percent must lie in [0, 100], got {pct}"));
            }
            if t < 0.0 {
                v.push(format!("failure time must be >= 0, got {t}"));
            }
        }
        for (t, ids) in &self.scripted_kills {
            if *t < 0.0 {
                v.push(format!("scripted kill time must be >= 0, got {t}"));
            }
            if let Some(bad) = ids.iter().find(|&&i| i >= self.nodes.len()) {
                v.push(format!("scripted kill names unknown node {bad}"));
            }
        }
        v
    }

    /// Builds the network at t = 0.
    pub fn build_network(&self) -> Network {
        let nodes: Vec<SensorNode> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut n = SensorNode::new(i, s.kind, s.pos, s.initial_energy, s.r_l, s.r_s);
                if s.spent > 0.0 {
                    let _ = n.ledger.charge(Category::Idle, s.spent);
                }
                n
            })
            .collect();
        Network::new(self.grid, self.radio, self.protocol.clone(), nodes, self.trace)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SimEvent {
    RoundStart(u64),
    TimerExpiry { node: NodeId, hole: usize },
    MobileArrival { mobile: NodeId, target: Point, purpose: Dispatch },
    TargetSample(u64),
    GlobalUpdate(u64),
    FailureInjection(f64),
    ScriptedKill(usize),
    SimEnd,
}

/// Final state of a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub duration_s: f64,
    pub nodes: Vec<SensorNode>,
    pub clusters: Vec<Cluster>,
    pub holes: Vec<HoleRecord>,
    pub coverage_series: Vec<(f64, f64)>,
    pub first_static_death: Option<f64>,
    pub stats: MessageStats,
    pub trace: Vec<TraceRecord>,
    pub events_processed: u64,
}

impl RunOutput {
    pub fn final_coverage_ratio(&self) -> f64 {
        self.coverage_series.last().map_or(0.0, |&(_, p)| p)
    }
}

/// Runs a scenario to `duration_s`.
pub fn run(scenario: &Scenario) -> Result<RunOutput, SimError> {
    let v = scenario.violations();
    if !v.is_empty() {
        return Err(SimError::Invalid(v));
    }
    let mut net = scenario.build_network();
    let mut mobility_rng = stream_rng(scenario.seed, Stream::Mobility);
    let mut failure_rng = stream_rng(scenario.seed, Stream::Failures);
    let grid = scenario.grid;
    let mob = scenario.mobility;
    let mut targets: Vec<TargetState> =
        (0..mob.target_count).map(|_| TargetState::spawn(&mut mobility_rng, &grid, &mob)).collect();

    let end = scenario.duration_s;
    let mut q = EventQueue::new();
    q.schedule(end, SimEvent::SimEnd)?;
    q.schedule(0.0, SimEvent::RoundStart(0))?;
    if !targets.is_empty() {
        q.schedule(0.0, SimEvent::TargetSample(0))?;
    }
    let global = scenario.sink_update_s > 0.0 && net.is_proposed();
    if global && scenario.sink_update_s < end {
        q.schedule(scenario.sink_update_s, SimEvent::GlobalUpdate(1))?;
    }
    for &(t, pct) in &scenario.failure_plan {
        if t < end {
            q.schedule(t, SimEvent::FailureInjection(pct))?;
        }
    }
    for (i, (t, _)) in scenario.scripted_kills.iter().enumerate() {
        if *t < end {
            q.schedule(*t, SimEvent::ScriptedKill(i))?;
        }
    }

    let mut processed = 0u64;
    while let Some((t, _, ev)) = q.pop() {
        processed += 1;
        net.set_now(t);
        match ev {
            SimEvent::SimEnd => break,
            SimEvent::RoundStart(k) => {
                net.on_round_start(k);
                let next = (k + 1) as f64 * scenario.round_s;
                if next < end {
                    q.schedule(next, SimEvent::RoundStart(k + 1))?;
                }
            }
            SimEvent::TargetSample(k) => {
                if k > 0 {
                    for s in &mut targets {
                        s.step(t - mob.sample_s, mob.sample_s, &mut mobility_rng, &grid, &mob);
                    }
                }
                let pos: Vec<Point> = targets.iter().map(|s| s.pos).collect();
                net.on_target_sample(&pos);
                let next = (k + 1) as f64 * mob.sample_s;
                if next < end {
                    q.schedule(next, SimEvent::TargetSample(k + 1))?;
                }
            }
            SimEvent::GlobalUpdate(k) => {
                net.sink_global_update();
                let next = (k + 1) as f64 * scenario.sink_update_s;
                if next < end {
                    q.schedule(next, SimEvent::GlobalUpdate(k + 1))?;
                }
            }
            SimEvent::TimerExpiry { node, hole } => net.on_cover_timer(node, hole),
            SimEvent::MobileArrival { mobile, target, purpose } => net.on_mobile_arrival(mobile, target, purpose),
            SimEvent::FailureInjection(pct) => {
                net.inject_failures(pct, &mut failure_rng);
            }
            SimEvent::ScriptedKill(i) => {
                for &id in &scenario.scripted_kills[i].1 {
                    net.kill_node(id);
                }
            }
        }
        for s in net.drain_outbox() {
            let ev = match s.action {
                Action::CoverTimer { node, hole } => SimEvent::TimerExpiry { node, hole },
                Action::MobileArrival { mobile, target, purpose } => {
                    SimEvent::MobileArrival { mobile, target, purpose }
                }
            };
            q.schedule(s.at, ev)?;
        }
    }
    net.set_now(end);
    net.accrue_idle();
    net.finalize();
    net.record_coverage();
    net.log(|| TraceEvent::SimEnd);
    Ok(RunOutput {
        duration_s: end,
        first_static_death: net.first_static_death,
        coverage_series: std::mem::take(&mut net.coverage_series),
        stats: net.stats.clone(),
        trace: net.take_trace(),
        holes: std::mem::take(&mut net.holes),
        clusters: std::mem::take(&mut net.clusters),
        nodes: std::mem::take(&mut net.nodes),
        events_processed: processed,
    })
}
