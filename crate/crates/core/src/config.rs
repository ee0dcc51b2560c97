//! TOML scenario files.
//!
//! Every key has a default except `sim.seed`, `sim.duration_s`, the grid
//! dimensions and `nodes.count`. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{ModelKind, RadioModel};
use crate::geometry::{GridSpec, Point};
use crate::protocol::{MessageSizes, NodeKind, PowerParams, ProtocolKind, ProtocolParams, SelectionRule};
use crate::sim::{place_nodes, stream_rng, MobilityParams, NodeSpec, Scenario, Stream};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub seed: Option<u64>,
    pub duration_s: Option<f64>,
    #[serde(default = "default_protocol")]
    pub protocol: ProtocolKind,
    #[serde(default = "default_round")]
    pub round_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub subregion_side: Option<f64>,
    #[serde(default = "default_cell")]
    pub cell_side: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodesSection {
    pub count: Option<usize>,
    #[serde(default = "default_mobile_fraction")]
    pub mobile_fraction: f64,
    #[serde(default = "default_initial_energy")]
    pub initial_energy_j: f64,
    #[serde(default = "default_r_l")]
    pub r_l: f64,
    #[serde(default = "default_r_s")]
    pub r_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergySection {
    pub model: ModelKind,
    pub e_elec: f64,
    pub eps_fs: f64,
    pub eps_mp: f64,
    /// Crossover distance; derived from the amplifier constants when absent.
    pub d0: Option<f64>,
    pub e_trans: f64,
    pub e_amp: f64,
    pub e_recv: f64,
    pub amp_per_bit: bool,
    pub idle_w: f64,
    pub sleep_w: f64,
    pub move_j_per_m: f64,
    pub sense_j_per_event: f64,
    pub sense_w_per_m2: f64,
}

impl Default for EnergySection {
    fn default() -> Self {
        let phys = RadioModel::physical();
        let simple = RadioModel::simple(0.02, 0.01, 0.01);
        let power = PowerParams::default();
        Self {
            model: ModelKind::Simple,
            e_elec: phys.e_elec,
            eps_fs: phys.eps_fs,
            eps_mp: phys.eps_mp,
            d0: None,
            e_trans: simple.e_trans,
            e_amp: simple.e_amp,
            e_recv: simple.e_recv,
            amp_per_bit: false,
            idle_w: power.idle_w,
            sleep_w: power.sleep_w,
            move_j_per_m: power.move_j_per_m,
            sense_j_per_event: power.sense_j_per_event,
            sense_w_per_m2: power.sense_w_per_m2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreventionSection {
    pub zones_per_side: u32,
    pub threshold: f64,
}

impl Default for PreventionSection {
    fn default() -> Self {
        Self { zones_per_side: 2, threshold: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoverSection {
    pub t_base_s: f64,
}

impl Default for CoverSection {
    fn default() -> Self {
        Self { t_base_s: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobileSection {
    pub selection: SelectionRule,
    pub speed_mps: f64,
}

impl Default for MobileSection {
    fn default() -> Self {
        Self { selection: SelectionRule::Nearest, speed_mps: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SinkSection {
    /// `[x, y]`; the area center when absent.
    pub pos: Option<[f64; 2]>,
    pub update_period_s: f64,
}

impl Default for SinkSection {
    fn default() -> Self {
        Self { pos: None, update_period_s: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FailuresSection {
    /// One-shot failure percentage applied at `at_s`.
    pub percent: f64,
    /// Defaults to half the run.
    pub at_s: Option<f64>,
    /// Explicit `[[time, percent], ...]`; replaces `percent`/`at_s` when set.
    pub plan: Option<Vec<[f64; 2]>>,
}

impl Default for FailuresSection {
    fn default() -> Self {
        Self { percent: 0.0, at_s: None, plan: None }
    }
}

/// A whole scenario file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub nodes: NodesSection,
    #[serde(default)]
    pub energy: EnergySection,
    #[serde(default)]
    pub prevention: PreventionSection,
    #[serde(default)]
    pub cover: CoverSection,
    #[serde(default)]
    pub mobile: MobileSection,
    #[serde(default)]
    pub sink: SinkSection,
    #[serde(default)]
    pub messages: MessageSizes,
    #[serde(default)]
    pub mobility: MobilityParams,
    #[serde(default)]
    pub failures: FailuresSection,
}

fn default_protocol() -> ProtocolKind {
    ProtocolKind::Proposed
}
fn default_round() -> f64 {
    10.0
}
fn default_cell() -> f64 {
    10.0
}
fn default_mobile_fraction() -> f64 {
    0.2
}
fn default_initial_energy() -> f64 {
    4.0
}
fn default_r_l() -> f64 {
    20.0
}
fn default_r_s() -> f64 {
    100.0
}

impl Config {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(s)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    /// Missing required keys and out-of-range values of the file itself.
    /// Scenario-level checks run in [`Config::to_scenario`].
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let required = [
            ("sim.seed", self.sim.seed.is_none()),
            ("sim.duration_s", self.sim.duration_s.is_none()),
            ("grid.width", self.grid.width.is_none()),
            ("grid.height", self.grid.height.is_none()),
            ("grid.subregion_side", self.grid.subregion_side.is_none()),
            ("nodes.count", self.nodes.count.is_none()),
        ];
        for (key, missing) in required {
            if missing {
                v.push(format!("missing required key {key}"));
            }
        }
        if !(0.0..=1.0).contains(&self.nodes.mobile_fraction) {
            v.push(format!("nodes.mobile_fraction must lie in [0, 1], got {}", self.nodes.mobile_fraction));
        }
        if !(0.0..=100.0).contains(&self.failures.percent) {
            v.push(format!("failures.percent must lie in [0, 100], got {}", self.failures.percent));
        }
        v
    }

    pub fn radio(&self) -> RadioModel {
        let e = &self.energy;
        RadioModel {
            kind: e.model,
            e_elec: e.e_elec,
            eps_fs: e.eps_fs,
            eps_mp: e.eps_mp,
            d0: e.d0.unwrap_or_else(|| (e.eps_fs / e.eps_mp).sqrt()),
            e_trans: e.e_trans,
            e_amp: e.e_amp,
            e_recv: e.e_recv,
            amp_per_bit: e.amp_per_bit,
        }
    }

    pub fn failure_plan(&self) -> Vec<(f64, f64)> {
        if let Some(plan) = &self.failures.plan {
            return plan.iter().map(|&[t, p]| (t, p)).collect();
        }
        if self.failures.percent > 0.0 {
            let at = self.failures.at_s.unwrap_or(self.sim.duration_s.unwrap_or(0.0) / 2.0);
            vec![(at, self.failures.percent)]
        } else {
            Vec::new()
        }
    }

    /// Resolves the file into a runnable scenario, placing nodes from the
    /// placement stream of the seed.
    pub fn to_scenario(&self) -> Result<Scenario, ConfigError> {
        let mut v = self.violations();
        if !v.is_empty() {
            return Err(ConfigError::Invalid(v));
        }
        let (width, height) = (self.grid.width.unwrap_or(0.0), self.grid.height.unwrap_or(0.0));
        let grid = GridSpec {
            width,
            height,
            cell_side: self.grid.cell_side,
            subregion_side: self.grid.subregion_side.unwrap_or(0.0),
        };
        let gv = grid.violations();
        if !gv.is_empty() {
            return Err(ConfigError::Invalid(gv));
        }
        let seed = self.sim.seed.unwrap_or(0);
        let sink = self.sink.pos.map_or(Point::new(width / 2.0, height / 2.0), |[x, y]| Point::new(x, y));
        let mut protocol = ProtocolParams::new(self.sim.protocol, sink);
        protocol.t_base = self.cover.t_base_s;
        protocol.crisis_threshold = self.prevention.threshold;
        protocol.zones_per_side = self.prevention.zones_per_side;
        protocol.selection = self.mobile.selection;
        protocol.mobile_speed = self.mobile.speed_mps;
        protocol.messages = self.messages;
        protocol.power = PowerParams {
            idle_w: self.energy.idle_w,
            sleep_w: self.energy.sleep_w,
            sense_j_per_event: self.energy.sense_j_per_event,
            sense_w_per_m2: self.energy.sense_w_per_m2,
            move_j_per_m: self.energy.move_j_per_m,
        };
        let n = &self.nodes;
        let mut rng = stream_rng(seed, Stream::Placement);
        let nodes = place_nodes(n.count.unwrap_or(0), n.mobile_fraction, &grid, &mut rng)
            .into_iter()
            .map(|(kind, pos)| {
                // the baseline has no backup nodes: the same deployment, all static
                let kind = if self.sim.protocol == ProtocolKind::Baseline { NodeKind::Static } else { kind };
                NodeSpec::new(kind, pos, n.initial_energy_j, n.r_l, n.r_s)
            })
            .collect();
        let scenario = Scenario {
            grid,
            radio: self.radio(),
            protocol,
            nodes,
            duration_s: self.sim.duration_s.unwrap_or(0.0),
            seed,
            round_s: self.sim.round_s,
            sink_update_s: self.sink.update_period_s,
            mobility: self.mobility,
            failure_plan: self.failure_plan(),
            scripted_kills: Vec::new(),
            trace: false,
        };
        v = scenario.violations();
        if !v.is_empty() {
            return Err(ConfigError::Invalid(v));
        }
        Ok(scenario)
    }

    /// The fully resolved config, defaults filled in, as TOML.
    pub fn echo(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = r#"
[sim]
seed = 1
duration_s = 100
[grid]
width = 100
height = 100
subregion_side = 50
[nodes]
count = 10
"#;

    #[test]
    fn minimal_file_gets_defaults() {
        let c = Config::from_toml_str(MIN).unwrap();
        assert_eq!(c.nodes.r_l, 20.0);
        assert_eq!(c.prevention.threshold, 0.1);
        assert_eq!(c.mobile.speed_mps, 5.0);
        let s = c.to_scenario().unwrap();
        assert_eq!(s.nodes.len(), 10);
        assert_eq!(s.protocol.sink, Point::new(50.0, 50.0));
    }

    #[test]
    fn unknown_key_is_an_error() {
        let bad = format!("{MIN}\n[cover]\nt_base = 2\n");
        assert!(matches!(Config::from_toml_str(&bad), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn all_missing_keys_are_listed() {
        let c = Config::from_toml_str("").unwrap();
        let Err(ConfigError::Invalid(v)) = c.to_scenario() else { panic!("expected invalid") };
        assert_eq!(v.len(), 6);
    }

    #[test]
    fn echo_round_trips() {
        let c = Config::from_toml_str(MIN).unwrap();
        let back = Config::from_toml_str(&c.echo()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn default_failure_at_half_time() {
        let c = Config::from_toml_str(&format!("{MIN}\n[failures]\npercent = 25\n")).unwrap();
        assert_eq!(c.failure_plan(), vec![(50.0, 25.0)]);
    }
}
