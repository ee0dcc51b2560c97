//! Evaluation metrics computed from a finished run.

use serde::Serialize;

use crate::protocol::{HoleRecord, NodeKind};
use crate::sim::RunOutput;

/// Mean of the per-node consumption; `None` for an empty network.
pub fn avg_energy(consumed: &[f64]) -> Option<f64> {
    if consumed.is_empty() {
        return None;
    }
    Some(consumed.iter().sum::<f64>() / consumed.len() as f64)
}

/// Jain's fairness index `(Σc)² / (n·Σc²)`. All-zero consumption counts as
/// perfectly balanced.
pub fn jain_index(consumed: &[f64]) -> Option<f64> {
    if consumed.is_empty() {
        return None;
    }
    let sum: f64 = consumed.iter().sum();
    let sq: f64 = consumed.iter().map(|c| c * c).sum();
    if sq == 0.0 {
        return Some(1.0);
    }
    // rounding can overshoot the upper bound for equal values
    Some((sum * sum / (consumed.len() as f64 * sq)).min(1.0))
}

/// Mean time holes stayed covered: from `covered_at` until they reopened or
/// the run ended. Holes never covered count as zero.
pub fn hole_coverage_lifetime(holes: &[HoleRecord], end: f64) -> Option<f64> {
    if holes.is_empty() {
        return None;
    }
    let total: f64 = holes
        .iter()
        .map(|h| match h.covered_at {
            Some(c) => (h.uncovered_at.unwrap_or(end) - c).max(0.0),
            None => 0.0,
        })
        .sum();
    Some(total / holes.len() as f64)
}

/// Mean detection-to-coverage latency over recovered holes.
pub fn recovery_time(holes: &[HoleRecord]) -> Option<f64> {
    let r: Vec<f64> = holes.iter().filter_map(HoleRecord::recovery_time).collect();
    if r.is_empty() {
        return None;
    }
    Some(r.iter().sum::<f64>() / r.len() as f64)
}

/// First static node death, or the whole run when none died.
pub fn network_lifetime(first_death: Option<f64>, duration: f64) -> f64 {
    first_death.unwrap_or(duration)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub avg_energy_consumed: Option<f64>,
    pub load_balance: Option<f64>,
    pub hole_coverage_lifetime: Option<f64>,
    pub mean_recovery_time: Option<f64>,
    pub network_lifetime: f64,
    pub coverage_ratio_series: Vec<(f64, f64)>,
    pub holes_total: usize,
    pub holes_unrecovered: usize,
    pub final_coverage_ratio: f64,
    pub static_deaths: usize,
}

impl RunMetrics {
    pub fn from_run(out: &RunOutput) -> Self {
        let consumed: Vec<f64> = out.nodes.iter().map(|n| n.ledger.total_consumed()).collect();
        Self {
            avg_energy_consumed: avg_energy(&consumed),
            load_balance: jain_index(&consumed),
            hole_coverage_lifetime: hole_coverage_lifetime(&out.holes, out.duration_s),
            mean_recovery_time: recovery_time(&out.holes),
            network_lifetime: network_lifetime(out.first_static_death, out.duration_s),
            coverage_ratio_series: out.coverage_series.clone(),
            holes_total: out.holes.len(),
            holes_unrecovered: out.holes.iter().filter(|h| h.covered_at.is_none()).count(),
            final_coverage_ratio: out.final_coverage_ratio(),
            static_deaths: out.nodes.iter().filter(|n| n.kind == NodeKind::Static && n.died_at.is_some()).count(),
        }
    }
}
