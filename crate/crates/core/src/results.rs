//! Result rows, CSV output and parameter sweeps.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::metrics::RunMetrics;
use crate::protocol::ProtocolKind;
use crate::sim::{run, RunOutput, Scenario, SimError, PRNG_NAME};

pub const CSV_COLUMNS: [&str; 13] = [
    "scenario_id",
    "seed",
    "protocol",
    "n_nodes",
    "failure_pct",
    "avg_energy_j",
    "load_balance",
    "hole_cov_lifetime_s",
    "recovery_time_s",
    "network_lifetime_s",
    "holes_total",
    "holes_unrecovered",
    "final_coverage_ratio",
];

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{scenario}: {source}")]
    Sim { scenario: String, source: SimError },
    #[error("cannot build worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// Whether the failure comes from the input rather than the run itself.
    pub fn is_validation(&self) -> bool {
        matches!(self, RunError::Config(_) | RunError::Sim { source: SimError::Invalid(_), .. })
    }
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scenario_id: String,
    pub seed: u64,
    pub protocol: ProtocolKind,
    pub n_nodes: usize,
    pub failure_pct: f64,
    pub metrics: RunMetrics,
}

impl ResultRow {
    /// Summarises a finished run of `scenario`.
    pub fn from_run(scenario_id: &str, scenario: &Scenario, out: &RunOutput) -> Self {
        Self {
            scenario_id: scenario_id.to_string(),
            seed: scenario.seed,
            protocol: scenario.protocol.kind,
            n_nodes: scenario.nodes.len(),
            failure_pct: scenario.failure_plan.iter().map(|p| p.1).fold(0.0, |a, b| a + b),
            metrics: RunMetrics::from_run(out),
        }
    }

    fn fields(&self) -> Vec<String> {
        let m = &self.metrics;
        vec![
            self.scenario_id.clone(),
            self.seed.to_string(),
            self.protocol.as_str().to_string(),
            self.n_nodes.to_string(),
            fixed(Some(self.failure_pct)),
            fixed(m.avg_energy_consumed),
            fixed(m.load_balance),
            fixed(m.hole_coverage_lifetime),
            fixed(m.mean_recovery_time),
            fixed(Some(m.network_lifetime)),
            m.holes_total.to_string(),
            m.holes_unrecovered.to_string(),
            fixed(Some(m.final_coverage_ratio)),
        ]
    }
}

fn fixed(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

/// Header comment naming the writer version and generator.
pub fn version_line() -> String {
    format!("# holesim {} csv-v1 prng={}", env!("CARGO_PKG_VERSION"), PRNG_NAME)
}

/// Writes the version comment, the header and the rows in the given order.
pub fn write_csv<W: Write>(mut out: W, rows: &[ResultRow]) -> Result<(), RunError> {
    writeln!(out, "{}", version_line())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    // writing to memory only fails on formatting bugs
    write_csv(&mut buf, rows).expect("in-memory csv");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Canonical row order: protocol, node count, failure percentage, seed.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.protocol
            .as_str()
            .cmp(b.protocol.as_str())
            .then(a.n_nodes.cmp(&b.n_nodes))
            .then(a.failure_pct.total_cmp(&b.failure_pct))
            .then(a.seed.cmp(&b.seed))
            .then(a.scenario_id.cmp(&b.scenario_id))
    });
}

/// Runs one resolved config and summarises it as a row.
pub fn run_config(config: &Config, scenario_id: &str) -> Result<(ResultRow, RunOutput), RunError> {
    let scenario = config.to_scenario()?;
    let out = run(&scenario).map_err(|source| RunError::Sim { scenario: scenario_id.to_string(), source })?;
    let row = ResultRow::from_run(scenario_id, &scenario, &out);
    Ok((row, out))
}

/// Axes of a sweep. Empty axes keep the config's own value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub nodes: Vec<usize>,
    pub failures: Vec<f64>,
    pub seeds: u64,
    pub protocols: Vec<ProtocolKind>,
}

impl SweepSpec {
    /// Every run of the sweep as a `(scenario_id, config)` pair. Seeds are the
    /// config seed plus `0..seeds`.
    pub fn expand(&self, base: &Config) -> Vec<(String, Config)> {
        let nodes: Vec<Option<usize>> =
            if self.nodes.is_empty() { vec![None] } else { self.nodes.iter().copied().map(Some).collect() };
        let failures: Vec<Option<f64>> =
            if self.failures.is_empty() { vec![None] } else { self.failures.iter().copied().map(Some).collect() };
        let protocols: Vec<ProtocolKind> =
            if self.protocols.is_empty() { vec![base.sim.protocol] } else { self.protocols.clone() };
        let base_seed = base.sim.seed.unwrap_or(0);
        let mut out = Vec::new();
        for &p in &protocols {
            for &n in &nodes {
                for &f in &failures {
                    for s in 0..self.seeds.max(1) {
                        let mut c = base.clone();
                        c.sim.protocol = p;
                        c.sim.seed = Some(base_seed.wrapping_add(s));
                        if let Some(n) = n {
                            c.nodes.count = Some(n);
                        }
                        if let Some(f) = f {
                            c.failures.percent = f;
                            c.failures.plan = None;
                        }
                        let id = format!(
                            "{}-n{}-f{}",
                            self.name,
                            c.nodes.count.unwrap_or(0),
                            c.failure_plan().iter().map(|p| p.1).fold(0.0, |a, b| a + b)
                        );
                        out.push((id, c));
                    }
                }
            }
        }
        out
    }
}

/// Runs the sweep on `jobs` worker threads and returns rows in canonical
/// order, independent of scheduling.
pub fn run_sweep(base: &Config, spec: &SweepSpec, jobs: usize) -> Result<Vec<ResultRow>, RunError> {
    let runs = spec.expand(base);
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| RunError::Pool(e.to_string()))?;
    let mut rows = pool.install(|| {
        runs.par_iter().map(|(id, c)| run_config(c, id).map(|(row, _)| row)).collect::<Result<Vec<_>, _>>()
    })?;
    sort_rows(&mut rows);
    Ok(rows)
}
