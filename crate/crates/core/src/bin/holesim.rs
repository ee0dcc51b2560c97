use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use holesim::config::Config;
use holesim::plot::{render_svg, XAxis};
use holesim::protocol::ProtocolKind;
use holesim::results::{csv_string, run_config, run_sweep, ResultRow, RunError, SweepSpec};
use holesim::sim::PRNG_NAME;

#[derive(Parser)]
#[command(name = "holesim", version, about = "Coverage-hole simulator for clustered sensor networks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Nodes,
    Failures,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write a single CSV row.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        protocol: Option<ProtocolKind>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON-lines event trace destination.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the Cartesian product of the given axes, seeds and protocols.
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        nodes: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        failures: Vec<f64>,
        #[arg(long, default_value_t = 25)]
        seeds: u64,
        #[arg(long, value_delimiter = ',', default_value = "proposed,baseline")]
        protocols: Vec<ProtocolKind>,
        #[arg(long, env = "HOLESIM_JOBS", default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot a metric column of a results CSV as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long, value_enum, default_value = "nodes")]
        x: Axis,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn io(e: std::io::Error, path: &Path) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| io(e, p)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Runtime(e.to_string())),
    }
}

fn write_meta(out: &Path, cfg: &Config) -> Result<(), Failure> {
    let meta = out.with_extension("meta.toml");
    let text = format!("# holesim {}\n# prng: {PRNG_NAME}\n{}", env!("CARGO_PKG_VERSION"), cfg.echo());
    std::fs::write(&meta, text).map_err(|e| io(e, &meta))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned())
}

fn execute(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Run { config, seed, protocol, out, trace } => {
            let mut cfg = Config::from_path(&config).map_err(|e| Failure::Validation(e.to_string()))?;
            if seed.is_some() {
                cfg.sim.seed = seed;
            }
            if let Some(p) = protocol {
                cfg.sim.protocol = p;
            }
            let id = stem(&config);
            let (row, output) = if trace.is_some() {
                let mut sc = cfg.to_scenario().map_err(|e| Failure::Validation(e.to_string()))?;
                sc.trace = true;
                let out = holesim::sim::run(&sc).map_err(|e| Failure::Runtime(e.to_string()))?;
                let row = ResultRow::from_run(&id, &sc, &out);
                (row, out)
            } else {
                run_config(&cfg, &id)?
            };
            if let Some(path) = trace {
                let mut lines = String::new();
                for rec in &output.trace {
                    lines.push_str(&serde_json::to_string(rec).map_err(|e| Failure::Runtime(e.to_string()))?);
                    lines.push('\n');
                }
                std::fs::write(&path, lines).map_err(|e| io(e, &path))?;
            }
            emit(&csv_string(&[row]), out.as_deref())?;
            if let Some(p) = out.as_deref() {
                write_meta(p, &cfg)?;
            }
            Ok(())
        }
        Cmd::Sweep { config, nodes, failures, seeds, protocols, jobs, out } => {
            let cfg = Config::from_path(&config).map_err(|e| Failure::Validation(e.to_string()))?;
            if nodes.is_empty() && failures.is_empty() {
                return Err(Failure::Validation("sweep needs --nodes or --failures".into()));
            }
            let spec = SweepSpec { name: stem(&config), nodes, failures, seeds, protocols };
            let rows = run_sweep(&cfg, &spec, jobs)?;
            emit(&csv_string(&rows), out.as_deref())?;
            if let Some(p) = out.as_deref() {
                write_meta(p, &cfg)?;
            }
            Ok(())
        }
        Cmd::Plot { csv, metric, x, out } => {
            let text = std::fs::read_to_string(&csv).map_err(|e| io(e, &csv))?;
            let axis = match x {
                Axis::Nodes => XAxis::Nodes,
                Axis::Failures => XAxis::Failures,
            };
            let svg = render_svg(&text, &metric, axis).map_err(|e| Failure::Validation(e.to_string()))?;
            std::fs::write(&out, svg).map_err(|e| io(e, &out))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
