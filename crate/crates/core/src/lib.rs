//! Discrete-event simulator for coverage holes in clustered wireless sensor
//! networks.
//!
//! The crate compares two repair strategies on the same geometry and radio
//! accounting: a clustered protocol that balances energy and sends sleeping
//! mobile nodes to crisis zones and holes, and a baseline in which static
//! nodes extend their sensing range by residual-energy priority.
//!
//! * [`geometry`]: grid cells, disk coverage and the detection annulus.
//! * [`energy`]: radio models and per-node energy ledgers.
//! * [`protocol`]: node, cluster and hole state machines.
//! * [`sim`]: the event engine, target mobility and failure injection.
//! * [`metrics`], [`results`], [`plot`]: evaluation, CSV sweeps and SVG charts.
//! * [`config`]: TOML scenario files.
//!
//! ```
//! use holesim::config::Config;
//! use holesim::results::run_config;
//!
//! let cfg = Config::from_toml_str(r#"
//!     [sim]
//!     seed = 7
//!     duration_s = 60
//!     [grid]
//!     width = 200
//!     height = 200
//!     subregion_side = 100
//!     [nodes]
//!     count = 30
//!     r_s = 40
//! "#).unwrap();
//! let (row, _) = run_config(&cfg, "doc").unwrap();
//! assert_eq!(row.n_nodes, 30);
//! ```

pub mod config;
pub mod energy;
pub mod geometry;
pub mod metrics;
pub mod plot;
pub mod protocol;
pub mod results;
pub mod sim;
