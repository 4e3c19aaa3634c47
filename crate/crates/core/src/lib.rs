//! Latency–security and throughput–latency bounds for Nakamoto consensus
//! under Poisson mining with bounded delay, plus a seeded simulator of the
//! mining race used to cross-check them.
//!
//! ```
//! use naklab::{BoundEngine, BoundKind, MiningParams, Variant};
//!
//! let p = MiningParams::from_total(1.0 / 600.0, 0.25, 10.0).unwrap();
//! let engine = BoundEngine::new(p, Variant::Canonical).unwrap();
//! let upper = engine.depth_upper(30).unwrap();
//! let lower = engine.depth_lower(30).unwrap();
//! assert!(lower.value.value <= upper.value.value);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod balanced;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod params;
pub mod probability;
pub mod series;
pub mod sim;
pub mod stats;
pub mod throughput;

pub use balanced::{balance_params, cdf_x, cdf_xk, simulate_chain, BalanceParams};
pub use bounds::{
    beta_star, chernoff_constants, tolerance_check, BoundEngine, BoundKind, BoundReport, Direction, Variant,
};
pub use error::{Error, Result};
pub use params::MiningParams;
pub use probability::{DiscreteCdf, Prob};
pub use series::{mgf_m, pgf_eval, pmf_series, PmfSeries};
pub use sim::{LeadDist, SimConfig, SimEstimate};
