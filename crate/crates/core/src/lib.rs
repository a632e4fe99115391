//! Exact age-of-information distribution at the receiver of an N-hop line
//! network whose links lose packets independently, plus a discrete-time
//! simulator of the same network to check it against.
//!
//! * [`model`]: path description, truncated age PMFs, slot merging.
//! * [`analytic`]: closed forms, the hop-by-hop recursion, the linear-time
//!   evaluator, means and quantiles.
//! * [`simulator`]: seeded Monte Carlo runs.
//! * [`stats`]: analytic-versus-empirical comparison.
//! * [`cli`]: the `aoi` command-line front end.
//!
//! Ages are counted in sampling periods.

pub mod analytic;
pub mod cli;
pub mod model;
pub mod simulator;
pub mod stats;

pub use analytic::{
    ccdf, expected_age, icdf, pmf_auto_truncate, pmf_dp, pmf_recursive_literal, pmf_single_hop,
    pmf_three_hop_closed, pmf_two_hop_closed, AnalyticError, QuantileQuery,
};
pub use model::{merge_slots, pmf_mean, validate_path, AgePmf, LinkBudget, MeanEstimate, ModelError, PathConfig};
pub use simulator::{EmpiricalDist, SimConfig, SimError, SimResult};
pub use stats::{compare, normalize, total_variation, ComparisonReport, StatsError};
