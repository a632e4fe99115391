//! Age guaranteed with a given reliability: the smallest age exceeded with
//! probability at most eps, for eps = 1e-1 .. 1e-5.
//!
//!     cargo run --example reliability_quantiles

use multihop_aoi::cli::{SCENARIO_S1, SCENARIO_S2};
use multihop_aoi::{icdf, PathConfig, QuantileQuery};

fn main() {
    let query = QuantileQuery::reliability_decades();
    let s1 = icdf(&PathConfig::new(&SCENARIO_S1).unwrap(), &query).unwrap();
    let s2 = icdf(&PathConfig::new(&SCENARIO_S2).unwrap(), &query).unwrap();

    println!("{:>8}  {:>4}  {:>4}  {:>4}", "eps", "S1", "S2", "gap");
    for ((eps, a), b) in query.targets().iter().zip(&s1).zip(&s2) {
        println!("{eps:>8.0e}  {a:>4}  {b:>4}  {:>4}", *a as i64 - *b as i64);
    }
}
