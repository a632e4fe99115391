//! PMF of the receiver age for the two 3-hop scenarios that share a mean
//! age of 31/3, up to age 50, as plot-ready CSV on stdout.
//!
//!     cargo run --example scenario_pmf > pmf.csv

use multihop_aoi::cli::{SCENARIO_S1, SCENARIO_S2};
use multihop_aoi::{expected_age, pmf_dp, PathConfig};

fn main() {
    let s1 = PathConfig::new(&SCENARIO_S1).unwrap();
    let s2 = PathConfig::new(&SCENARIO_S2).unwrap();
    eprintln!("mean age: S1 {:.4}, S2 {:.4}", expected_age(&s1), expected_age(&s2));

    let a = pmf_dp(&s1, 50);
    let b = pmf_dp(&s2, 50);
    println!("age,s1,s2");
    for (age, (x, y)) in a.probs().iter().zip(b.probs()).enumerate() {
        println!("{age},{x:.12e},{y:.12e}");
    }
    eprintln!("mass above 50: S1 {:.3e}, S2 {:.3e}", a.tail_mass(), b.tail_mass());
}
