//! Closed-form PMFs for one, two and three hops next to the general
//! evaluator.
//!
//!     cargo run --example closed_forms

use multihop_aoi::{pmf_dp, pmf_single_hop, pmf_three_hop_closed, pmf_two_hop_closed, PathConfig};

fn main() {
    let (p1, p2, p3) = (0.2, 0.5, 0.8);
    let dp1 = pmf_dp(&PathConfig::new(&[p1]).unwrap(), 10);
    let dp2 = pmf_dp(&PathConfig::new(&[p1, p2]).unwrap(), 10);
    let dp3 = pmf_dp(&PathConfig::new(&[p1, p2, p3]).unwrap(), 10);

    println!("age  1-hop closed / dp          2-hop closed / dp          3-hop closed / dp");
    for age in 0..=10 {
        println!(
            "{age:>3}  {:.10} / {:.10}  {:.10} / {:.10}  {:.10} / {:.10}",
            pmf_single_hop(p1, age),
            dp1.probs()[age],
            pmf_two_hop_closed(p1, p2, age),
            dp2.probs()[age],
            pmf_three_hop_closed(p1, p2, p3, age).unwrap(),
            dp3.probs()[age],
        );
    }

    // Equal rates have no three-hop closed form; the evaluator has no such gap.
    match pmf_three_hop_closed(0.9, 0.4, 0.4, 5) {
        Ok(v) => println!("unexpected closed form value {v}"),
        Err(e) => println!("\n(0.9, 0.4, 0.4): {e}"),
    }
}
