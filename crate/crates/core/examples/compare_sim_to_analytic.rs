//! Simulated versus analytic PMF for both scenarios: total variation
//! distance, mean gap and the first few per-age residuals.
//!
//!     cargo run --release --example compare_sim_to_analytic

use multihop_aoi::cli::{SCENARIO_S1, SCENARIO_S2};
use multihop_aoi::simulator::{self, SimConfig};
use multihop_aoi::{compare, PathConfig};

fn main() {
    for (name, probs) in [("S1", SCENARIO_S1), ("S2", SCENARIO_S2)] {
        let path = PathConfig::new(&probs).unwrap();
        let sim = simulator::run(&SimConfig::new(path.clone(), 100_000, 100, 7)).unwrap();
        let report = compare(&path, &sim).unwrap();

        println!("{name} {probs:?}: {} samples", report.sample_count);
        println!("  total variation {:.5}", report.tv_distance);
        println!("  mean gap        {:.5}", report.mean_gap);
        for r in report.per_age_residuals.iter().take(8) {
            println!("  age {:>2}: sim {:.5}  exact {:.5}", r.age, r.empirical, r.analytic);
        }
    }
}
