//! Seeded Monte Carlo run of a 3-hop line network: mean age, mean peak age
//! and the number of end-to-end deliveries.
//!
//!     cargo run --release --example simulate_line_network -- 0.9,0.4,0.4

use multihop_aoi::simulator::{self, SimConfig};
use multihop_aoi::{expected_age, PathConfig};

fn main() {
    let probs: Vec<f64> = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "0.9,0.4,0.4".into())
        .split(',')
        .map(|s| s.trim().parse().expect("loss probability"))
        .collect();
    let path = PathConfig::new(&probs).expect("valid path");

    let config = SimConfig::new(path.clone(), 100_000, 100, 1);
    let result = simulator::run(&config).unwrap();

    println!("path            {probs:?}");
    println!("samples         {}", result.empirical.total());
    println!("mean age        {:.4} (sd {:.4}; analytic {:.4})", result.mean_age.mean, result.mean_age.std_dev, expected_age(&path));
    println!("mean peak age   {:.4} (sd {:.4})", result.mean_peak_age.mean, result.mean_peak_age.std_dev);
    println!("deliveries      {}", result.deliveries);
    println!("largest age     {}", result.empirical.max_age().unwrap_or(0));
}
