//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use multihop_aoi::analytic::{self, QuantileQuery};
use multihop_aoi::cli::{self, Command, RunSpec, SCENARIO_S1, SCENARIO_S2};
use multihop_aoi::model::{pmf_mean, PathConfig};
use multihop_aoi::simulator::{self, SimConfig, SimResult};
use multihop_aoi::stats;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXACT_MEAN: f64 = 31.0 / 3.0;
const PAPER_PERIODS: u64 = 100_000;
const PAPER_REPS: u32 = 100;
const SIM_SEED: u64 = 2020;

/// icdf(1e-5) of S1 and S2, computed with pmf_dp and an independent numpy
/// convolution (horizon 2000).
const GOLDEN_ICDF_S1: usize = 110;
const GOLDEN_ICDF_S2: usize = 67;
/// Smallest age from which ccdf(S1) stays above ccdf(S2).
const GOLDEN_CROSSOVER: usize = 13;

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, fail: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn path(p: &[f64]) -> PathConfig {
    PathConfig::new(p).unwrap()
}

fn random_paths(count: usize, seed: u64) -> Vec<PathConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let hops = rng.random_range(1..=5);
            let probs: Vec<f64> = (0..hops).map(|_| rng.random_range(0.0..=0.95)).collect();
            path(&probs)
        })
        .collect()
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-290
}

fn geometric_convolution(probs: &[f64], horizon: usize) -> Vec<f64> {
    let mut acc = vec![0.0; horizon + 1];
    acc[0] = 1.0;
    for &p in probs {
        let geo: Vec<f64> = (0..=horizon).map(|d| (1.0 - p) * p.powi(d as i32)).collect();
        let mut next = vec![0.0; horizon + 1];
        for i in 0..=horizon {
            for j in 0..=horizon - i {
                next[i + j] += acc[i] * geo[j];
            }
        }
        acc = next;
    }
    acc
}

fn expected_via_cli(probs: &[f64]) -> Result<f64, String> {
    let spec = RunSpec {
        command: Some(Command::Expected),
        probs: Some(probs.to_vec()),
        ..Default::default()
    };
    let out = cli::execute(&spec).map_err(|e| e.to_string())?;
    out.lines().nth(1).and_then(|l| l.parse().ok()).ok_or(format!("bad output {out:?}"))
}

fn c1_expected_age() -> Outcome {
    let s1 = expected_via_cli(&SCENARIO_S1)?;
    let s2 = expected_via_cli(&SCENARIO_S2)?;
    let exact1 = analytic::expected_age(&path(&SCENARIO_S1));
    let exact2 = analytic::expected_age(&path(&SCENARIO_S2));
    check(
        [s1, s2, exact1, exact2].iter().all(|v| (v - EXACT_MEAN).abs() < 1e-4),
        format!("S1 {s1}, S2 {s2} (exact {exact1:.12}, {exact2:.12})"),
        format!("S1 {s1}, S2 {s2}, exact {exact1}, {exact2}"),
    )
}

fn c2_mean_consistency() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for p in random_paths(200, 2) {
        let pmf = analytic::pmf_auto_truncate(&p, 1e-12).map_err(|e| e.to_string())?;
        let gap = (pmf_mean(&pmf, p.max_loss()).value() - analytic::expected_age(&p)).abs();
        worst = worst.max(gap);
    }
    let elapsed = start.elapsed();
    check(
        worst < 1e-6 && elapsed < Duration::from_secs(5),
        format!("worst gap {worst:.2e} over 200 paths in {elapsed:.2?}"),
        format!("worst gap {worst:.2e}, {elapsed:.2?}"),
    )
}

fn c3_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut literal_pairs = 0usize;
    for p in random_paths(100, 3) {
        let dp = analytic::pmf_dp(&p, 60);
        for d in 0..=60 {
            let lit = analytic::pmf_recursive_literal(d, &p);
            if !rel_close(dp.probs()[d], lit, 1e-12) {
                return Err(format!("literal mismatch {:?} age {d}", p.loss_probs()));
            }
            literal_pairs += 1;
        }
        let conv = geometric_convolution(p.loss_probs(), 60);
        for d in 0..=60 {
            if !rel_close(dp.probs()[d], conv[d], 1e-12) {
                return Err(format!("convolution mismatch {:?} age {d}", p.loss_probs()));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let (mut two, mut three) = (0, 0);
    while two < 100 || three < 100 {
        let a: f64 = rng.random_range(0.0..=0.95);
        let b: f64 = rng.random_range(0.0..=0.95);
        let c: f64 = rng.random_range(0.0..=0.95);
        if two < 100 && (a - b).abs() > 0.05 {
            let dp = analytic::pmf_dp(&path(&[a, b]), 60);
            for d in 0..=60 {
                if !rel_close(dp.probs()[d], analytic::pmf_two_hop_closed(a, b, d), 1e-9) {
                    return Err(format!("two-hop mismatch ({a}, {b}) age {d}"));
                }
            }
            two += 1;
        }
        if three < 100 && (a - b).abs() > 0.05 && (a - c).abs() > 0.05 && (b - c).abs() > 0.05 {
            let dp = analytic::pmf_dp(&path(&[a, b, c]), 60);
            for d in 0..=60 {
                let cf = analytic::pmf_three_hop_closed(a, b, c, d).map_err(|e| e.to_string())?;
                if !rel_close(dp.probs()[d], cf, 1e-9) {
                    return Err(format!("three-hop mismatch ({a}, {b}, {c}) age {d}"));
                }
            }
            three += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        elapsed < Duration::from_secs(10),
        format!("{literal_pairs} literal + convolution checks, {two} two-hop and {three} three-hop paths in {elapsed:.2?}"),
        format!("too slow: {elapsed:.2?}"),
    )
}

fn paper_scale_run(probs: &[f64]) -> Result<SimResult, String> {
    let config = SimConfig::new(path(probs), PAPER_PERIODS, PAPER_REPS, SIM_SEED);
    simulator::run(&config).map_err(|e| e.to_string())
}

fn c4_simulation(s1: &SimResult, s2: &SimResult, elapsed: Duration) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = elapsed < Duration::from_secs(60);
    for (name, probs, sim) in [("S1", &SCENARIO_S1, s1), ("S2", &SCENARIO_S2, s2)] {
        let report = stats::compare(&path(probs), sim).map_err(|e| e.to_string())?;
        let rel = (sim.mean_age.mean - EXACT_MEAN).abs() / EXACT_MEAN;
        ok &= rel < 0.01 && report.tv_distance < 0.01;
        lines.push(format!(
            "{name}: mean {:.4} ({:.3}% off), TV {:.5}",
            sim.mean_age.mean,
            100.0 * rel,
            report.tv_distance
        ));
    }
    let msg = format!("{}; both runs {elapsed:.2?}", lines.join("; "));
    check(ok, msg.clone(), msg)
}

fn c5_reliability_gap() -> Outcome {
    let q = QuantileQuery::new(vec![1e-5]).unwrap();
    let a1 = analytic::icdf(&path(&SCENARIO_S1), &q).map_err(|e| e.to_string())?[0];
    let a2 = analytic::icdf(&path(&SCENARIO_S2), &q).map_err(|e| e.to_string())?[0];
    let gap = a1 as i64 - a2 as i64;
    check(
        a1 == GOLDEN_ICDF_S1 && a2 == GOLDEN_ICDF_S2 && (15..=50).contains(&gap),
        format!("icdf(1e-5): S1 {a1}, S2 {a2}, gap {gap}"),
        format!("icdf(1e-5): S1 {a1}, S2 {a2}, gap {gap}; golden {GOLDEN_ICDF_S1}/{GOLDEN_ICDF_S2}"),
    )
}

fn c6_peak_inversion(s1: &SimResult, s2: &SimResult) -> Outcome {
    let q = QuantileQuery::new(vec![1e-5]).unwrap();
    let a1 = analytic::icdf(&path(&SCENARIO_S1), &q).map_err(|e| e.to_string())?[0];
    let a2 = analytic::icdf(&path(&SCENARIO_S2), &q).map_err(|e| e.to_string())?[0];
    let (p1, p2) = (s1.mean_peak_age.mean, s2.mean_peak_age.mean);
    check(
        p1 < p2 && a1 > a2,
        format!("mean peak S1 {p1:.3} < S2 {p2:.3}, icdf(1e-5) S1 {a1} > S2 {a2}"),
        format!("mean peak S1 {p1:.3}, S2 {p2:.3}; icdf S1 {a1}, S2 {a2}"),
    )
}

fn c7_crossover() -> Outcome {
    let horizon = 2_000;
    let c1 = analytic::pmf_dp(&path(&SCENARIO_S1), horizon).ccdf_table();
    let c2 = analytic::pmf_dp(&path(&SCENARIO_S2), horizon).ccdf_table();
    // last age at which S1 is not strictly heavier
    let crossover = c1.iter().zip(&c2).rposition(|(a, b)| a <= b).map_or(0, |d| d + 1);
    check(
        crossover == GOLDEN_CROSSOVER && crossover < 50,
        format!("ccdf(S1) > ccdf(S2) for all ages {crossover}..={horizon}"),
        format!("crossover at {crossover}, golden {GOLDEN_CROSSOVER}"),
    )
}

fn c8_invariants() -> Outcome {
    let start = Instant::now();
    let paths = random_paths(200, 8);
    for p in &paths {
        let pmf = analytic::pmf_dp(p, 300);
        let total: f64 = pmf.probs().iter().sum::<f64>() + pmf.tail_mass();
        if (total - 1.0).abs() > 1e-12 || pmf.tail_mass() < 0.0 {
            return Err(format!("normalization {:?}: {total}", p.loss_probs()));
        }
        let mut reversed = p.loss_probs().to_vec();
        reversed.reverse();
        let rev = analytic::pmf_dp(&path(&reversed), 300);
        if pmf.probs().iter().zip(rev.probs()).any(|(a, b)| !rel_close(*a, *b, 1e-12)) {
            return Err(format!("permutation {:?}", p.loss_probs()));
        }
        let mut worse = p.loss_probs().to_vec();
        worse[0] = (worse[0] + 0.03).min(0.99);
        let base = pmf.ccdf_table();
        let more = analytic::pmf_dp(&path(&worse), 300).ccdf_table();
        if base.iter().zip(&more).any(|(a, b)| *b < *a - 1e-12) {
            return Err(format!("monotonicity {:?}", p.loss_probs()));
        }
        for eps in [1e-1, 1e-3, 1e-5] {
            let age = analytic::icdf(p, &QuantileQuery::new(vec![eps]).unwrap()).map_err(|e| e.to_string())?[0];
            let fine = analytic::pmf_auto_truncate(p, eps / 100.0).map_err(|e| e.to_string())?;
            let ok_at = fine.ccdf(age).unwrap() <= eps;
            let ok_below = age == 0 || fine.ccdf(age - 1).unwrap() > eps;
            if !(ok_at && ok_below) {
                return Err(format!("icdf round trip {:?} eps {eps}", p.loss_probs()));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let probs = [0.9, 0.4, 0.4, 0.7];
    let mut ages = vec![0u64; probs.len() + 1];
    for _ in 0..100_000 {
        let outcomes: Vec<bool> = probs.iter().map(|&p| rng.random::<f64>() >= p).collect();
        let next = simulator::step(&ages, &outcomes);
        for n in 1..next.len() {
            let member = next[n] == next[n - 1] || next[n] == ages[n] + 1;
            if next[0] != 0 || !member || next[n - 1] > next[n] {
                return Err(format!("update rule violated at {ages:?} -> {next:?}"));
            }
        }
        ages = next;
    }

    let spec = RunSpec {
        command: Some(Command::Simulate),
        preset: Some(cli::Preset::S1),
        periods: Some(5_000),
        reps: Some(8),
        seed: Some(9),
        ..Default::default()
    };
    let a = cli::execute(&spec).map_err(|e| e.to_string())?;
    let b = cli::execute(&spec).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(
        a == b && elapsed < Duration::from_secs(30),
        format!("{} paths, 100000 simulator steps, byte-identical reruns in {elapsed:.2?}", paths.len()),
        format!("determinism {} / {elapsed:.2?}", a == b),
    )
}

fn c9_performance() -> Outcome {
    let ten = path(&[0.9, 0.4, 0.4, 0.8, 0.7, 0.8, 0.5, 0.95, 0.1, 0.3]);
    let start = Instant::now();
    let pmf = analytic::pmf_dp(&ten, 10_000);
    let dp_time = start.elapsed();

    let five = path(&[0.9, 0.4, 0.4, 0.8, 0.7]);
    let start = Instant::now();
    let lit = analytic::pmf_recursive_literal(500, &five);
    let lit_time = start.elapsed();
    let dp500 = analytic::pmf_dp(&five, 500).probs()[500];
    check(
        dp_time < Duration::from_millis(100)
            && lit_time < Duration::from_secs(5)
            && pmf.probs().len() == 10_001
            && rel_close(lit, dp500, 1e-12),
        format!("pmf_dp N=10 horizon 10000 in {dp_time:.2?}; literal N=5 age 500 in {lit_time:.2?}"),
        format!("dp {dp_time:.2?}, literal {lit_time:.2?}, literal {lit} vs dp {dp500}"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let sims = paper_scale_run(&SCENARIO_S1).and_then(|s1| Ok((s1, paper_scale_run(&SCENARIO_S2)?)));
    let sim_time = start.elapsed();

    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 expected-AoI reproduction", c1_expected_age()),
        ("2 analytic mean consistency", c2_mean_consistency()),
        ("3 oracle equivalence", c3_oracle_equivalence()),
    ];
    match &sims {
        Ok((s1, s2)) => {
            results.push(("4 paper-scale simulation", c4_simulation(s1, s2, sim_time)));
            results.push(("5 reliability gap", c5_reliability_gap()));
            results.push(("6 peak-vs-reliability inversion", c6_peak_inversion(s1, s2)));
        }
        Err(e) => {
            results.push(("4 paper-scale simulation", Err(e.clone())));
            results.push(("5 reliability gap", c5_reliability_gap()));
            results.push(("6 peak-vs-reliability inversion", Err(e.clone())));
        }
    }
    results.push(("7 distribution-shape crossover", c7_crossover()));
    results.push(("8 invariant suites", c8_invariants()));
    results.push(("9 performance", c9_performance()));

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(msg) => println!("PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}: {msg}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
