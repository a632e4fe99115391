//! Discrete-time Monte Carlo simulation of the line network.
//!
//! Once per sampling period every link gets one transmission attempt, in path
//! order, so a fresh update can cross all hops within the period it was
//! generated. A successful link copies the upstream node's age; a failed one
//! leaves the downstream node one period older. The receiver's age is read
//! at the end of each period.
//!
//! Randomness: repetition `r` draws from a ChaCha8 stream keyed by `seed`
//! with stream id `r`; within a repetition the draws are consumed period by
//! period, link by link. Results are therefore a pure function of the
//! [`SimConfig`] and do not depend on how repetitions are scheduled across
//! threads.

use std::collections::BTreeMap;

use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::PathConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("periods must be at least 1")]
    NoPeriods,
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error("warmup of {warmup} periods leaves nothing to record out of {periods}")]
    WarmupTooLong { warmup: u64, periods: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub path: PathConfig,
    /// Sampling periods per repetition.
    pub periods: u64,
    pub repetitions: u32,
    pub seed: u64,
    /// Leading periods of each repetition excluded from the statistics.
    pub warmup: u64,
}

impl SimConfig {
    pub fn new(path: PathConfig, periods: u64, repetitions: u32, seed: u64) -> Self {
        SimConfig {
            path,
            periods,
            repetitions,
            seed,
            warmup: 0,
        }
    }

    pub fn with_warmup(mut self, warmup: u64) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.periods == 0 {
            return Err(SimError::NoPeriods);
        }
        if self.repetitions == 0 {
            return Err(SimError::NoRepetitions);
        }
        if self.warmup >= self.periods {
            return Err(SimError::WarmupTooLong {
                warmup: self.warmup,
                periods: self.periods,
            });
        }
        Ok(())
    }

    fn recorded_periods(&self) -> u64 {
        self.periods - self.warmup
    }
}

/// Observed receiver ages and how often each occurred.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EmpiricalDist {
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl EmpiricalDist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, age: u64) {
        self.add(age, 1);
    }

    pub fn add(&mut self, age: u64, count: u64) {
        if count > 0 {
            *self.counts.entry(age).or_insert(0) += count;
            self.total += count;
        }
    }

    pub fn merge(&mut self, other: &EmpiricalDist) {
        for (&age, &count) in &other.counts {
            self.add(age, count);
        }
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn count(&self, age: u64) -> u64 {
        self.counts.get(&age).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn max_age(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    pub fn mean(&self) -> Option<f64> {
        if self.total == 0 {
            return None;
        }
        let sum: f64 = self.counts.iter().map(|(&a, &c)| a as f64 * c as f64).sum();
        Some(sum / self.total as f64)
    }
}

impl FromIterator<(u64, u64)> for EmpiricalDist {
    fn from_iter<I: IntoIterator<Item = (u64, u64)>>(iter: I) -> Self {
        let mut dist = EmpiricalDist::new();
        for (age, count) in iter {
            dist.add(age, count);
        }
        dist
    }
}

/// A pooled estimate together with the standard deviation of the
/// per-repetition estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    /// Receiver ages after warmup, pooled over repetitions.
    pub empirical: EmpiricalDist,
    pub mean_age: Estimate,
    /// Mean of all peak samples; NaN when no end-to-end reset was seen.
    pub mean_peak_age: Estimate,
    /// End-to-end age resets observed after warmup.
    pub deliveries: u64,
}

/// Advances per-hop ages by one sampling period.
///
/// `ages[0]` is the source and stays 0; `outcomes[n - 1]` is the result of
/// the attempt on link `n`. Links are applied in path order, so a success
/// forwards whatever the upstream node holds after its own update this
/// period.
pub fn step(ages: &[u64], outcomes: &[bool]) -> Vec<u64> {
    let mut next = ages.to_vec();
    step_in_place(&mut next, outcomes);
    next
}

fn step_in_place(ages: &mut [u64], outcomes: &[bool]) {
    debug_assert_eq!(ages.len(), outcomes.len() + 1);
    ages[0] = 0;
    for (n, &ok) in outcomes.iter().enumerate() {
        ages[n + 1] = if ok { ages[n] } else { ages[n + 1] + 1 };
    }
}

/// Everything one repetition contributes to the pooled result.
#[derive(Debug, Default)]
struct RepetitionStats {
    histogram: Vec<u64>,
    age_sum: u64,
    peak_sum: u64,
    peaks: u64,
}

impl RepetitionStats {
    fn mean_age(&self, samples: u64) -> f64 {
        self.age_sum as f64 / samples as f64
    }

    fn mean_peak(&self) -> Option<f64> {
        (self.peaks > 0).then(|| self.peak_sum as f64 / self.peaks as f64)
    }
}

/// Random stream for repetition `rep`.
pub fn repetition_rng(seed: u64, rep: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

fn run_repetition(config: &SimConfig, rep: u32) -> RepetitionStats {
    let links: Vec<Bernoulli> = config
        .path
        .loss_probs()
        .iter()
        .map(|&p| Bernoulli::new(1.0 - p).expect("validated loss probability"))
        .collect();
    let mut rng = repetition_rng(config.seed, rep);
    let hops = links.len();
    let mut ages = vec![0u64; hops + 1];
    let mut outcomes = vec![false; hops];
    let mut stats = RepetitionStats::default();

    for k in 0..config.periods {
        let before = ages[hops];
        for (slot, link) in outcomes.iter_mut().zip(&links) {
            *slot = link.sample(&mut rng);
        }
        step_in_place(&mut ages, &outcomes);
        if k < config.warmup {
            continue;
        }
        let age = ages[hops];
        let idx = age as usize;
        if idx >= stats.histogram.len() {
            stats.histogram.resize(idx + 1, 0);
        }
        stats.histogram[idx] += 1;
        stats.age_sum += age;
        if age != before + 1 {
            stats.peak_sum += before + 1;
            stats.peaks += 1;
        }
    }
    stats
}

fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

/// Runs every repetition (in parallel on the current rayon pool) and pools
/// the statistics in repetition order.
pub fn run(config: &SimConfig) -> Result<SimResult, SimError> {
    config.validate()?;
    let per_rep: Vec<RepetitionStats> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(config, rep))
        .collect();

    let samples = config.recorded_periods();
    let mut histogram: Vec<u64> = Vec::new();
    let mut age_sum = 0u64;
    let mut peak_sum = 0u64;
    let mut peaks = 0u64;
    for stats in &per_rep {
        if stats.histogram.len() > histogram.len() {
            histogram.resize(stats.histogram.len(), 0);
        }
        for (total, c) in histogram.iter_mut().zip(&stats.histogram) {
            *total += c;
        }
        age_sum += stats.age_sum;
        peak_sum += stats.peak_sum;
        peaks += stats.peaks;
    }
    let empirical: EmpiricalDist = histogram
        .iter()
        .enumerate()
        .map(|(age, &count)| (age as u64, count))
        .collect();

    let rep_means: Vec<f64> = per_rep.iter().map(|s| s.mean_age(samples)).collect();
    let rep_peaks: Vec<f64> = per_rep.iter().filter_map(RepetitionStats::mean_peak).collect();

    Ok(SimResult {
        mean_age: Estimate {
            mean: age_sum as f64 / empirical.total() as f64,
            std_dev: std_dev(&rep_means),
        },
        mean_peak_age: Estimate {
            mean: if peaks > 0 { peak_sum as f64 / peaks as f64 } else { f64::NAN },
            std_dev: std_dev(&rep_peaks),
        },
        deliveries: peaks,
        empirical,
    })
}
