//! Exact stationary distribution of the age at the receiver.
//!
//! The age after `n` hops is the age after `n - 1` hops plus an independent
//! geometric delay contributed by link `n`, so the receiver's distribution is
//! the convolution of one geometric PMF per link. Three evaluators are
//! provided:
//!
//! * closed forms for one, two and three hops,
//! * [`pmf_recursive_literal`], the hop-by-hop convolution recursion
//!   evaluated as written (with memoized subproblems),
//! * [`pmf_dp`], an `O(N * horizon)` table fill using
//!   `f(d, n) = p_n f(d - 1, n) + (1 - p_n) f(d, n - 1)`.
//!
//! [`pmf_dp`] is the canonical evaluator; the others exist as cross-checks.
//!
//! The literal recursion is `O(N * d^2)` even with memoization: each
//! `(d, n)` entry is a sum over `d + 1` terms. Only the two-term recurrence
//! reaches linear cost per hop.

use thiserror::Error;

use crate::model::{AgePmf, ModelError, PathConfig};

/// Closed forms treat two loss probabilities closer than this as equal.
pub const EQUAL_RATE_EPS: f64 = 1e-9;

/// Default upper limit on the horizon chosen by [`pmf_auto_truncate`].
pub const DEFAULT_HORIZON_CAP: usize = 10_000_000;

/// First non-trivial horizon probed by [`pmf_auto_truncate`].
const FIRST_PROBE: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("loss probabilities {0:?} are too close for the closed form; use pmf_dp")]
    DegenerateRates(Vec<f64>),
    #[error("tail tolerance not reached below the horizon cap of {cap} ages")]
    HorizonOverflow { cap: usize },
    #[error("age {delta} is beyond the distribution horizon {horizon}")]
    OutOfHorizon { delta: usize, horizon: usize },
    #[error("tail tolerance {0} must lie in (0, 1)")]
    InvalidTolerance(f64),
    #[error("invalid quantile query: {0}")]
    InvalidQuery(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn pow_int(base: f64, exp: usize) -> f64 {
    match i32::try_from(exp) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(exp as f64),
    }
}

/// `Pr[age = delta]` behind a single link: `delta` failures after a success.
pub fn pmf_single_hop(p: f64, delta: usize) -> f64 {
    (1.0 - p) * pow_int(p, delta)
}

/// Two-hop closed form.
///
/// When the two rates coincide (within [`EQUAL_RATE_EPS`]) the quotient is
/// replaced by its limit `(delta + 1)(1 - p)^2 p^delta` at the midpoint.
pub fn pmf_two_hop_closed(p1: f64, p2: f64, delta: usize) -> f64 {
    if (p1 - p2).abs() > EQUAL_RATE_EPS {
        (1.0 - p1) * (1.0 - p2) * (pow_int(p2, delta + 1) - pow_int(p1, delta + 1)) / (p2 - p1)
    } else {
        let p = 0.5 * (p1 + p2);
        (delta + 1) as f64 * (1.0 - p) * (1.0 - p) * pow_int(p, delta)
    }
}

/// Three-hop closed form. Requires pairwise distinct rates.
pub fn pmf_three_hop_closed(p1: f64, p2: f64, p3: f64, delta: usize) -> Result<f64, AnalyticError> {
    let rates = [p1, p2, p3];
    for i in 0..3 {
        for j in i + 1..3 {
            if (rates[i] - rates[j]).abs() <= EQUAL_RATE_EPS {
                return Err(AnalyticError::DegenerateRates(rates.to_vec()));
            }
        }
    }
    let scale = (1.0 - p1) * (1.0 - p2) * (1.0 - p3) / (p2 - p1);
    let p3_pow = pow_int(p3, delta + 1);
    let term = |pj: f64| pj * (p3_pow - pow_int(pj, delta + 1)) / (p3 - pj);
    Ok(scale * (term(p2) - term(p1)))
}

/// Hop-by-hop recursion: the single-hop PMF for the first link, then for
/// each further link a sum over the upstream age weighted by the extra
/// geometric delay. Subproblems `(delta', n)` are memoized.
pub fn pmf_recursive_literal(delta: usize, path: &PathConfig) -> f64 {
    let probs = path.loss_probs();
    let mut memo: Vec<Vec<Option<f64>>> = vec![vec![None; delta + 1]; probs.len()];
    recurse(delta, probs.len(), probs, &mut memo)
}

fn recurse(delta: usize, hops: usize, probs: &[f64], memo: &mut [Vec<Option<f64>>]) -> f64 {
    if let Some(v) = memo[hops - 1][delta] {
        return v;
    }
    let p = probs[hops - 1];
    let value = if hops == 1 {
        let mut pow = 1.0;
        for _ in 0..delta {
            pow *= p;
        }
        (1.0 - p) * pow
    } else {
        let mut acc = 0.0;
        // running power p^(delta - upstream)
        let mut pow = 1.0;
        for upstream in (0..=delta).rev() {
            acc += (1.0 - p) * pow * recurse(upstream, hops - 1, probs, memo);
            pow *= p;
        }
        acc
    };
    memo[hops - 1][delta] = Some(value);
    value
}

/// Receiver age distribution over `0..=delta_max`, with the exact tail mass.
///
/// The tail is computed with the survival analogue of the PMF recurrence,
/// `S(d, n) = p_n S(d - 1, n) + (1 - p_n) S(d, n - 1)`, instead of
/// `1 - sum(probs)`, so a tail of 1e-15 is resolved rather than lost to
/// cancellation.
pub fn pmf_dp(path: &PathConfig, delta_max: usize) -> AgePmf {
    let len = delta_max + 1;
    // zero hops: age is 0 with certainty
    let mut pmf = vec![0.0; len];
    pmf[0] = 1.0;
    let mut survival = vec![0.0; len];
    for &p in path.loss_probs() {
        let q = 1.0 - p;
        let mut prev_f = 0.0;
        let mut prev_s = 1.0;
        for d in 0..len {
            let f = p * prev_f + q * pmf[d];
            let s = p * prev_s + q * survival[d];
            pmf[d] = f;
            survival[d] = s;
            prev_f = f;
            prev_s = s;
        }
    }
    let tail = survival[delta_max].max(0.0);
    AgePmf::from_parts(pmf, tail)
}

/// [`pmf_dp`] with the horizon grown until the tail mass drops below
/// `tail_tol`. Probes horizon 0, then 64, doubling up to `cap`.
pub fn pmf_auto_truncate_with_cap(path: &PathConfig, tail_tol: f64, cap: usize) -> Result<AgePmf, AnalyticError> {
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(AnalyticError::InvalidTolerance(tail_tol));
    }
    let mut horizon = 0;
    loop {
        let pmf = pmf_dp(path, horizon);
        if pmf.tail_mass() < tail_tol {
            return Ok(pmf);
        }
        if horizon >= cap {
            return Err(AnalyticError::HorizonOverflow { cap });
        }
        horizon = if horizon == 0 { FIRST_PROBE } else { horizon.saturating_mul(2) }.min(cap);
    }
}

/// [`pmf_auto_truncate_with_cap`] with [`DEFAULT_HORIZON_CAP`].
pub fn pmf_auto_truncate(path: &PathConfig, tail_tol: f64) -> Result<AgePmf, AnalyticError> {
    pmf_auto_truncate_with_cap(path, tail_tol, DEFAULT_HORIZON_CAP)
}

/// Mean receiver age: each link adds a geometric delay of mean `p / (1 - p)`.
pub fn expected_age(path: &PathConfig) -> f64 {
    path.loss_probs().iter().map(|p| p / (1.0 - p)).sum()
}

/// `Pr[age > delta]`.
pub fn ccdf(pmf: &AgePmf, delta: usize) -> Result<f64, AnalyticError> {
    pmf.ccdf(delta).ok_or(AnalyticError::OutOfHorizon {
        delta,
        horizon: pmf.horizon(),
    })
}

/// Tail probabilities `eps` at which to read the inverse CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileQuery {
    targets: Vec<f64>,
}

impl QuantileQuery {
    pub fn new(targets: Vec<f64>) -> Result<Self, AnalyticError> {
        if targets.is_empty() {
            return Err(AnalyticError::InvalidQuery("no targets".into()));
        }
        if let Some(t) = targets.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(AnalyticError::InvalidQuery(format!("target {t} is outside (0, 1)")));
        }
        Ok(QuantileQuery { targets })
    }

    /// 1e-1 down to 1e-5.
    pub fn reliability_decades() -> Self {
        QuantileQuery {
            targets: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
        }
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}

/// Smallest `delta` with `Pr[age > delta] <= eps` inside the horizon.
pub fn quantile_in(pmf: &AgePmf, eps: f64) -> Option<usize> {
    pmf.ccdf_table().iter().position(|&s| s <= eps)
}

/// Receiver age that is exceeded with probability at most `eps`, for each
/// target in `query`.
pub fn icdf(path: &PathConfig, query: &QuantileQuery) -> Result<Vec<usize>, AnalyticError> {
    let min_target = query.targets.iter().copied().fold(f64::INFINITY, f64::min);
    let pmf = pmf_auto_truncate(path, min_target / 100.0)?;
    let table = pmf.ccdf_table();
    query
        .targets
        .iter()
        .map(|&eps| {
            table
                .iter()
                .position(|&s| s <= eps)
                .ok_or(AnalyticError::HorizonOverflow { cap: pmf.horizon() })
        })
        .collect()
}
