//! Domain types shared by the analytic engine, the simulator and the
//! comparison code: the line-network description and the truncated age
//! distribution.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on `sum(probs) + tail_mass == 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("path must contain at least one link")]
    EmptyPath,
    #[error("loss probability {value} on link {link} is outside [0, 1)")]
    ProbOutOfRange { link: usize, value: f64 },
    #[error("{slots} slots per period cannot schedule {hops} hops (need slots >= hops)")]
    InfeasibleSchedule { slots: u32, hops: usize },
    #[error("slot count must be at least 1")]
    ZeroSlots,
    #[error("invalid age distribution: {0}")]
    InvalidPmf(String),
}

/// An N-hop line network, described by the loss probability of each link in
/// path order (source side first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPath", into = "RawPath")]
pub struct PathConfig {
    loss_probs: Vec<f64>,
    slots_per_period: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct RawPath {
    loss_probs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slots_per_period: Option<u32>,
}

impl TryFrom<RawPath> for PathConfig {
    type Error = ModelError;

    fn try_from(raw: RawPath) -> Result<Self, Self::Error> {
        validate_path(&raw.loss_probs, raw.slots_per_period)
    }
}

impl From<PathConfig> for RawPath {
    fn from(path: PathConfig) -> Self {
        RawPath {
            loss_probs: path.loss_probs,
            slots_per_period: path.slots_per_period,
        }
    }
}

/// Checks the model constraints and builds a [`PathConfig`].
///
/// Every link needs `0 <= p < 1`: with `p = 1` the age grows without bound
/// and there is no stationary distribution. When the number of slots per
/// sampling period is given it must be at least the hop count, otherwise the
/// in-order schedule cannot give every link a slot.
pub fn validate_path(raw_probs: &[f64], slots_per_period: Option<u32>) -> Result<PathConfig, ModelError> {
    if raw_probs.is_empty() {
        return Err(ModelError::EmptyPath);
    }
    for (i, &p) in raw_probs.iter().enumerate() {
        // NaN fails both comparisons
        if !(0.0..1.0).contains(&p) {
            return Err(ModelError::ProbOutOfRange { link: i + 1, value: p });
        }
    }
    if let Some(m) = slots_per_period {
        if (m as usize) < raw_probs.len() {
            return Err(ModelError::InfeasibleSchedule {
                slots: m,
                hops: raw_probs.len(),
            });
        }
    }
    Ok(PathConfig {
        loss_probs: raw_probs.to_vec(),
        slots_per_period,
    })
}

impl PathConfig {
    pub fn new(loss_probs: &[f64]) -> Result<Self, ModelError> {
        validate_path(loss_probs, None)
    }

    pub fn loss_probs(&self) -> &[f64] {
        &self.loss_probs
    }

    pub fn hops(&self) -> usize {
        self.loss_probs.len()
    }

    pub fn slots_per_period(&self) -> Option<u32> {
        self.slots_per_period
    }

    /// Largest per-link loss probability; the geometric decay rate of the
    /// age distribution's tail.
    pub fn max_loss(&self) -> f64 {
        self.loss_probs.iter().copied().fold(0.0, f64::max)
    }

    /// The first `hops` links of this path.
    pub fn prefix(&self, hops: usize) -> Result<PathConfig, ModelError> {
        validate_path(&self.loss_probs[..hops.min(self.hops())], None)
    }
}

/// A link that owns `slot_count` consecutive transmission slots per period,
/// each failing independently with `per_slot_loss`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    per_slot_loss: f64,
    slot_count: u32,
}

impl LinkBudget {
    pub fn new(per_slot_loss: f64, slot_count: u32) -> Result<Self, ModelError> {
        if !(0.0..1.0).contains(&per_slot_loss) {
            return Err(ModelError::ProbOutOfRange {
                link: 1,
                value: per_slot_loss,
            });
        }
        if slot_count == 0 {
            return Err(ModelError::ZeroSlots);
        }
        Ok(LinkBudget {
            per_slot_loss,
            slot_count,
        })
    }

    pub fn per_slot_loss(&self) -> f64 {
        self.per_slot_loss
    }

    pub fn slot_count(&self) -> u32 {
        self.slot_count
    }
}

/// Effective per-period loss probability of a link with several consecutive
/// slots: the packet is lost only if every slot fails.
pub fn merge_slots(budget: LinkBudget) -> f64 {
    let mut p = 1.0;
    for _ in 0..budget.slot_count {
        p *= budget.per_slot_loss;
    }
    p
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if f64::abs(sum) >= f64::abs(v) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Probability mass function over ages `0..=horizon()` (in sampling periods)
/// with the mass above the horizon kept explicitly in `tail_mass`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgePmf {
    probs: Vec<f64>,
    tail_mass: f64,
}

impl AgePmf {
    pub fn new(probs: Vec<f64>, tail_mass: f64) -> Result<Self, ModelError> {
        if probs.is_empty() {
            return Err(ModelError::InvalidPmf("no ages".into()));
        }
        if let Some((age, p)) = probs.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(ModelError::InvalidPmf(format!("probability {p} at age {age}")));
        }
        if !(0.0..=1.0).contains(&tail_mass) {
            return Err(ModelError::InvalidPmf(format!("tail mass {tail_mass}")));
        }
        let total = compensated_sum(probs.iter().copied().chain(std::iter::once(tail_mass)));
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ModelError::InvalidPmf(format!("total mass {total}")));
        }
        Ok(AgePmf { probs, tail_mass })
    }

    pub(crate) fn from_parts(probs: Vec<f64>, tail_mass: f64) -> Self {
        debug_assert!(!probs.is_empty());
        debug_assert!(
            (compensated_sum(probs.iter().copied().chain(std::iter::once(tail_mass))) - 1.0).abs()
                <= NORMALIZATION_TOL
        );
        AgePmf { probs, tail_mass }
    }

    /// All mass on a single age.
    pub fn point(age: usize) -> Self {
        let mut probs = vec![0.0; age + 1];
        probs[age] = 1.0;
        AgePmf { probs, tail_mass: 0.0 }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Largest age carried explicitly.
    pub fn horizon(&self) -> usize {
        self.probs.len() - 1
    }

    /// Probability of `age`; `None` above the horizon, where only the
    /// aggregate tail is known.
    pub fn prob(&self, age: usize) -> Option<f64> {
        self.probs.get(age).copied()
    }

    /// `Pr[age > delta]`, or `None` when `delta` is above the horizon.
    pub fn ccdf(&self, delta: usize) -> Option<f64> {
        if delta > self.horizon() {
            return None;
        }
        Some(self.probs[delta + 1..].iter().rev().fold(self.tail_mass, |acc, p| acc + p))
    }

    /// `ccdf(delta)` for every age up to the horizon, accumulated from the
    /// top so small tail terms are added first.
    pub fn ccdf_table(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.probs.len()];
        let mut acc = self.tail_mass;
        for delta in (0..self.probs.len()).rev() {
            out[delta] = acc;
            acc += self.probs[delta];
        }
        out
    }

    /// Re-expresses the distribution on a shorter or longer horizon. Mass
    /// above a shorter horizon moves into the tail; a longer horizon pads
    /// with zeros and keeps the tail unchanged.
    pub fn with_horizon(&self, horizon: usize) -> AgePmf {
        if horizon >= self.horizon() {
            let mut probs = self.probs.clone();
            probs.resize(horizon + 1, 0.0);
            return AgePmf {
                probs,
                tail_mass: self.tail_mass,
            };
        }
        let moved = compensated_sum(self.probs[horizon + 1..].iter().copied());
        AgePmf {
            probs: self.probs[..=horizon].to_vec(),
            tail_mass: self.tail_mass + moved,
        }
    }
}

/// Mean of a truncated distribution, split into the explicit part and the
/// estimate for the mass beyond the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    /// `sum(delta * probs[delta])` over the explicit horizon.
    pub truncated: f64,
    /// Upper bound on the tail's contribution `E[age; age > horizon]`.
    pub tail_correction: f64,
}

impl MeanEstimate {
    pub fn value(&self) -> f64 {
        self.truncated + self.tail_correction
    }
}

/// Tail-corrected mean of `pmf`.
///
/// Beyond the horizon the tail is bounded by a geometric continuation whose
/// per-step survival ratio is the larger of `tail_bound_rate` (the dominant
/// loss probability of the path) and the survival ratio observed at the
/// horizon. For the log-concave distributions produced by a line network the
/// survival ratio only shrinks with age toward `max p_i`, so this bounds the
/// tail's contribution from above.
pub fn pmf_mean(pmf: &AgePmf, tail_bound_rate: f64) -> MeanEstimate {
    let truncated = compensated_sum(pmf.probs.iter().enumerate().map(|(d, p)| d as f64 * p));
    let tail = pmf.tail_mass;
    if tail <= 0.0 {
        return MeanEstimate {
            truncated,
            tail_correction: 0.0,
        };
    }
    let last = pmf.probs[pmf.horizon()];
    let observed = tail / (last + tail);
    let q = tail_bound_rate.max(observed).min(1.0 - f64::EPSILON);
    let tail_correction = tail * ((pmf.horizon() + 1) as f64 + q / (1.0 - q));
    MeanEstimate {
        truncated,
        tail_correction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_paper_scenario() {
        let path = validate_path(&[0.9, 0.4, 0.4], None).unwrap();
        assert_eq!(path.hops(), 3);
        assert_eq!(path.max_loss(), 0.9);
    }

    #[test]
    fn rejects_bad_paths() {
        assert_eq!(validate_path(&[], None), Err(ModelError::EmptyPath));
        assert_eq!(
            validate_path(&[0.5, 1.0], None),
            Err(ModelError::ProbOutOfRange { link: 2, value: 1.0 })
        );
        assert!(matches!(
            validate_path(&[f64::NAN], None),
            Err(ModelError::ProbOutOfRange { .. })
        ));
        assert!(matches!(
            validate_path(&[-0.1], None),
            Err(ModelError::ProbOutOfRange { .. })
        ));
        assert_eq!(
            validate_path(&[0.5, 0.5, 0.5], Some(2)),
            Err(ModelError::InfeasibleSchedule { slots: 2, hops: 3 })
        );
        assert!(validate_path(&[0.5, 0.5, 0.5], Some(3)).is_ok());
    }

    #[test]
    fn path_json_is_validated() {
        let ok: PathConfig = serde_json::from_str(r#"{"loss_probs":[0.1,0.2],"slots_per_period":7}"#).unwrap();
        assert_eq!(ok.slots_per_period(), Some(7));
        assert!(serde_json::from_str::<PathConfig>(r#"{"loss_probs":[1.0]}"#).is_err());
    }

    #[test]
    fn merge_slots_examples() {
        assert_eq!(merge_slots(LinkBudget::new(0.5, 3).unwrap()), 0.125);
        assert_eq!(merge_slots(LinkBudget::new(0.7, 1).unwrap()), 0.7);
        assert_eq!(merge_slots(LinkBudget::new(0.0, 5).unwrap()), 0.0);
        assert_eq!(LinkBudget::new(0.5, 0), Err(ModelError::ZeroSlots));
        assert!(LinkBudget::new(1.0, 2).is_err());
    }

    #[test]
    fn merge_slots_decreases_with_slot_count() {
        for p in [0.01, 0.3, 0.5, 0.99] {
            let mut prev = 1.0;
            for l in 1..20 {
                let q = merge_slots(LinkBudget::new(p, l).unwrap());
                assert!(q < prev);
                prev = q;
            }
        }
    }

    #[test]
    fn pmf_rejects_unnormalized() {
        assert!(AgePmf::new(vec![0.5, 0.4], 0.0).is_err());
        assert!(AgePmf::new(vec![0.5, 0.4], 0.1).is_ok());
        assert!(AgePmf::new(vec![], 1.0).is_err());
        assert!(AgePmf::new(vec![1.5, -0.5], 0.0).is_err());
        assert!(AgePmf::new(vec![1.0], -0.0).is_ok());
    }

    #[test]
    fn mean_of_point_mass() {
        let m = pmf_mean(&AgePmf::point(0), 0.0);
        assert_eq!(m.value(), 0.0);
        assert_eq!(m.tail_correction, 0.0);
    }

    #[test]
    fn mean_of_truncated_geometric() {
        // Pr[age = d] = 0.5^(d+1), tail above 60 is 0.5^61
        let probs: Vec<f64> = (0..=60).map(|d| 0.5f64.powi(d + 1)).collect();
        let pmf = AgePmf::new(probs, 0.5f64.powi(61)).unwrap();
        let m = pmf_mean(&pmf, 0.5);
        assert!((m.value() - 1.0).abs() < 1e-12);
        assert!(m.tail_correction < 61.0 * 2f64.powi(-60));
        // the geometric tail continuation is exact here
        assert!((m.tail_correction - 0.5f64.powi(61) * 62.0).abs() < 1e-25);
    }

    #[test]
    fn ccdf_and_horizon() {
        let pmf = AgePmf::new(vec![0.5, 0.25, 0.125], 0.125).unwrap();
        assert_eq!(pmf.ccdf(0), Some(0.5));
        assert_eq!(pmf.ccdf(2), Some(0.125));
        assert_eq!(pmf.ccdf(3), None);
        assert_eq!(pmf.ccdf_table(), vec![0.5, 0.25, 0.125]);
        let short = pmf.with_horizon(0);
        assert_eq!(short.probs(), &[0.5]);
        assert_eq!(short.tail_mass(), 0.5);
        let long = pmf.with_horizon(4);
        assert_eq!(long.probs(), &[0.5, 0.25, 0.125, 0.0, 0.0]);
        assert_eq!(long.tail_mass(), 0.125);
    }
}
