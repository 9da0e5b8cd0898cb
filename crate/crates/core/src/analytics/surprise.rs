use std::fmt;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::world::{AgentId, LocationId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scope {
    Baseline,
    Day(u32),
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Baseline => f.write_str("baseline"),
            Scope::Day(d) => write!(f, "day:{d}"),
        }
    }
}

/// Fraction of time spent at each location over a scope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyDistribution {
    pub agent: AgentId,
    pub scope: Scope,
    pub probs: Vec<f64>,
    pub smoothing_alpha: f64,
}

/// Surprise of one day against the agent's baseline, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurpriseScore {
    pub agent: AgentId,
    pub day: u32,
    pub bits: f64,
}

/// `probs[x] = (count(x) + alpha) / (len + alpha·n)`.
pub fn occupancy_distribution(
    agent: AgentId,
    scope: Scope,
    path: &[LocationId],
    n_locations: usize,
    alpha: f64,
) -> Result<OccupancyDistribution, AnalyticsError> {
    if path.is_empty() {
        return Err(AnalyticsError::EmptyPath);
    }
    let mut counts = vec![0usize; n_locations];
    for &loc in path {
        *counts
            .get_mut(loc)
            .ok_or(AnalyticsError::UnknownLocation { location: loc, n: n_locations })? += 1;
    }
    let denom = path.len() as f64 + alpha * n_locations as f64;
    let probs = counts.into_iter().map(|c| (c as f64 + alpha) / denom).collect();
    Ok(OccupancyDistribution { agent, scope, probs, smoothing_alpha: alpha })
}

/// Relative entropy `Σ p·log₂(p/q)` with `0·log(0/q) = 0`, clamped at zero.
pub fn relative_entropy_bits(p: &[f64], q: &[f64]) -> Result<f64, AnalyticsError> {
    if p.len() != q.len() {
        return Err(AnalyticsError::DimensionMismatch(p.len(), q.len()));
    }
    let mut bits = 0.0;
    for (x, (&px, &qx)) in p.iter().zip(q).enumerate() {
        if px == 0.0 {
            continue;
        }
        if qx <= 0.0 {
            return Err(AnalyticsError::SupportViolation { location: x });
        }
        bits += px * (px / qx).log2();
    }
    Ok(bits.max(0.0))
}

/// How unusual a day was: relative entropy of its occupancy against the baseline.
pub fn surprise(day: &OccupancyDistribution, baseline: &OccupancyDistribution) -> Result<SurpriseScore, AnalyticsError> {
    let day_index = match day.scope {
        Scope::Day(d) => d,
        Scope::Baseline => 0,
    };
    Ok(SurpriseScore { agent: day.agent, day: day_index, bits: relative_entropy_bits(&day.probs, &baseline.probs)? })
}

/// Combines surprises of independent sources for the same agent and day by
/// summing them.
pub fn chain_combine(scores: &[SurpriseScore]) -> Result<SurpriseScore, AnalyticsError> {
    let first = scores.first().ok_or(AnalyticsError::Empty)?;
    if scores.iter().any(|s| s.agent != first.agent || s.day != first.day) {
        return Err(AnalyticsError::Mismatched);
    }
    Ok(SurpriseScore { agent: first.agent, day: first.day, bits: scores.iter().map(|s| s.bits).sum() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist(probs: &[f64]) -> OccupancyDistribution {
        OccupancyDistribution { agent: 0, scope: Scope::Day(0), probs: probs.to_vec(), smoothing_alpha: 0.0 }
    }

    #[test]
    fn counting_without_smoothing() {
        let d = occupancy_distribution(1, Scope::Day(2), &[0, 0, 1, 0], 2, 0.0).unwrap();
        assert_eq!(d.probs, vec![0.75, 0.25]);
        assert_eq!(d.probs.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn add_one_smoothing() {
        // (1 + 1) / (1 + 2) and (0 + 1) / (1 + 2)
        let d = occupancy_distribution(1, Scope::Baseline, &[0], 2, 1.0).unwrap();
        assert!((d.probs[0] - 2.0 / 3.0).abs() < 1e-15 && (d.probs[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn occupancy_errors() {
        assert_eq!(occupancy_distribution(0, Scope::Baseline, &[], 2, 0.0), Err(AnalyticsError::EmptyPath));
        assert!(matches!(
            occupancy_distribution(0, Scope::Baseline, &[3], 2, 0.0),
            Err(AnalyticsError::UnknownLocation { location: 3, .. })
        ));
    }

    #[test]
    fn surprise_examples() {
        let base = dist(&[0.5, 0.5]);
        assert_eq!(surprise(&base, &base).unwrap().bits, 0.0);
        assert!((surprise(&dist(&[1.0, 0.0]), &base).unwrap().bits - 1.0).abs() < 1e-12);
        let expect = 0.75 * 1.5f64.log2() + 0.25 * 0.5f64.log2();
        let got = surprise(&dist(&[0.75, 0.25]), &base).unwrap().bits;
        assert!((got - expect).abs() < 1e-12);
        assert!((got - 0.18872).abs() < 1e-4);
    }

    #[test]
    fn surprise_needs_baseline_support() {
        let r = surprise(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0]));
        assert_eq!(r, Err(AnalyticsError::SupportViolation { location: 1 }));
    }

    #[test]
    fn chain_combine_sums() {
        let s = |bits| SurpriseScore { agent: 2, day: 3, bits };
        assert_eq!(chain_combine(&[s(0.5), s(0.25)]).unwrap().bits, 0.75);
        assert_eq!(chain_combine(&[s(0.4)]).unwrap(), s(0.4));
        assert_eq!(chain_combine(&[]), Err(AnalyticsError::Empty));
        let other = SurpriseScore { agent: 9, ..s(0.1) };
        assert_eq!(chain_combine(&[s(0.1), other]), Err(AnalyticsError::Mismatched));
    }

    #[test]
    fn independent_sources_add() {
        // x and y independent both under the day and under the baseline
        let (px_d, py_d) = ([0.7, 0.3], [0.2, 0.8]);
        let (px, py) = ([0.5, 0.5], [0.6, 0.4]);
        let joint_d: Vec<f64> = px_d.iter().flat_map(|a| py_d.iter().map(move |b| a * b)).collect();
        let joint: Vec<f64> = px.iter().flat_map(|a| py.iter().map(move |b| a * b)).collect();
        let whole = relative_entropy_bits(&joint_d, &joint).unwrap();
        let sx = SurpriseScore { agent: 0, day: 0, bits: relative_entropy_bits(&px_d, &px).unwrap() };
        let sy = SurpriseScore { agent: 0, day: 0, bits: relative_entropy_bits(&py_d, &py).unwrap() };
        assert!((chain_combine(&[sx, sy]).unwrap().bits - whole).abs() < 1e-9);
    }

    fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.01f64..1.0, n).prop_map(|w| {
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn surprise_is_nonnegative_and_zero_on_self(p in simplex(5), q in simplex(5)) {
            prop_assert!(relative_entropy_bits(&p, &q).unwrap() >= 0.0);
            prop_assert!(relative_entropy_bits(&p, &p).unwrap().abs() < 1e-12);
        }

        #[test]
        fn unsmoothed_occupancy_is_normalized(path in proptest::collection::vec(0usize..6, 1..200)) {
            let d = occupancy_distribution(0, Scope::Day(0), &path, 6, 0.0).unwrap();
            prop_assert!((d.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
