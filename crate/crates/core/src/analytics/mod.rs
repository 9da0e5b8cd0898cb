//! Occupancy distributions, per-day surprise, and recurrent movement patterns.

mod patterns;
mod surprise;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{AgentId, ConfigError, LocationId};

pub use patterns::{mine_frequent_patterns, Pattern, PatternReport};
pub use surprise::{
    chain_combine, occupancy_distribution, relative_entropy_bits, surprise, OccupancyDistribution, Scope,
    SurpriseScore,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("empty path")]
    EmptyPath,
    #[error("location {location} is outside the {n} known locations")]
    UnknownLocation { location: LocationId, n: usize },
    #[error("distributions have different lengths ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("day distribution puts mass on location {location} where the baseline is zero")]
    SupportViolation { location: LocationId },
    #[error("cannot combine scores of different agents or days")]
    Mismatched,
    #[error("nothing to combine")]
    Empty,
    #[error("pattern lengths must satisfy 2 <= min_len <= max_len (got {min_len}..={max_len})")]
    PatternLengths { min_len: usize, max_len: usize },
}

/// Knobs for the analytics stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalyticsParams {
    /// Additive smoothing of the pooled baseline; positive keeps surprise finite.
    pub baseline_alpha: f64,
    pub day_alpha: f64,
    pub min_support: usize,
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for AnalyticsParams {
    fn default() -> Self {
        AnalyticsParams { baseline_alpha: 1.0, day_alpha: 0.0, min_support: 2, min_len: 2, max_len: 4 }
    }
}

impl AnalyticsParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if [self.baseline_alpha, self.day_alpha].iter().any(|a| a.is_nan() || *a < 0.0) {
            return bad("analytics smoothing must be nonnegative".into());
        }
        if self.min_len < 2 || self.max_len < self.min_len {
            return bad(format!(
                "analytics pattern lengths must satisfy 2 <= min_len <= max_len (got {}..={})",
                self.min_len, self.max_len
            ));
        }
        Ok(())
    }
}

/// Everything the analytics stage derives for one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentReport {
    pub agent: AgentId,
    pub baseline: OccupancyDistribution,
    pub days: Vec<OccupancyDistribution>,
    pub surprise: Vec<SurpriseScore>,
    pub patterns: PatternReport,
}

/// Baseline over all days pooled, per-day occupancy, per-day surprise and
/// frequent patterns for one agent's day paths.
pub fn analyze_agent(
    agent: AgentId,
    days: &[Vec<LocationId>],
    n_locations: usize,
    params: &AnalyticsParams,
) -> Result<AgentReport, AnalyticsError> {
    let pooled: Vec<LocationId> = days.iter().flatten().copied().collect();
    let baseline = occupancy_distribution(agent, Scope::Baseline, &pooled, n_locations, params.baseline_alpha)?;
    let per_day = days
        .iter()
        .enumerate()
        .map(|(d, p)| occupancy_distribution(agent, Scope::Day(d as u32), p, n_locations, params.day_alpha))
        .collect::<Result<Vec<_>, _>>()?;
    let surprise = per_day.iter().map(|d| surprise(d, &baseline)).collect::<Result<Vec<_>, _>>()?;
    let patterns = mine_frequent_patterns(agent, days, params.min_support, params.min_len, params.max_len)?;
    Ok(AgentReport { agent, baseline, days: per_day, surprise, patterns })
}
