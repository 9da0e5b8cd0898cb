use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::world::{AgentId, LocationId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub sequence: Vec<LocationId>,
    /// Number of distinct days containing the sequence.
    pub support: usize,
}

impl Pattern {
    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternReport {
    pub agent: AgentId,
    pub patterns: Vec<Pattern>,
}

/// Collapses runs of the same location into one entry.
pub(crate) fn collapse_runs(path: &[LocationId]) -> Vec<LocationId> {
    let mut out = path.to_vec();
    out.dedup();
    out
}

/// Contiguous location sequences (after collapsing dwell runs) of length
/// `min_len..=max_len` that occur on at least `min_support` distinct days.
///
/// Sorted by support (descending), then length (descending), then sequence.
pub fn mine_frequent_patterns(
    agent: AgentId,
    days: &[Vec<LocationId>],
    min_support: usize,
    min_len: usize,
    max_len: usize,
) -> Result<PatternReport, AnalyticsError> {
    if min_len < 2 || max_len < min_len {
        return Err(AnalyticsError::PatternLengths { min_len, max_len });
    }
    let mut support: BTreeMap<Vec<LocationId>, usize> = BTreeMap::new();
    for day in days {
        let moves = collapse_runs(day);
        let mut seen: BTreeSet<&[LocationId]> = BTreeSet::new();
        for len in min_len..=max_len.min(moves.len()) {
            seen.extend(moves.windows(len));
        }
        for gram in seen {
            *support.entry(gram.to_vec()).or_default() += 1;
        }
    }
    let mut patterns: Vec<Pattern> = support
        .into_iter()
        .filter(|&(_, s)| s >= min_support)
        .map(|(sequence, support)| Pattern { sequence, support })
        .collect();
    patterns.sort_by(|a, b| {
        b.support
            .cmp(&a.support)
            .then(b.len().cmp(&a.len()))
            .then_with(|| a.sequence.cmp(&b.sequence))
    });
    Ok(PatternReport { agent, patterns })
}
