//! Directed contact graph inferred from co-location.
//!
//! Two people are in contact when they share a location bin for at least
//! `min_consecutive_ticks` consecutive ticks. A stay in someone's office
//! counts as a visit (visitor → host); anywhere else both directions get the
//! ticks. Excluded tags (printers by default) and shared offices are ignored.

mod export;
mod metrics;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{AgentId, ConfigError, FloorPlan, LocationId, LocationTag, WorldConfig};

pub use export::{export_graph, ExportFormat};
pub use metrics::{graph_metrics, GraphMetrics, NodeMetrics};

pub const DEFAULT_MIN_CONSECUTIVE_TICKS: u32 = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContactError {
    #[error("agent {agent} day {day} has {got} ticks, expected {expected}")]
    LengthMismatch { agent: AgentId, day: usize, got: usize, expected: usize },
    #[error("agent {agent} has {got} days, expected {expected}")]
    DayCountMismatch { agent: AgentId, got: usize, expected: usize },
    #[error("agent {agent} visits unknown location {location}")]
    UnknownLocation { agent: AgentId, location: LocationId },
    #[error("unknown export format {0:?} (expected dot or edge_csv)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContactRule {
    pub min_consecutive_ticks: u32,
    pub excluded_tags: BTreeSet<LocationTag>,
    /// Ignore two people who are both at their shared home office.
    pub officemate_exclusion: bool,
}

impl Default for ContactRule {
    fn default() -> Self {
        ContactRule {
            min_consecutive_ticks: DEFAULT_MIN_CONSECUTIVE_TICKS,
            excluded_tags: [LocationTag::Printer].into(),
            officemate_exclusion: true,
        }
    }
}

impl ContactRule {
    pub fn with_threshold(mut self, ticks: u32) -> Self {
        self.min_consecutive_ticks = ticks;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.min_consecutive_ticks == 0 {
            return Err(ConfigError::Invalid("contact_rule.min_consecutive_ticks must be at least 1".into()));
        }
        Ok(())
    }
}

/// One person's location sequences, one per day.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentTrack {
    pub agent: AgentId,
    pub department: Option<String>,
    pub home: LocationId,
    pub days: Vec<Vec<LocationId>>,
}

impl AgentTrack {
    /// Tracks for every configured agent from `(agent, days)` paths.
    pub fn from_paths(config: &WorldConfig, paths: Vec<(AgentId, Vec<Vec<LocationId>>)>) -> Vec<AgentTrack> {
        paths
            .into_iter()
            .filter_map(|(agent, days)| {
                config.agent(agent).map(|p| AgentTrack {
                    agent,
                    department: p.department.clone(),
                    home: p.home,
                    days,
                })
            })
            .collect()
    }
}

/// Directed weighted contact graph. Edge `(from, to)` reads "from visited
/// to"; the weight is the number of qualifying co-located ticks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContactGraph {
    pub nodes: BTreeMap<AgentId, Option<String>>,
    pub edges: BTreeMap<(AgentId, AgentId), u64>,
}

impl ContactGraph {
    pub fn weight(&self, from: AgentId, to: AgentId) -> u64 {
        self.edges.get(&(from, to)).copied().unwrap_or(0)
    }

    fn add(&mut self, from: AgentId, to: AgentId, ticks: u64) {
        *self.edges.entry((from, to)).or_default() += ticks;
    }

    /// Undirected view: one edge per unordered pair, weights of both
    /// directions summed, keyed `(low id, high id)`.
    pub fn undirected(&self) -> BTreeMap<(AgentId, AgentId), u64> {
        let mut out = BTreeMap::new();
        for (&(a, b), &w) in &self.edges {
            *out.entry((a.min(b), a.max(b))).or_default() += w;
        }
        out
    }
}

/// Maximal runs `(location, start, len)` where both sequences sit at the same location.
fn shared_runs(a: &[LocationId], b: &[LocationId]) -> Vec<(LocationId, usize, usize)> {
    let mut runs = Vec::new();
    let mut t = 0;
    while t < a.len() {
        if a[t] != b[t] {
            t += 1;
            continue;
        }
        let start = t;
        while t < a.len() && a[t] == b[t] && a[t] == a[start] {
            t += 1;
        }
        runs.push((a[start], start, t - start));
    }
    runs
}

/// Builds the contact graph from everyone's day paths.
pub fn extract_contacts(tracks: &[AgentTrack], plan: &FloorPlan, rule: &ContactRule) -> Result<ContactGraph, ContactError> {
    let mut graph = ContactGraph::default();
    let Some(first) = tracks.first() else {
        return Ok(graph);
    };
    let n_days = first.days.len();
    let day_len: Vec<usize> = first.days.iter().map(Vec::len).collect();
    for t in tracks {
        if t.days.len() != n_days {
            return Err(ContactError::DayCountMismatch { agent: t.agent, got: t.days.len(), expected: n_days });
        }
        for (d, day) in t.days.iter().enumerate() {
            if day.len() != day_len[d] {
                return Err(ContactError::LengthMismatch { agent: t.agent, day: d, got: day.len(), expected: day_len[d] });
            }
            if let Some(&loc) = day.iter().find(|&&l| !plan.contains(l)) {
                return Err(ContactError::UnknownLocation { agent: t.agent, location: loc });
            }
        }
        graph.nodes.insert(t.agent, t.department.clone());
    }

    let min = rule.min_consecutive_ticks as usize;
    for (i, a) in tracks.iter().enumerate() {
        for b in &tracks[i + 1..] {
            for d in 0..n_days {
                for (x, _, len) in shared_runs(&a.days[d], &b.days[d]) {
                    if len < min || rule.excluded_tags.contains(&plan.tag(x)) {
                        continue;
                    }
                    let (a_home, b_home) = (a.home == x, b.home == x);
                    if rule.officemate_exclusion && a_home && b_home {
                        continue;
                    }
                    let ticks = len as u64;
                    match (a_home, b_home) {
                        (false, false) => {
                            graph.add(a.agent, b.agent, ticks);
                            graph.add(b.agent, a.agent, ticks);
                        }
                        _ => {
                            if b_home {
                                graph.add(a.agent, b.agent, ticks);
                            }
                            if a_home {
                                graph.add(b.agent, a.agent, ticks);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: AgentId = 1;
    const B: AgentId = 2;

    // 0: A's office, 1: B's office, 2: corridor, 3: printer, 4: meeting room
    fn plan() -> FloorPlan {
        FloorPlan::with_tags(
            5,
            [(0, 2), (1, 2), (2, 3), (2, 4)],
            &[
                (0, LocationTag::Office),
                (1, LocationTag::Office),
                (2, LocationTag::Corridor),
                (3, LocationTag::Printer),
                (4, LocationTag::MeetingRoom),
            ],
        )
        .unwrap()
    }

    fn track(agent: AgentId, home: LocationId, day: Vec<LocationId>) -> AgentTrack {
        AgentTrack { agent, department: None, home, days: vec![day] }
    }

    fn seq(parts: &[(LocationId, usize)]) -> Vec<LocationId> {
        parts.iter().flat_map(|&(l, k)| std::iter::repeat_n(l, k)).collect()
    }

    #[test]
    fn office_visit_is_directed() {
        let a = track(A, 0, seq(&[(0, 3), (2, 1), (1, 12), (2, 1), (0, 3)]));
        let b = track(B, 1, seq(&[(1, 20)]));
        let g = extract_contacts(&[a, b], &plan(), &ContactRule::default()).unwrap();
        assert_eq!(g.weight(A, B), 12);
        assert_eq!(g.weight(B, A), 0);
        assert_eq!(g.edges.len(), 1);
    }

    #[test]
    fn printer_meetings_do_not_count() {
        let a = track(A, 0, seq(&[(3, 12)]));
        let b = track(B, 1, seq(&[(3, 12)]));
        let g = extract_contacts(&[a, b], &plan(), &ContactRule::default()).unwrap();
        assert!(g.edges.is_empty());
    }

    #[test]
    fn short_visits_are_ignored() {
        let a = track(A, 0, seq(&[(2, 1), (1, 9), (2, 10)]));
        let b = track(B, 1, seq(&[(1, 20)]));
        let g = extract_contacts(&[a, b], &plan(), &ContactRule::default()).unwrap();
        assert!(g.edges.is_empty());
    }

    #[test]
    fn neutral_ground_counts_both_ways() {
        let a = track(A, 0, seq(&[(4, 15)]));
        let b = track(B, 1, seq(&[(4, 15)]));
        let g = extract_contacts(&[a, b], &plan(), &ContactRule::default()).unwrap();
        assert_eq!((g.weight(A, B), g.weight(B, A)), (15, 15));
    }

    #[test]
    fn officemates_excluded_only_when_asked() {
        let a = track(A, 0, seq(&[(0, 12)]));
        let b = track(B, 0, seq(&[(0, 12)]));
        let g = extract_contacts(&[a.clone(), b.clone()], &plan(), &ContactRule::default()).unwrap();
        assert!(g.edges.is_empty());
        let rule = ContactRule { officemate_exclusion: false, ..ContactRule::default() };
        let g = extract_contacts(&[a, b], &plan(), &rule).unwrap();
        assert_eq!((g.weight(A, B), g.weight(B, A)), (12, 12));
    }

    #[test]
    fn runs_split_when_the_shared_location_changes() {
        // together in 4 for 6 ticks then in 2 for 6 ticks: two runs of 6
        let a = track(A, 0, seq(&[(4, 6), (2, 6)]));
        let b = track(B, 1, seq(&[(4, 6), (2, 6)]));
        let g = extract_contacts(&[a.clone(), b.clone()], &plan(), &ContactRule::default()).unwrap();
        assert!(g.edges.is_empty());
        let g = extract_contacts(&[a, b], &plan(), &ContactRule::default().with_threshold(5)).unwrap();
        assert_eq!(g.weight(A, B), 12);
    }

    #[test]
    fn length_mismatch() {
        let a = track(A, 0, vec![0; 5]);
        let b = track(B, 1, vec![1; 6]);
        assert!(matches!(
            extract_contacts(&[a, b], &plan(), &ContactRule::default()),
            Err(ContactError::LengthMismatch { agent: B, .. })
        ));
    }

    #[test]
    fn undirected_collapse_sums_directions() {
        let mut g = ContactGraph::default();
        g.add(2, 1, 5);
        g.add(1, 2, 3);
        assert_eq!(g.undirected(), [((1, 2), 8)].into());
    }
}
