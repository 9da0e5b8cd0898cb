//! The office world: location graph, agents, schedules and the config document.
//!
//! Locations are abstract bins with dense ids `0..n`; there is no geometry.
//! One tick is an abstract unit (the shipped configs suggest ~5 s per tick,
//! nothing depends on it).

mod routing;
mod stationary;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::AnalyticsParams;
use crate::contacts::ContactRule;
use crate::sensor::SensorSpec;

pub use routing::{shortest_path, RouteError, RoutingTable};
pub use stationary::{
    location_kernel, power_iteration, stationary_distribution, MovementChain, PowerIteration,
    StationaryError,
};

pub type LocationId = usize;
pub type AgentId = u32;

/// Tolerance on "sums to one" checks for configured distributions.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Default fluctuation (detour) rate while following a path.
pub const DEFAULT_FLUCTUATION_RATE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationTag {
    Office,
    MeetingRoom,
    Printer,
    Corridor,
    LunchArea,
    Other,
}

impl LocationTag {
    pub const ALL: [LocationTag; 6] = [
        LocationTag::Office,
        LocationTag::MeetingRoom,
        LocationTag::Printer,
        LocationTag::Corridor,
        LocationTag::LunchArea,
        LocationTag::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LocationTag::Office => "office",
            LocationTag::MeetingRoom => "meeting_room",
            LocationTag::Printer => "printer",
            LocationTag::Corridor => "corridor",
            LocationTag::LunchArea => "lunch_area",
            LocationTag::Other => "other",
        }
    }

    /// Fallback stay probability for an idle agent at a location with this tag.
    pub fn default_stay(self) -> f64 {
        match self {
            LocationTag::Office => 0.9,
            LocationTag::MeetingRoom => 0.9,
            LocationTag::Printer => 0.3,
            LocationTag::Corridor => 0.05,
            LocationTag::LunchArea => 0.85,
            LocationTag::Other => 0.5,
        }
    }
}

impl fmt::Display for LocationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LocationTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LocationTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown location tag {s:?}"))
    }
}

/// Discrete location graph with semantic tags.
///
/// Adjacency is symmetric, irreflexive and connected; `FloorPlan::new` refuses
/// anything else.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorPlan {
    tags: Vec<LocationTag>,
    owners: Vec<Option<AgentId>>,
    neighbors: Vec<Vec<LocationId>>,
}

impl FloorPlan {
    /// Builds and validates a plan with `n` locations. Locations missing from
    /// `tags` are tagged [`LocationTag::Other`].
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (LocationId, LocationId)>,
        tags: &BTreeMap<LocationId, LocationTag>,
        home_of: &BTreeMap<LocationId, AgentId>,
    ) -> Result<Self, ConfigError> {
        if n == 0 {
            return invalid("floor plan has no locations");
        }
        let mut seen = BTreeSet::new();
        let mut neighbors = vec![Vec::new(); n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return invalid(format!("edge ({a}, {b}) references unknown location {}", a.max(b)));
            }
            if a == b {
                return invalid(format!("edge ({a}, {b}) is a self-loop"));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return invalid(format!("edge ({a}, {b}) is listed twice"));
            }
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }

        let mut tag_vec = vec![LocationTag::Other; n];
        for (&loc, &tag) in tags {
            if loc >= n {
                return invalid(format!("tag for unknown location {loc}"));
            }
            tag_vec[loc] = tag;
        }
        let mut owners = vec![None; n];
        let mut owned_by = BTreeMap::new();
        for (&loc, &agent) in home_of {
            if loc >= n {
                return invalid(format!("home_of references unknown location {loc}"));
            }
            if let Some(prev) = owned_by.insert(agent, loc) {
                return invalid(format!("agent {agent} owns two home locations ({prev} and {loc})"));
            }
            owners[loc] = Some(agent);
        }

        let plan = FloorPlan { tags: tag_vec, owners, neighbors };
        if let Some(unreached) = plan.first_unreachable() {
            return invalid(format!("floor plan is not connected: location {unreached} unreachable from 0"));
        }
        Ok(plan)
    }

    /// Plan with the given tags and no owners; convenience for tests and scenarios.
    pub fn with_tags(
        n: usize,
        edges: impl IntoIterator<Item = (LocationId, LocationId)>,
        tags: &[(LocationId, LocationTag)],
    ) -> Result<Self, ConfigError> {
        let tags: BTreeMap<_, _> = tags.iter().copied().collect();
        Self::new(n, edges, &tags, &BTreeMap::new())
    }

    fn first_unreachable(&self) -> Option<LocationId> {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(at) = queue.pop_front() {
            for &next in &self.neighbors[at] {
                if !seen[next] {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn contains(&self, loc: LocationId) -> bool {
        loc < self.len()
    }

    /// Sorted neighbor list of `loc`.
    pub fn neighbors(&self, loc: LocationId) -> &[LocationId] {
        &self.neighbors[loc]
    }

    pub fn is_adjacent(&self, a: LocationId, b: LocationId) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }

    pub fn tag(&self, loc: LocationId) -> LocationTag {
        self.tags[loc]
    }

    /// Registered owner of an office, if any.
    pub fn owner(&self, loc: LocationId) -> Option<AgentId> {
        self.owners[loc]
    }

    /// Undirected edges as `(low, high)` pairs in ascending order.
    pub fn edges(&self) -> Vec<(LocationId, LocationId)> {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect()
    }

    fn to_doc(&self) -> FloorPlanDoc {
        FloorPlanDoc {
            locations: (0..self.len()).collect(),
            edges: self.edges(),
            tags: self.tags.iter().copied().enumerate().collect(),
            home_of: self
                .owners
                .iter()
                .enumerate()
                .filter_map(|(loc, o)| o.map(|a| (loc, a)))
                .collect(),
        }
    }

    fn from_doc(doc: &FloorPlanDoc) -> Result<Self, ConfigError> {
        if let Some((pos, &id)) = doc.locations.iter().enumerate().find(|(i, &id)| *i != id) {
            return invalid(format!(
                "locations must be the dense ids 0..{} in order; position {pos} holds {id}",
                doc.locations.len()
            ));
        }
        FloorPlan::new(doc.locations.len(), doc.edges.iter().copied(), &doc.tags, &doc.home_of)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FloorPlanDoc {
    locations: Vec<LocationId>,
    edges: Vec<(LocationId, LocationId)>,
    #[serde(default)]
    tags: BTreeMap<LocationId, LocationTag>,
    #[serde(default)]
    home_of: BTreeMap<LocationId, AgentId>,
}

/// A scheduled event: during `[start_tick, end_tick)` the agent heads to
/// `target` if it decides (once per day, with `probability`) to attend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEvent {
    pub start_tick: u32,
    pub end_tick: u32,
    pub target: LocationId,
    pub probability: f64,
    #[serde(default)]
    pub label: String,
    /// Day indices the event applies to; every day when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub days: Option<Vec<u32>>,
}

impl ScheduleEvent {
    pub fn new(start_tick: u32, end_tick: u32, target: LocationId, probability: f64, label: &str) -> Self {
        ScheduleEvent { start_tick, end_tick, target, probability, label: label.to_owned(), days: None }
    }

    pub fn on_days(mut self, days: &[u32]) -> Self {
        self.days = Some(days.to_vec());
        self
    }

    pub fn applies_on(&self, day: u32) -> bool {
        self.days.as_ref().is_none_or(|d| d.contains(&day))
    }

    pub fn is_active(&self, day: u32, tick: u32) -> bool {
        self.applies_on(day) && (self.start_tick..self.end_tick).contains(&tick)
    }
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// One person's movement habits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub id: AgentId,
    pub home: LocationId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub department: Option<String>,
    /// Explicit per-location stay probabilities; override the tag fallback.
    #[serde(default)]
    pub stay_prob: BTreeMap<LocationId, f64>,
    /// Per-tag stay fallback; tags missing here use [`LocationTag::default_stay`].
    #[serde(default)]
    pub stay_by_tag: BTreeMap<LocationTag, f64>,
    pub destinations: BTreeMap<LocationId, f64>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub delta_p: f64,
    #[serde(default)]
    pub schedule: Vec<ScheduleEvent>,
}

impl AgentProfile {
    /// Profile with tag-default stay probabilities, no schedule and `delta_p = 0`.
    pub fn new(id: AgentId, home: LocationId, destinations: impl IntoIterator<Item = (LocationId, f64)>) -> Self {
        AgentProfile {
            id,
            home,
            department: None,
            stay_prob: BTreeMap::new(),
            stay_by_tag: BTreeMap::new(),
            destinations: destinations.into_iter().collect(),
            delta_p: 0.0,
            schedule: Vec::new(),
        }
    }

    /// Sets the same stay probability on every location of `plan`.
    pub fn with_uniform_stay(mut self, plan: &FloorPlan, p: f64) -> Self {
        self.stay_prob = (0..plan.len()).map(|l| (l, p)).collect();
        self
    }

    pub fn tag_fallback(&self, tag: LocationTag) -> f64 {
        self.stay_by_tag.get(&tag).copied().unwrap_or_else(|| tag.default_stay())
    }

    /// Effective stay probability of an idle agent at `loc` with no company.
    pub fn stay_at(&self, plan: &FloorPlan, loc: LocationId) -> f64 {
        self.stay_prob
            .get(&loc)
            .copied()
            .unwrap_or_else(|| self.tag_fallback(plan.tag(loc)))
    }

    /// Dense destination distribution over the plan's locations.
    pub fn destination_vec(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        for (&loc, &p) in &self.destinations {
            v[loc] = p;
        }
        v
    }

    fn validate(&self, plan: &FloorPlan, strict_home_stay: bool) -> Result<(), ConfigError> {
        let id = self.id;
        if !plan.contains(self.home) {
            return invalid(format!("agent {id} has unknown home location {}", self.home));
        }
        check_prob(self.delta_p, || format!("delta_p of agent {id}"))?;
        for (&loc, &p) in &self.stay_prob {
            if !plan.contains(loc) {
                return invalid(format!("stay_prob of agent {id} references unknown location {loc}"));
            }
            check_prob(p, || format!("stay_prob of agent {id} at location {loc}"))?;
        }
        for (&tag, &p) in &self.stay_by_tag {
            check_prob(p, || format!("stay_by_tag of agent {id} for {tag}"))?;
        }
        if self.destinations.is_empty() {
            return invalid(format!("agent {id} has no destinations"));
        }
        for (&loc, &p) in &self.destinations {
            if !plan.contains(loc) {
                return invalid(format!("destinations of agent {id} reference unknown location {loc}"));
            }
            check_prob(p, || format!("destination probability of agent {id} at location {loc}"))?;
        }
        let total: f64 = self.destinations.values().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return invalid(format!("destinations of agent {id} sum to {total}"));
        }
        for (k, ev) in self.schedule.iter().enumerate() {
            if ev.start_tick >= ev.end_tick {
                return invalid(format!(
                    "schedule event {k} of agent {id} has start_tick {} >= end_tick {}",
                    ev.start_tick, ev.end_tick
                ));
            }
            if !plan.contains(ev.target) {
                return invalid(format!("schedule event {k} of agent {id} targets unknown location {}", ev.target));
            }
            check_prob(ev.probability, || format!("probability of schedule event {k} of agent {id}"))?;
        }
        if strict_home_stay {
            let home_stay = self.stay_at(plan, self.home);
            let fallback = self.tag_fallback(plan.tag(self.home));
            if home_stay < fallback {
                return invalid(format!(
                    "stay_prob of agent {id} at home ({home_stay}) is below its {} default ({fallback})",
                    plan.tag(self.home)
                ));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_prob(p: f64, what: impl FnOnce() -> String) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        invalid(format!("{} is {p}, outside [0, 1]", what()))
    }
}

fn default_fluctuation() -> f64 {
    DEFAULT_FLUCTUATION_RATE
}

fn default_true() -> bool {
    true
}

/// Everything a run needs. Immutable once validated.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "WorldConfigDoc")]
pub struct WorldConfig {
    pub floor_plan: FloorPlan,
    pub agents: Vec<AgentProfile>,
    pub ticks_per_day: u32,
    pub days: u32,
    pub rng_seed: u64,
    pub fluctuation_rate: f64,
    /// Require each agent's home stay probability to be at least its tag fallback.
    pub strict_home_stay: bool,
    /// Sensor network; empty means "use [`crate::sensor::default_sensors`]".
    pub sensors: Vec<SensorSpec>,
    pub contact_rule: ContactRule,
    pub analytics: AnalyticsParams,
}

/// Raw config document, before validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldConfigDoc {
    floor_plan: FloorPlanDoc,
    agents: Vec<AgentProfile>,
    ticks_per_day: u32,
    days: u32,
    rng_seed: u64,
    #[serde(default = "default_fluctuation")]
    fluctuation_rate: f64,
    #[serde(default = "default_true")]
    strict_home_stay: bool,
    #[serde(default)]
    sensors: Vec<SensorSpec>,
    #[serde(default)]
    contact_rule: ContactRule,
    #[serde(default)]
    analytics: AnalyticsParams,
}

impl From<WorldConfig> for WorldConfigDoc {
    fn from(c: WorldConfig) -> Self {
        WorldConfigDoc {
            floor_plan: c.floor_plan.to_doc(),
            agents: c.agents,
            ticks_per_day: c.ticks_per_day,
            days: c.days,
            rng_seed: c.rng_seed,
            fluctuation_rate: c.fluctuation_rate,
            strict_home_stay: c.strict_home_stay,
            sensors: c.sensors,
            contact_rule: c.contact_rule,
            analytics: c.analytics,
        }
    }
}

impl TryFrom<WorldConfigDoc> for WorldConfig {
    type Error = ConfigError;

    fn try_from(doc: WorldConfigDoc) -> Result<Self, ConfigError> {
        let floor_plan = FloorPlan::from_doc(&doc.floor_plan)?;
        let config = WorldConfig {
            floor_plan,
            agents: doc.agents,
            ticks_per_day: doc.ticks_per_day,
            days: doc.days,
            rng_seed: doc.rng_seed,
            fluctuation_rate: doc.fluctuation_rate,
            strict_home_stay: doc.strict_home_stay,
            sensors: doc.sensors,
            contact_rule: doc.contact_rule,
            analytics: doc.analytics,
        };
        config.validate()?;
        Ok(config)
    }
}

impl WorldConfig {
    /// Config with default knobs around a plan and a set of agents.
    pub fn new(floor_plan: FloorPlan, agents: Vec<AgentProfile>, ticks_per_day: u32, days: u32, rng_seed: u64) -> Self {
        WorldConfig {
            floor_plan,
            agents,
            ticks_per_day,
            days,
            rng_seed,
            fluctuation_rate: DEFAULT_FLUCTUATION_RATE,
            strict_home_stay: true,
            sensors: Vec::new(),
            contact_rule: ContactRule::default(),
            analytics: AnalyticsParams::default(),
        }
    }

    /// Checks every invariant; the error names the first violation found.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let plan = &self.floor_plan;
        if self.ticks_per_day == 0 {
            return invalid("ticks_per_day must be at least 1");
        }
        if self.days == 0 {
            return invalid("days must be at least 1");
        }
        if self.agents.is_empty() {
            return invalid("config has no agents");
        }
        check_prob(self.fluctuation_rate, || "fluctuation_rate".to_owned())?;
        let mut ids = BTreeSet::new();
        for agent in &self.agents {
            if !ids.insert(agent.id) {
                return invalid(format!("agent id {} appears twice", agent.id));
            }
            agent.validate(plan, self.strict_home_stay)?;
        }
        for loc in 0..plan.len() {
            if let Some(owner) = plan.owner(loc) {
                match self.agent(owner) {
                    None => return invalid(format!("home_of location {loc} names unknown agent {owner}")),
                    Some(a) if a.home != loc => {
                        return invalid(format!("home_of location {loc} names agent {owner}, whose home is {}", a.home))
                    }
                    Some(_) => {}
                }
            }
        }
        let mut sensor_ids = BTreeSet::new();
        for s in &self.sensors {
            if !sensor_ids.insert(s.id) {
                return invalid(format!("sensor id {} appears twice", s.id));
            }
            s.validate(plan)?;
        }
        self.contact_rule.validate()?;
        self.analytics.validate()?;
        Ok(())
    }

    pub fn agent(&self, id: AgentId) -> Option<&AgentProfile> {
        self.agents.iter().find(|a| a.id == id)
    }

    /// Agent ids in ascending order.
    pub fn agent_ids(&self) -> Vec<AgentId> {
        let mut ids: Vec<_> = self.agents.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        ids
    }

    /// Configured sensors, or the default one-camera-per-location network.
    pub fn effective_sensors(&self) -> Vec<SensorSpec> {
        if self.sensors.is_empty() {
            crate::sensor::default_sensors(&self.floor_plan)
        } else {
            self.sensors.clone()
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, ConfigError> {
        let doc: WorldConfigDoc = serde_json::from_str(s)?;
        WorldConfig::try_from(doc)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization is infallible")
    }
}

/// Reads, parses and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<WorldConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    WorldConfig::from_json_str(&text)
}
