//! Noisy sensor network: turns ground truth into observation events.
//!
//! Each sensor watches a set of location bins. A person inside the coverage
//! is detected with `p_detect`; a detection is attributed to a wrong,
//! uniformly chosen person with `p_confuse`; and once per tick a sensor may
//! fire a false positive naming a random known person at a random covered
//! location with `p_false_positive`.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{self, SimRng};
use crate::sim::TrajectoryRecord;
use crate::world::{check_prob, AgentId, ConfigError, FloorPlan, LocationId};

pub type SensorId = u32;

pub const DEFAULT_P_DETECT: f64 = 0.9;
pub const DEFAULT_P_FALSE_POSITIVE: f64 = 0.01;
pub const DEFAULT_P_CONFUSE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    Camera,
    TagReader,
    Biometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub id: SensorId,
    pub kind: SensorKind,
    pub coverage: BTreeSet<LocationId>,
    pub p_detect: f64,
    pub p_false_positive: f64,
    pub p_confuse: f64,
}

impl SensorSpec {
    /// Sensor with the default (synthetic) error rates.
    pub fn new(id: SensorId, kind: SensorKind, coverage: impl IntoIterator<Item = LocationId>) -> Self {
        SensorSpec {
            id,
            kind,
            coverage: coverage.into_iter().collect(),
            p_detect: DEFAULT_P_DETECT,
            p_false_positive: DEFAULT_P_FALSE_POSITIVE,
            p_confuse: DEFAULT_P_CONFUSE,
        }
    }

    pub fn with_rates(mut self, p_detect: f64, p_false_positive: f64, p_confuse: f64) -> Self {
        self.p_detect = p_detect;
        self.p_false_positive = p_false_positive;
        self.p_confuse = p_confuse;
        self
    }

    /// A sensor that sees everything and never errs.
    pub fn noiseless(id: SensorId, coverage: impl IntoIterator<Item = LocationId>) -> Self {
        Self::new(id, SensorKind::Camera, coverage).with_rates(1.0, 0.0, 0.0)
    }

    pub fn covers(&self, loc: LocationId) -> bool {
        self.coverage.contains(&loc)
    }

    pub fn validate(&self, plan: &FloorPlan) -> Result<(), ConfigError> {
        let id = self.id;
        if self.coverage.is_empty() {
            return Err(ConfigError::Invalid(format!("sensor {id} has empty coverage")));
        }
        if let Some(&loc) = self.coverage.iter().find(|&&l| !plan.contains(l)) {
            return Err(ConfigError::Invalid(format!("sensor {id} covers unknown location {loc}")));
        }
        check_prob(self.p_detect, || format!("p_detect of sensor {id}"))?;
        check_prob(self.p_false_positive, || format!("p_false_positive of sensor {id}"))?;
        check_prob(self.p_confuse, || format!("p_confuse of sensor {id}"))?;
        Ok(())
    }
}

/// One camera per location, default error rates.
pub fn default_sensors(plan: &FloorPlan) -> Vec<SensorSpec> {
    (0..plan.len())
        .map(|loc| SensorSpec::new(loc as SensorId, SensorKind::Camera, [loc]))
        .collect()
}

/// One sensor report. Field order is the serialized order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationEvent {
    pub sensor: SensorId,
    pub day: u32,
    pub tick: u32,
    pub reported_agent: AgentId,
    pub location: LocationId,
}

/// Observes one tick. `truth` lists `(agent, location)` for every agent;
/// events come out grouped by sensor in the order `sensors` are given, true
/// detections (by agent id) before the false positive.
pub fn observe_tick(
    day: u32,
    tick: u32,
    truth: &[(AgentId, LocationId)],
    sensors: &[SensorSpec],
    rng: &mut SimRng,
) -> Vec<ObservationEvent> {
    let mut people: Vec<(AgentId, LocationId)> = truth.to_vec();
    people.sort_unstable();
    let mut events = Vec::new();
    for s in sensors {
        for (k, &(agent, loc)) in people.iter().enumerate() {
            if !s.covers(loc) || rng.gen::<f64>() >= s.p_detect {
                continue;
            }
            let mut reported = agent;
            if people.len() > 1 && rng.gen::<f64>() < s.p_confuse {
                let mut other = rng.gen_range(0..people.len() - 1);
                if other >= k {
                    other += 1;
                }
                reported = people[other].0;
            }
            events.push(ObservationEvent { sensor: s.id, day, tick, reported_agent: reported, location: loc });
        }
        if !people.is_empty() && rng.gen::<f64>() < s.p_false_positive {
            let agent = people[rng.gen_range(0..people.len())].0;
            let nth = rng.gen_range(0..s.coverage.len());
            let loc = *s.coverage.iter().nth(nth).expect("coverage is non-empty");
            events.push(ObservationEvent { sensor: s.id, day, tick, reported_agent: agent, location: loc });
        }
    }
    events
}

/// Observes a whole run. Each day draws from its own stream derived from
/// `seed`; events are ordered by `(day, tick, sensor id)`.
pub fn generate_event_log(records: &[TrajectoryRecord], sensors: &[SensorSpec], seed: u64) -> Vec<ObservationEvent> {
    let mut sorted = records.to_vec();
    sorted.sort_unstable_by_key(|r| (r.day, r.tick, r.agent));
    let mut sensors = sensors.to_vec();
    sensors.sort_by_key(|s| s.id);

    let mut events = Vec::new();
    let mut current_day = None;
    let mut stream = rng::stream(seed, rng::OBSERVE, 0);
    for chunk in sorted.chunk_by(|a, b| (a.day, a.tick) == (b.day, b.tick)) {
        let (day, tick) = (chunk[0].day, chunk[0].tick);
        if current_day != Some(day) {
            stream = rng::stream(seed, rng::OBSERVE, u64::from(day));
            current_day = Some(day);
        }
        let truth: Vec<_> = chunk.iter().map(|r| (r.agent, r.location)).collect();
        events.extend(observe_tick(day, tick, &truth, &sensors, &mut stream));
    }
    events
}
