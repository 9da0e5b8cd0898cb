//! Per-person Bayesian location tracking.
//!
//! Each person's belief over location bins is carried forward by a motion
//! kernel (predict) and reweighted by the likelihood of the tick's sensor
//! reports (update). One [`BeliefMatrix`] per tick collects every person's
//! row. People are tracked independently; there is no joint association.
//!
//! Sensor likelihood model. For a person `a` and a sensor with coverage `C`
//! (`|C| = c`), each covered location `y` is an independent Bernoulli
//! "some report names `a` at `y`":
//!
//! ```text
//! P(report at y | a at y)  = r = d + (1 - d)·ε      d = p_detect·(1 - p_confuse)
//! P(report at y | a not at y) = ε                   ε = p_fp / (N·c) + p_detect·p_confuse / L
//! ```
//!
//! with `N` people and `L` locations. The `ε` term spreads the sensor's
//! false positives over people and covered bins, plus the chance that some
//! other person standing at `y` is mistaken for `a` (others assumed uniform
//! over the floor). With one person (no confusion possible) and one covered
//! bin the model is exact.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::kernel::TransitionKernel;
use crate::sensor::{ObservationEvent, SensorId, SensorSpec};
use crate::world::{location_kernel, AgentId, FloorPlan, LocationId, PowerIteration, StationaryError, WorldConfig};

/// Entries below this are lifted after every update, so identity confusion
/// cannot drive a location to an absorbing zero.
pub const BELIEF_FLOOR: f64 = 1e-12;

/// Weight of the uniform stay-or-hop kernel mixed into the simulator-derived
/// motion model, keeping every single-hop move possible.
pub const MOTION_SUPPORT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FusionError {
    #[error("evidence contradicts the prior everywhere (all products are zero)")]
    DegenerateEvidence,
    #[error("belief has {belief} entries but the model has {model}")]
    DimensionMismatch { belief: usize, model: usize },
    #[error("no motion kernel for agent {0}")]
    MissingKernel(AgentId),
    #[error("event from unknown sensor {0}")]
    UnknownSensor(SensorId),
    #[error("event of sensor {sensor} at location {location} is outside its coverage")]
    OutsideCoverage { sensor: SensorId, location: LocationId },
    #[error(transparent)]
    Stationary(#[from] StationaryError),
}

/// Belief carried one tick forward: `b'[j] = Σ_i b[i]·K[i][j]`.
pub fn predict(belief: &[f64], kernel: &TransitionKernel) -> Vec<f64> {
    let mut out = vec![0.0; kernel.len()];
    for (i, &b) in belief.iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        for &(j, p) in kernel.row(i) {
            out[j] += b * p;
        }
    }
    out
}

/// Bayes rule: `posterior[i] ∝ b[i]·L[i]`.
pub fn update(belief: &[f64], likelihood: &[f64]) -> Result<Vec<f64>, FusionError> {
    if belief.len() != likelihood.len() {
        return Err(FusionError::DimensionMismatch { belief: belief.len(), model: likelihood.len() });
    }
    let mut post: Vec<f64> = belief.iter().zip(likelihood).map(|(b, l)| b * l).collect();
    let total: f64 = post.iter().sum();
    if total.is_nan() || total <= 0.0 || !total.is_finite() {
        return Err(FusionError::DegenerateEvidence);
    }
    post.iter_mut().for_each(|p| *p /= total);
    Ok(post)
}

/// Lifts entries to at least `floor` and renormalizes.
pub fn apply_floor(belief: &mut [f64], floor: f64) {
    let mut total = 0.0;
    for p in belief.iter_mut() {
        *p = p.max(floor);
        total += *p;
    }
    belief.iter_mut().for_each(|p| *p /= total);
}

/// A probability written as `0^zeros · exp(log)`, so factors can be divided
/// back out even when they are exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LogFactor {
    zeros: i32,
    log: f64,
}

impl LogFactor {
    const ONE: LogFactor = LogFactor { zeros: 0, log: 0.0 };

    fn of(p: f64) -> Self {
        if p > 0.0 {
            LogFactor { zeros: 0, log: p.ln() }
        } else {
            LogFactor { zeros: 1, log: 0.0 }
        }
    }

    fn pow(self, k: usize) -> Self {
        LogFactor { zeros: self.zeros * k as i32, log: self.log * k as f64 }
    }

    fn mul(self, o: Self) -> Self {
        LogFactor { zeros: self.zeros + o.zeros, log: self.log + o.log }
    }

    fn div(self, o: Self) -> Self {
        LogFactor { zeros: self.zeros - o.zeros, log: self.log - o.log }
    }

    fn value(self) -> f64 {
        if self.zeros > 0 {
            0.0
        } else {
            self.log.exp()
        }
    }
}

#[derive(Debug, Clone)]
struct SensorTerms {
    id: SensorId,
    coverage: Vec<LocationId>,
    r: f64,
    eps: f64,
}

impl SensorTerms {
    /// Factor for hypothesis "person at x" given `reported` of the coverage
    /// bins name the person; `x_reported` tells whether x is one of them.
    fn factor(&self, x_in_coverage: bool, x_reported: bool, reported: usize) -> LogFactor {
        let c = self.coverage.len();
        let hit = LogFactor::of(self.eps);
        let miss = LogFactor::of(1.0 - self.eps);
        if !x_in_coverage {
            return hit.pow(reported).mul(miss.pow(c - reported));
        }
        if x_reported {
            LogFactor::of(self.r).mul(hit.pow(reported - 1)).mul(miss.pow(c - reported))
        } else {
            // saturates when every bin is reported; that factor is never applied
            LogFactor::of(1.0 - self.r).mul(hit.pow(reported)).mul(miss.pow(c.saturating_sub(reported + 1)))
        }
    }
}

/// Precomputed sensor likelihood terms for one floor plan and population size.
#[derive(Debug, Clone)]
pub struct SensorModel {
    n_locations: usize,
    sensors: Vec<SensorTerms>,
    index: HashMap<SensorId, usize>,
    silent: Vec<LogFactor>,
}

impl SensorModel {
    pub fn new(sensors: &[SensorSpec], plan: &FloorPlan, n_agents: usize) -> Self {
        let n = plan.len();
        let terms: Vec<SensorTerms> = sensors
            .iter()
            .map(|s| {
                let c = s.coverage.len();
                let (d, confusion) = if n_agents > 1 {
                    (s.p_detect * (1.0 - s.p_confuse), s.p_detect * s.p_confuse / n as f64)
                } else {
                    (s.p_detect, 0.0)
                };
                let eps = (s.p_false_positive / (n_agents.max(1) * c) as f64 + confusion).min(1.0);
                SensorTerms { id: s.id, coverage: s.coverage.iter().copied().collect(), r: d + (1.0 - d) * eps, eps }
            })
            .collect();
        let mut silent = vec![LogFactor::ONE; n];
        for t in &terms {
            let inside = t.factor(true, false, 0);
            let outside = t.factor(false, false, 0);
            for (x, f) in silent.iter_mut().enumerate() {
                *f = f.mul(if t.coverage.binary_search(&x).is_ok() { inside } else { outside });
            }
        }
        let index = terms.iter().enumerate().map(|(k, t)| (t.id, k)).collect();
        SensorModel { n_locations: n, sensors: terms, index, silent }
    }

    pub fn n_locations(&self) -> usize {
        self.n_locations
    }

    /// Likelihood of the tick's reports about `agent`, for each location it
    /// might be at. `events` must all belong to one tick.
    pub fn likelihood(&self, events: &[ObservationEvent], agent: AgentId) -> Result<Vec<f64>, FusionError> {
        let mut reports: BTreeMap<usize, BTreeSet<LocationId>> = BTreeMap::new();
        for e in events.iter().filter(|e| e.reported_agent == agent) {
            let k = *self.index.get(&e.sensor).ok_or(FusionError::UnknownSensor(e.sensor))?;
            if self.sensors[k].coverage.binary_search(&e.location).is_err() {
                return Err(FusionError::OutsideCoverage { sensor: e.sensor, location: e.location });
            }
            reports.entry(k).or_default().insert(e.location);
        }
        let mut acc = self.silent.clone();
        for (k, seen) in reports {
            let t = &self.sensors[k];
            let m = seen.len();
            let silent_in = t.factor(true, false, 0);
            let silent_out = t.factor(false, false, 0);
            let out = t.factor(false, false, m).div(silent_out);
            let in_hit = t.factor(true, true, m).div(silent_in);
            let in_miss = t.factor(true, false, m).div(silent_in);
            let mut cov = t.coverage.iter().peekable();
            for (x, f) in acc.iter_mut().enumerate() {
                let change = if cov.peek() == Some(&&x) {
                    cov.next();
                    if seen.contains(&x) {
                        in_hit
                    } else {
                        in_miss
                    }
                } else {
                    out
                };
                *f = f.mul(change);
            }
        }
        Ok(acc.into_iter().map(LogFactor::value).collect())
    }
}

/// Per-location likelihood of one tick's reports about `agent`.
pub fn likelihood_of_events(
    events: &[ObservationEvent],
    agent: AgentId,
    sensors: &[SensorSpec],
    plan: &FloorPlan,
    n_agents: usize,
) -> Result<Vec<f64>, FusionError> {
    SensorModel::new(sensors, plan, n_agents).likelihood(events, agent)
}

/// Per-agent motion kernels used by the tracker.
#[derive(Debug, Clone)]
pub struct MotionModel {
    kernels: BTreeMap<AgentId, TransitionKernel>,
}

impl MotionModel {
    pub fn new(kernels: BTreeMap<AgentId, TransitionKernel>) -> Self {
        MotionModel { kernels }
    }

    /// Each agent's own simulator dynamics (schedule and company ignored),
    /// with a small uniform stay-or-hop component mixed in.
    pub fn from_simulator(config: &WorldConfig) -> Result<Self, FusionError> {
        let plan = &config.floor_plan;
        let kernels = config
            .agents
            .iter()
            .map(|a| {
                let k = location_kernel(plan, a, config.fluctuation_rate, PowerIteration::default())?;
                Ok((a.id, k.with_adjacency_floor(plan, MOTION_SUPPORT_FLOOR)))
            })
            .collect::<Result<_, FusionError>>()?;
        Ok(MotionModel { kernels })
    }

    /// Deliberately mismatched model: stay or hop to any neighbor uniformly.
    pub fn uniform_adjacent(config: &WorldConfig) -> Self {
        let k = TransitionKernel::uniform_adjacent(&config.floor_plan);
        MotionModel { kernels: config.agents.iter().map(|a| (a.id, k.clone())).collect() }
    }

    pub fn kernel(&self, agent: AgentId) -> Result<&TransitionKernel, FusionError> {
        self.kernels.get(&agent).ok_or(FusionError::MissingKernel(agent))
    }
}

/// Every agent's location distribution at one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefMatrix {
    pub day: u32,
    pub tick: u32,
    /// Row labels, ascending.
    pub agents: Vec<AgentId>,
    pub probs: Vec<Vec<f64>>,
}

impl BeliefMatrix {
    pub fn row(&self, agent: AgentId) -> Option<&[f64]> {
        self.agents.binary_search(&agent).ok().map(|k| self.probs[k].as_slice())
    }

    /// Most probable location per agent, lowest id on ties.
    pub fn argmax(&self) -> Vec<LocationId> {
        self.probs.iter().map(|row| argmax(row)).collect()
    }
}

pub(crate) fn argmax(row: &[f64]) -> LocationId {
    row.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
        .0
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FusionSummary {
    pub matrices: usize,
    /// Updates skipped because the evidence contradicted the prior.
    pub degenerate_updates: usize,
}

/// Slices a `(day, tick)`-sorted event log into per-tick groups.
pub(crate) struct TickEvents<'a> {
    events: Vec<&'a ObservationEvent>,
    pos: usize,
    buf: Vec<ObservationEvent>,
}

impl<'a> TickEvents<'a> {
    pub(crate) fn new(events: &'a [ObservationEvent]) -> Self {
        let mut sorted: Vec<&ObservationEvent> = events.iter().collect();
        sorted.sort_by_key(|e| (e.day, e.tick));
        TickEvents { events: sorted, pos: 0, buf: Vec::new() }
    }

    /// Events at `(day, tick)`; calls must come in increasing order.
    pub(crate) fn at(&mut self, day: u32, tick: u32) -> &[ObservationEvent] {
        self.buf.clear();
        while self.pos < self.events.len() && (self.events[self.pos].day, self.events[self.pos].tick) < (day, tick) {
            self.pos += 1;
        }
        while self.pos < self.events.len() && (self.events[self.pos].day, self.events[self.pos].tick) == (day, tick) {
            self.buf.push(*self.events[self.pos]);
            self.pos += 1;
        }
        &self.buf
    }
}

/// Runs the tracker over a whole event log, handing each tick's matrix to
/// `sink` as soon as it is ready.
///
/// Each day starts from a point mass at every agent's home. Tick 0 is an
/// update only; later ticks predict then update. When the evidence
/// contradicts the prior everywhere the update is skipped (predict-only).
pub fn fuse_run_with(
    events: &[ObservationEvent],
    config: &WorldConfig,
    motion: &MotionModel,
    mut sink: impl FnMut(BeliefMatrix),
) -> Result<FusionSummary, FusionError> {
    let plan = &config.floor_plan;
    let n = plan.len();
    let agents = config.agent_ids();
    let sensors = config.effective_sensors();
    let model = SensorModel::new(&sensors, plan, agents.len());
    let kernels = agents.iter().map(|&a| motion.kernel(a)).collect::<Result<Vec<_>, _>>()?;
    if let Some(k) = kernels.iter().find(|k| k.len() != n) {
        return Err(FusionError::DimensionMismatch { belief: n, model: k.len() });
    }
    let homes: Vec<LocationId> = agents.iter().map(|&a| config.agent(a).expect("listed agent").home).collect();

    let mut summary = FusionSummary::default();
    let mut ticks = TickEvents::new(events);
    for day in 0..config.days {
        let mut beliefs: Vec<Vec<f64>> = homes
            .iter()
            .map(|&h| {
                let mut b = vec![0.0; n];
                b[h] = 1.0;
                b
            })
            .collect();
        for tick in 0..config.ticks_per_day {
            let evs = ticks.at(day, tick);
            for (k, &agent) in agents.iter().enumerate() {
                let prior = if tick == 0 { beliefs[k].clone() } else { predict(&beliefs[k], kernels[k]) };
                let lik = model.likelihood(evs, agent)?;
                beliefs[k] = match update(&prior, &lik) {
                    Ok(mut post) => {
                        apply_floor(&mut post, BELIEF_FLOOR);
                        post
                    }
                    Err(FusionError::DegenerateEvidence) => {
                        log::debug!("day {day} tick {tick} agent {agent}: degenerate evidence, predict-only");
                        summary.degenerate_updates += 1;
                        prior
                    }
                    Err(e) => return Err(e),
                };
            }
            sink(BeliefMatrix { day, tick, agents: agents.clone(), probs: beliefs.clone() });
            summary.matrices += 1;
        }
    }
    if summary.degenerate_updates > 0 {
        log::info!("{} degenerate updates fell back to predict-only", summary.degenerate_updates);
    }
    Ok(summary)
}

/// Collects [`fuse_run_with`] into a vector of per-tick matrices.
pub fn fuse_run(
    events: &[ObservationEvent],
    config: &WorldConfig,
    motion: &MotionModel,
) -> Result<Vec<BeliefMatrix>, FusionError> {
    let mut out = Vec::with_capacity((config.days * config.ticks_per_day) as usize);
    fuse_run_with(events, config, motion, |m| out.push(m))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::SensorKind;
    use crate::world::{AgentProfile, LocationTag};

    fn k2() -> TransitionKernel {
        TransitionKernel::from_dense(&[vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn predict_examples() {
        assert!(close(&predict(&[1.0, 0.0], &k2()), &[0.7, 0.3], 1e-15));
        assert!(close(&predict(&[0.5, 0.5], &k2()), &[0.55, 0.45], 1e-15));
        let b = [0.2, 0.3, 0.5];
        assert_eq!(predict(&b, &TransitionKernel::identity(3)), b.to_vec());
    }

    #[test]
    fn update_examples() {
        // 0.8·0.5 = 0.40 and 0.2·0.9 = 0.18 over 0.58
        let post = update(&[0.8, 0.2], &[0.5, 0.9]).unwrap();
        assert!(close(&post, &[0.40 / 0.58, 0.18 / 0.58], 1e-12));
        assert!(close(&post, &[0.6897, 0.3103], 1e-4));
        assert!(close(&update(&[0.3, 0.7], &[0.2, 0.2]).unwrap(), &[0.3, 0.7], 1e-15));
        assert_eq!(update(&[1.0, 0.0], &[0.0, 1.0]), Err(FusionError::DegenerateEvidence));
    }

    #[test]
    fn floor_lifts_zeros() {
        let mut b = vec![1.0, 0.0, 0.0];
        apply_floor(&mut b, BELIEF_FLOOR);
        assert!(b.iter().all(|&p| p >= BELIEF_FLOOR * 0.99));
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    fn two_locations() -> FloorPlan {
        FloorPlan::with_tags(2, [(0, 1)], &[]).unwrap()
    }

    /// Probability of a sensor's report pattern about the only person,
    /// enumerating the generative outcomes: detected or not, false positive or not.
    fn enumerate_one_person(s: &SensorSpec, at: LocationId, reported_at: Option<LocationId>) -> f64 {
        let cov: Vec<_> = s.coverage.iter().copied().collect();
        let mut total = 0.0;
        for detected in [false, true] {
            if detected && !s.covers(at) {
                continue;
            }
            let p_det = if !s.covers(at) { 1.0 } else if detected { s.p_detect } else { 1.0 - s.p_detect };
            for fp in std::iter::once(None).chain(cov.iter().map(|&l| Some(l))) {
                let p_fp = match fp {
                    None => 1.0 - s.p_false_positive,
                    Some(_) => s.p_false_positive / cov.len() as f64,
                };
                let mut seen: BTreeSet<LocationId> = fp.into_iter().collect();
                if detected {
                    seen.insert(at);
                }
                let want: BTreeSet<LocationId> = reported_at.into_iter().collect();
                if seen == want {
                    total += p_det * p_fp;
                }
            }
        }
        total
    }

    #[test]
    fn silent_sensor_likelihood_matches_enumeration() {
        let plan = two_locations();
        let s = SensorSpec::new(0, SensorKind::Camera, [0]).with_rates(0.9, 0.02, 0.0);
        let l = likelihood_of_events(&[], 0, std::slice::from_ref(&s), &plan, 1).unwrap();
        let expect = [enumerate_one_person(&s, 0, None), enumerate_one_person(&s, 1, None)];
        assert!(close(&l, &expect, 1e-12), "{l:?} vs {expect:?}");
        assert!(close(&l, &[0.1 * 0.98, 0.98], 1e-12));

        let hit = [ObservationEvent { sensor: 0, day: 0, tick: 0, reported_agent: 0, location: 0 }];
        let l = likelihood_of_events(&hit, 0, std::slice::from_ref(&s), &plan, 1).unwrap();
        let expect = [enumerate_one_person(&s, 0, Some(0)), enumerate_one_person(&s, 1, Some(0))];
        assert!(close(&l, &expect, 1e-12), "{l:?} vs {expect:?}");
    }

    #[test]
    fn missed_detection_without_noise() {
        let plan = two_locations();
        let s = SensorSpec::new(0, SensorKind::Camera, [0]).with_rates(0.9, 0.0, 0.0);
        let l = likelihood_of_events(&[], 0, &[s], &plan, 1).unwrap();
        assert!(close(&l, &[0.1, 1.0], 1e-12));
    }

    #[test]
    fn noiseless_report_concentrates_on_location() {
        let plan = FloorPlan::with_tags(4, [(0, 1), (1, 2), (2, 3)], &[]).unwrap();
        let s = SensorSpec::noiseless(5, [1, 2, 3]);
        let ev = [ObservationEvent { sensor: 5, day: 0, tick: 0, reported_agent: 2, location: 2 }];
        let l = likelihood_of_events(&ev, 2, &[s], &plan, 3).unwrap();
        assert_eq!(l, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn independent_sensors_multiply() {
        let plan = FloorPlan::with_tags(3, [(0, 1), (1, 2)], &[]).unwrap();
        let a = SensorSpec::new(0, SensorKind::Camera, [0, 1]).with_rates(0.8, 0.05, 0.1);
        let b = SensorSpec::new(1, SensorKind::TagReader, [0]).with_rates(0.7, 0.02, 0.0);
        let ev = [
            ObservationEvent { sensor: 0, day: 0, tick: 0, reported_agent: 1, location: 0 },
            ObservationEvent { sensor: 1, day: 0, tick: 0, reported_agent: 1, location: 0 },
        ];
        let both = likelihood_of_events(&ev, 1, &[a.clone(), b.clone()], &plan, 2).unwrap();
        let la = likelihood_of_events(&ev[..1], 1, &[a], &plan, 2).unwrap();
        let lb = likelihood_of_events(&ev[1..], 1, &[b], &plan, 2).unwrap();
        let prod: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| x * y).collect();
        assert!(close(&both, &prod, 1e-15));
    }

    #[test]
    fn reports_must_be_inside_coverage() {
        let plan = two_locations();
        let s = SensorSpec::noiseless(0, [0]);
        let ev = [ObservationEvent { sensor: 0, day: 0, tick: 0, reported_agent: 0, location: 1 }];
        assert!(matches!(
            likelihood_of_events(&ev, 0, std::slice::from_ref(&s), &plan, 1),
            Err(FusionError::OutsideCoverage { .. })
        ));
        let ev = [ObservationEvent { sensor: 9, ..ev[0] }];
        assert_eq!(likelihood_of_events(&ev, 0, &[s], &plan, 1), Err(FusionError::UnknownSensor(9)));
    }

    fn small_config(sensors: Vec<SensorSpec>) -> WorldConfig {
        let plan = FloorPlan::with_tags(3, [(0, 1), (1, 2)], &[(0, LocationTag::Office)]).unwrap();
        let agent = AgentProfile::new(0, 0, [(1, 0.5), (2, 0.5)]);
        let mut c = WorldConfig::new(plan, vec![agent], 4, 1, 1);
        c.sensors = sensors;
        c
    }

    #[test]
    fn without_sensors_beliefs_diffuse() {
        // a sensor that never fires and never errs carries no information
        let config = small_config(vec![SensorSpec::new(0, SensorKind::Camera, [0]).with_rates(0.0, 0.0, 0.0)]);
        let motion = MotionModel::uniform_adjacent(&config);
        let out = fuse_run(&[], &config, &motion).unwrap();
        let k = TransitionKernel::uniform_adjacent(&config.floor_plan);
        let mut b = vec![1.0, 0.0, 0.0];
        for m in &out {
            if m.tick > 0 {
                b = predict(&b, &k);
            }
            let mut floored = b.clone();
            apply_floor(&mut floored, BELIEF_FLOOR);
            assert!(close(&m.probs[0], &floored, 1e-11), "{:?} vs {b:?}", m.probs[0]);
        }
    }

    #[test]
    fn single_tick_matches_predict_then_update() {
        let plan = two_locations();
        let agent = AgentProfile::new(0, 0, [(1, 1.0)]);
        let mut config = WorldConfig::new(plan.clone(), vec![agent], 2, 1, 1);
        let s = SensorSpec::new(0, SensorKind::Camera, [1]).with_rates(0.8, 0.1, 0.0);
        config.sensors = vec![s.clone()];
        let kernel = k2();
        let motion = MotionModel::new([(0, kernel.clone())].into());
        let ev = [ObservationEvent { sensor: 0, day: 0, tick: 1, reported_agent: 0, location: 1 }];
        let out = fuse_run(&ev, &config, &motion).unwrap();

        let l0 = likelihood_of_events(&[], 0, std::slice::from_ref(&s), &plan, 1).unwrap();
        let mut b = update(&[1.0, 0.0], &l0).unwrap();
        apply_floor(&mut b, BELIEF_FLOOR);
        let l1 = likelihood_of_events(&ev, 0, &[s], &plan, 1).unwrap();
        let mut b1 = update(&predict(&b, &kernel), &l1).unwrap();
        apply_floor(&mut b1, BELIEF_FLOOR);
        assert!(close(&out[1].probs[0], &b1, 1e-15));
    }

    #[test]
    fn contradiction_falls_back_to_prediction() {
        let plan = two_locations();
        let agent = AgentProfile::new(0, 0, [(1, 1.0)]);
        let mut config = WorldConfig::new(plan, vec![agent], 1, 1, 1);
        config.sensors = vec![SensorSpec::noiseless(0, [1])];
        let motion = MotionModel::new([(0, k2())].into());
        // noiseless report at 1 contradicts the point mass at home on tick 0
        let ev = [ObservationEvent { sensor: 0, day: 0, tick: 0, reported_agent: 0, location: 1 }];
        let mut got = Vec::new();
        let summary = fuse_run_with(&ev, &config, &motion, |m| got.push(m)).unwrap();
        assert_eq!(summary.degenerate_updates, 1);
        assert_eq!(got[0].probs[0], vec![1.0, 0.0]);
    }

    #[test]
    fn missing_kernel_is_an_error() {
        let config = small_config(Vec::new());
        let motion = MotionModel::new(BTreeMap::new());
        assert_eq!(fuse_run(&[], &config, &motion).unwrap_err(), FusionError::MissingKernel(0));
    }

    #[test]
    fn simulator_motion_model_keeps_adjacency_support() {
        let config = small_config(Vec::new());
        let motion = MotionModel::from_simulator(&config).unwrap();
        let k = motion.kernel(0).unwrap();
        k.check_support(&config.floor_plan).unwrap();
        assert!(k.prob(0, 1) > 0.0 && k.prob(2, 1) > 0.0);
    }
}
