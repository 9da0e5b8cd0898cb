//! Agent-based movement simulator producing ground-truth trajectories.
//!
//! Each tick an idle agent either stays put or picks somewhere to go:
//! an attended schedule event if one is active, otherwise a draw from its
//! destination distribution. It then walks the shortest path one hop per
//! tick, occasionally taking a random detour and re-planning.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{self, SimRng};
use crate::world::{AgentId, AgentProfile, FloorPlan, LocationId, RoutingTable, WorldConfig};

/// Ground truth: where `agent` was at `(day, tick)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub agent: AgentId,
    pub day: u32,
    pub tick: u32,
    pub location: LocationId,
}

#[derive(Debug, Clone)]
pub struct AgentState {
    pub agent: AgentId,
    pub location: LocationId,
    /// Remaining waypoints; the first one is adjacent to `location`.
    pub pending_path: VecDeque<LocationId>,
    pub day: u32,
    // Per-day attendance decision for each schedule event, drawn on first use.
    attendance: Vec<Option<bool>>,
    rng: SimRng,
}

impl AgentState {
    pub fn new(profile: &AgentProfile, rng: SimRng) -> Self {
        AgentState {
            agent: profile.id,
            location: profile.home,
            pending_path: VecDeque::new(),
            day: 0,
            attendance: vec![None; profile.schedule.len()],
            rng,
        }
    }

    /// Puts the agent back home, idle, with fresh attendance decisions.
    pub fn start_day(&mut self, profile: &AgentProfile, day: u32) {
        self.location = profile.home;
        self.pending_path.clear();
        self.day = day;
        self.attendance = vec![None; profile.schedule.len()];
    }

    pub fn is_idle(&self) -> bool {
        self.pending_path.is_empty()
    }
}

/// Stateless step function over a fixed floor plan.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    plan: &'a FloorPlan,
    routes: RoutingTable,
    fluctuation_rate: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(plan: &'a FloorPlan, fluctuation_rate: f64) -> Self {
        Stepper { plan, routes: RoutingTable::new(plan), fluctuation_rate }
    }

    pub fn routes(&self) -> &RoutingTable {
        &self.routes
    }

    /// Advances one agent by one tick. `co_present` is the number of other
    /// agents sharing its location at the previous tick.
    pub fn step(&self, state: &mut AgentState, profile: &AgentProfile, co_present: usize, tick: u32) {
        if let Some(&dest) = state.pending_path.back() {
            if state.rng.gen::<f64>() < self.fluctuation_rate {
                let nb = self.plan.neighbors(state.location);
                let detour = nb[state.rng.gen_range(0..nb.len())];
                state.location = detour;
                state.pending_path = self.routes.tail(detour, dest);
            } else {
                state.location = state.pending_path.pop_front().expect("non-empty path");
            }
            return;
        }

        if let Some(target) = self.scheduled_target(state, profile, tick) {
            state.pending_path = self.routes.tail(state.location, target);
            return;
        }

        let stay = (profile.stay_at(self.plan, state.location) + co_present as f64 * profile.delta_p).min(1.0);
        if state.rng.gen::<f64>() < stay {
            return;
        }
        let dest = sample_destination(profile, state.rng.gen::<f64>());
        state.pending_path = self.routes.tail(state.location, dest);
    }

    /// Target of the earliest-starting active event the agent attends
    /// (lowest target id on equal starts).
    fn scheduled_target(&self, state: &mut AgentState, profile: &AgentProfile, tick: u32) -> Option<LocationId> {
        let mut active: Vec<usize> = (0..profile.schedule.len())
            .filter(|&k| profile.schedule[k].is_active(state.day, tick))
            .collect();
        active.sort_by_key(|&k| (profile.schedule[k].start_tick, profile.schedule[k].target, k));
        for k in active {
            let ev = &profile.schedule[k];
            let attends = *state.attendance[k].get_or_insert_with(|| state.rng.gen_bool(ev.probability));
            if attends {
                return Some(ev.target);
            }
        }
        None
    }
}

/// Inverse-CDF draw from the agent's destination distribution for `u` in `[0, 1)`.
pub fn sample_destination(profile: &AgentProfile, u: f64) -> LocationId {
    let mut acc = 0.0;
    let mut last = profile.home;
    for (&loc, &p) in &profile.destinations {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = loc;
        if u < acc {
            return loc;
        }
    }
    last
}

/// Runs every agent for `days × ticks_per_day` ticks.
///
/// Records are ordered by `(day, tick, agent id)`. Agents start each day at
/// home; tick 0 is always home. Each agent draws from its own stream, so
/// adding an agent leaves the others' random numbers untouched.
pub fn run_simulation(config: &WorldConfig) -> Vec<TrajectoryRecord> {
    let plan = &config.floor_plan;
    let stepper = Stepper::new(plan, config.fluctuation_rate);
    let mut agents: Vec<&AgentProfile> = config.agents.iter().collect();
    agents.sort_by_key(|a| a.id);
    let mut states: Vec<AgentState> = agents
        .iter()
        .map(|a| AgentState::new(a, rng::stream(config.rng_seed, rng::SIMULATE, u64::from(a.id))))
        .collect();

    let ticks = config.ticks_per_day;
    let mut out = Vec::with_capacity(agents.len() * (ticks as usize) * (config.days as usize));
    let mut occupancy = vec![0usize; plan.len()];
    for day in 0..config.days {
        for (state, profile) in states.iter_mut().zip(&agents) {
            state.start_day(profile, day);
        }
        for tick in 0..ticks {
            if tick > 0 {
                occupancy.iter_mut().for_each(|c| *c = 0);
                for s in &states {
                    occupancy[s.location] += 1;
                }
                for (state, profile) in states.iter_mut().zip(&agents) {
                    let co_present = occupancy[state.location] - 1;
                    stepper.step(state, profile, co_present, tick);
                }
            }
            out.extend(states.iter().map(|s| TrajectoryRecord { agent: s.agent, day, tick, location: s.location }));
        }
    }
    out
}

/// `(agent, days)` pairs where `days[d][t]` is the location at day `d`, tick `t`.
pub type AgentPaths = Vec<(AgentId, Vec<Vec<LocationId>>)>;

/// Per-agent, per-day location sequences from a record list.
///
/// Returned as `(agent, days)` sorted by agent id, where `days[d][t]` is the
/// location at day `d`, tick `t`. Missing records are an error.
pub fn paths_by_agent(
    records: &[TrajectoryRecord],
    days: u32,
    ticks_per_day: u32,
) -> Result<AgentPaths, String> {
    let mut grid: std::collections::BTreeMap<AgentId, Vec<Vec<Option<LocationId>>>> = Default::default();
    for r in records {
        if r.day >= days || r.tick >= ticks_per_day {
            return Err(format!("record (agent {}, day {}, tick {}) is outside the run", r.agent, r.day, r.tick));
        }
        let g = grid
            .entry(r.agent)
            .or_insert_with(|| vec![vec![None; ticks_per_day as usize]; days as usize]);
        g[r.day as usize][r.tick as usize] = Some(r.location);
    }
    grid.into_iter()
        .map(|(agent, g)| {
            let days = g
                .into_iter()
                .enumerate()
                .map(|(d, row)| {
                    row.into_iter()
                        .enumerate()
                        .map(|(t, l)| l.ok_or_else(|| format!("agent {agent} has no record for day {d}, tick {t}")))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((agent, days))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{ScheduleEvent, PowerIteration, stationary_distribution, LocationTag};

    fn line(n: usize) -> FloorPlan {
        FloorPlan::with_tags(n, (1..n).map(|i| (i - 1, i)), &[]).unwrap()
    }

    fn state_for(profile: &AgentProfile, seed: u64) -> AgentState {
        AgentState::new(profile, rng::stream(seed, rng::SIMULATE, u64::from(profile.id)))
    }

    #[test]
    fn absorbing_stay_keeps_agent_in_place() {
        let plan = line(3);
        let profile = AgentProfile::new(0, 1, [(0, 0.5), (2, 0.5)]).with_uniform_stay(&plan, 1.0);
        let stepper = Stepper::new(&plan, 0.05);
        let mut s = state_for(&profile, 1);
        for tick in 0..50 {
            stepper.step(&mut s, &profile, 0, tick);
            assert_eq!(s.location, 1);
            assert!(s.is_idle());
        }
    }

    #[test]
    fn company_pushes_stay_probability_to_one() {
        // min(1, 0.9 + 2 * 0.3) = 1: the agent can never leave.
        let plan = line(3);
        let mut profile = AgentProfile::new(0, 1, [(0, 0.5), (2, 0.5)]).with_uniform_stay(&plan, 0.9);
        profile.delta_p = 0.3;
        let stepper = Stepper::new(&plan, 0.05);
        for seed in 0..20 {
            let mut s = state_for(&profile, seed);
            for tick in 0..100 {
                stepper.step(&mut s, &profile, 2, tick);
                assert!(s.is_idle() && s.location == 1);
            }
        }
    }

    #[test]
    fn certain_schedule_event_sets_route() {
        let plan = line(9);
        let mut profile = AgentProfile::new(0, 2, [(2, 1.0)]).with_uniform_stay(&plan, 1.0);
        profile.schedule.push(ScheduleEvent::new(5, 50, 7, 1.0, "meeting"));
        let stepper = Stepper::new(&plan, 0.0);
        let mut s = state_for(&profile, 3);
        stepper.step(&mut s, &profile, 0, 4);
        assert!(s.is_idle(), "event not active yet");
        stepper.step(&mut s, &profile, 0, 5);
        let expected = crate::world::shortest_path(&plan, 2, 7).unwrap();
        assert_eq!(s.location, 2);
        assert_eq!(Vec::from(s.pending_path.clone()), expected[1..].to_vec());
        for tick in 6..11 {
            stepper.step(&mut s, &profile, 0, tick);
        }
        assert_eq!(s.location, 7);
        // held at the target while the event lasts, despite stay_prob
        stepper.step(&mut s, &profile, 0, 11);
        assert_eq!(s.location, 7);
    }

    #[test]
    fn earliest_starting_event_wins() {
        let plan = line(6);
        let mut profile = AgentProfile::new(0, 0, [(0, 1.0)]).with_uniform_stay(&plan, 1.0);
        profile.schedule.push(ScheduleEvent::new(3, 20, 2, 1.0, "late"));
        profile.schedule.push(ScheduleEvent::new(1, 20, 5, 1.0, "early"));
        let stepper = Stepper::new(&plan, 0.0);
        let mut s = state_for(&profile, 0);
        stepper.step(&mut s, &profile, 0, 4);
        assert_eq!(s.pending_path.back(), Some(&5));
    }

    #[test]
    fn skipped_event_falls_through() {
        let plan = line(4);
        let mut profile = AgentProfile::new(0, 0, [(0, 1.0)]).with_uniform_stay(&plan, 1.0);
        profile.schedule.push(ScheduleEvent::new(0, 20, 3, 0.0, "skipped"));
        let stepper = Stepper::new(&plan, 0.0);
        let mut s = state_for(&profile, 0);
        for tick in 0..20 {
            stepper.step(&mut s, &profile, 0, tick);
            assert_eq!(s.location, 0);
        }
    }

    fn one_agent(plan: FloorPlan, profile: AgentProfile, ticks: u32, days: u32, seed: u64) -> WorldConfig {
        let mut c = WorldConfig::new(plan, vec![profile], ticks, days, seed);
        c.strict_home_stay = false;
        c.validate().unwrap();
        c
    }

    #[test]
    fn stay_forever_records_home() {
        let plan = line(3);
        let profile = AgentProfile::new(4, 2, [(0, 1.0)]).with_uniform_stay(&plan, 1.0);
        let recs = run_simulation(&one_agent(plan, profile, 10, 1, 5));
        assert_eq!(recs.len(), 10);
        assert!(recs.iter().enumerate().all(|(t, r)| r.location == 2 && r.tick as usize == t && r.agent == 4));
    }

    #[test]
    fn records_cover_every_agent_tick_and_day_and_respect_adjacency() {
        let plan = line(5);
        let agents = (0..3)
            .map(|i| AgentProfile::new(i, i as usize, [(0, 0.2), (2, 0.3), (4, 0.5)]).with_uniform_stay(&plan, 0.6))
            .collect();
        let mut c = WorldConfig::new(plan.clone(), agents, 200, 3, 11);
        c.fluctuation_rate = 0.3;
        let recs = run_simulation(&c);
        assert_eq!(recs.len(), 3 * 200 * 3);
        let paths = paths_by_agent(&recs, 3, 200).unwrap();
        for (agent, days) in &paths {
            for day in days {
                assert_eq!(day[0], *agent as usize, "day starts at home");
                for w in day.windows(2) {
                    assert!(w[0] == w[1] || plan.is_adjacent(w[0], w[1]));
                }
            }
        }
    }

    #[test]
    fn seeds_control_trajectories() {
        let plan = line(4);
        let profile = AgentProfile::new(0, 0, [(1, 0.5), (3, 0.5)]).with_uniform_stay(&plan, 0.7);
        let a = run_simulation(&one_agent(plan.clone(), profile.clone(), 1000, 1, 1));
        let b = run_simulation(&one_agent(plan.clone(), profile.clone(), 1000, 1, 1));
        let c = run_simulation(&one_agent(plan, profile, 1000, 1, 2));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn adding_an_agent_does_not_perturb_others() {
        let plan = line(4);
        let a0 = AgentProfile::new(0, 0, [(1, 0.5), (3, 0.5)]).with_uniform_stay(&plan, 0.7);
        let a1 = AgentProfile::new(1, 3, [(0, 1.0)]).with_uniform_stay(&plan, 0.7);
        let solo = run_simulation(&one_agent(plan.clone(), a0.clone(), 500, 1, 9));
        let mut duo_cfg = WorldConfig::new(plan, vec![a0, a1], 500, 1, 9);
        duo_cfg.strict_home_stay = false;
        let duo: Vec<_> = run_simulation(&duo_cfg).into_iter().filter(|r| r.agent == 0).collect();
        assert_eq!(solo, duo);
    }

    #[test]
    fn two_room_occupancy_matches_stationary_oracle() {
        let plan = FloorPlan::with_tags(2, [(0, 1)], &[(0, LocationTag::Office), (1, LocationTag::Office)]).unwrap();
        let profile = AgentProfile::new(0, 0, [(0, 0.5), (1, 0.5)]).with_uniform_stay(&plan, 0.5);
        let oracle = stationary_distribution(&plan, &profile, 0.05, PowerIteration::default()).unwrap();
        let recs = run_simulation(&one_agent(plan, profile, 100_000, 1, 21));
        let mut occ = [0.0; 2];
        for r in &recs {
            occ[r.location] += 1.0 / recs.len() as f64;
        }
        let l1: f64 = occ.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).sum();
        assert!(l1 < 0.01, "L1 {l1}");
    }

    #[test]
    fn destination_sampling_is_inverse_cdf() {
        let p = AgentProfile::new(0, 0, [(1, 0.25), (3, 0.0), (4, 0.75)]);
        assert_eq!(sample_destination(&p, 0.0), 1);
        assert_eq!(sample_destination(&p, 0.2499), 1);
        assert_eq!(sample_destination(&p, 0.25), 4);
        assert_eq!(sample_destination(&p, 0.999_999), 4);
    }
}
