//! Synthetic worlds used by the demo config, the browser demo and the
//! acceptance suite. All numbers here are made up; none come from a real office.
//!
//! The floor has 50 location bins: a corridor spine of 10 bins with rooms
//! hanging off it.
//!
//! | ids     | tag          | attached to corridor            |
//! |---------|--------------|---------------------------------|
//! | 0..10   | corridor     | spine `0 - 1 - ... - 9`         |
//! | 10..40  | office       | `(id - 10) / 3`                 |
//! | 40..44  | meeting_room | 1, 4, 6, 8                      |
//! | 44, 45  | printer      | 2, 7                            |
//! | 46      | lunch_area   | 5                               |
//! | 47..50  | other        | 0, 3, 9                         |

use std::collections::BTreeMap;

use crate::sensor::{SensorKind, SensorSpec};
use crate::world::{AgentId, AgentProfile, FloorPlan, LocationId, LocationTag, ScheduleEvent, WorldConfig};

pub const N_LOCATIONS: usize = 50;
pub const N_CORRIDORS: usize = 10;
pub const FIRST_OFFICE: LocationId = 10;
pub const N_OFFICES: usize = 30;
pub const MEETING_ROOMS: [LocationId; 4] = [40, 41, 42, 43];
pub const PRINTERS: [LocationId; 2] = [44, 45];
pub const LUNCH_AREA: LocationId = 46;
pub const OTHER_ROOMS: [LocationId; 3] = [47, 48, 49];
pub const N_CAMERAS: u32 = 30;
pub const N_TAG_READERS: u32 = 90;

pub const DEPARTMENTS: [&str; 4] = ["Research", "Development", "Workshops", "Administration"];

const MEETING_DOORS: [LocationId; 4] = [1, 4, 6, 8];
const PRINTER_DOORS: [LocationId; 2] = [2, 7];
const LUNCH_DOOR: LocationId = 5;
const OTHER_DOORS: [LocationId; 3] = [0, 3, 9];

/// Corridor bin an office or room opens onto.
pub fn door_of(loc: LocationId) -> LocationId {
    match loc {
        l if l < N_CORRIDORS => l,
        l if l < FIRST_OFFICE + N_OFFICES => (l - FIRST_OFFICE) / 3,
        l if l < 44 => MEETING_DOORS[l - 40],
        l if l < 46 => PRINTER_DOORS[l - 44],
        LUNCH_AREA => LUNCH_DOOR,
        l => OTHER_DOORS[l - 47],
    }
}

fn office_tags() -> BTreeMap<LocationId, LocationTag> {
    (0..N_LOCATIONS)
        .map(|l| {
            let tag = match l {
                l if l < N_CORRIDORS => LocationTag::Corridor,
                l if l < FIRST_OFFICE + N_OFFICES => LocationTag::Office,
                l if l < 44 => LocationTag::MeetingRoom,
                l if l < 46 => LocationTag::Printer,
                LUNCH_AREA => LocationTag::LunchArea,
                _ => LocationTag::Other,
            };
            (l, tag)
        })
        .collect()
}

fn office_edges() -> Vec<(LocationId, LocationId)> {
    (1..N_CORRIDORS)
        .map(|c| (c - 1, c))
        .chain((N_CORRIDORS..N_LOCATIONS).map(|room| (door_of(room), room)))
        .collect()
}

/// The 50-bin floor with owners registered for the given homes.
pub fn office_floor(owners: &BTreeMap<LocationId, AgentId>) -> FloorPlan {
    FloorPlan::new(N_LOCATIONS, office_edges(), &office_tags(), owners).expect("static floor plan is valid")
}

fn nearest(candidates: &[LocationId], from: LocationId) -> LocationId {
    *candidates
        .iter()
        .min_by_key(|&&c| (door_of(c).abs_diff(door_of(from)), c))
        .expect("non-empty")
}

/// Home office of agent `i` out of `n`: offices in order, except that the
/// last agent shares the previous agent's office when there are at least four.
pub fn home_of_agent(i: usize, n: usize) -> LocationId {
    assert!(n <= N_OFFICES, "at most {N_OFFICES} agents fit the floor");
    if n >= 4 && i == n - 1 {
        FIRST_OFFICE + i - 1
    } else {
        FIRST_OFFICE + i
    }
}

pub fn department_of_agent(i: usize, n: usize) -> &'static str {
    DEPARTMENTS[i * DEPARTMENTS.len() / n]
}

/// Office-worker profile: mostly at home, sometimes visiting colleagues,
/// printers, the kitchen; daily department meeting and lunch.
fn office_worker(i: usize, n: usize, ticks_per_day: u32) -> AgentProfile {
    let home = home_of_agent(i, n);
    let dept = department_of_agent(i, n);
    let dept_index = DEPARTMENTS.iter().position(|d| *d == dept).expect("known department");
    let meeting = MEETING_ROOMS[dept_index];
    let colleagues: Vec<LocationId> = (0..n)
        .filter(|&j| j != i && department_of_agent(j, n) == dept && home_of_agent(j, n) != home)
        .map(|j| home_of_agent(j, n))
        .collect();

    let mut w = BTreeMap::new();
    *w.entry(home).or_insert(0.0) += 0.35;
    *w.entry(meeting).or_insert(0.0) += 0.1;
    *w.entry(nearest(&PRINTERS, home)).or_insert(0.0) += 0.15;
    *w.entry(LUNCH_AREA).or_insert(0.0) += 0.1;
    *w.entry(nearest(&OTHER_ROOMS, home)).or_insert(0.0) += 0.1;
    if colleagues.is_empty() {
        *w.entry(home).or_insert(0.0) += 0.2;
    } else {
        for &c in &colleagues {
            *w.entry(c).or_insert(0.0) += 0.2 / colleagues.len() as f64;
        }
    }

    let mut profile = AgentProfile::new(i as AgentId, home, w);
    profile.department = Some(dept.to_owned());
    profile.stay_prob.insert(home, 0.97);
    // shared rooms stay below 1 even with everyone present
    profile.stay_by_tag.insert(LocationTag::MeetingRoom, 0.8);
    profile.stay_by_tag.insert(LocationTag::LunchArea, 0.7);
    profile.delta_p = 0.01;
    let t = |frac: f64| (f64::from(ticks_per_day) * frac) as u32;
    profile.schedule = vec![
        ScheduleEvent::new(t(0.20), t(0.28), meeting, 0.9, "department meeting"),
        ScheduleEvent::new(t(0.45), t(0.52), LUNCH_AREA, 0.8, "lunch"),
    ];
    profile
}

/// Full-size office world: 50 bins, `n_agents` office workers, 30 cameras and
/// 90 tag readers with the default error rates.
pub fn office_config(n_agents: usize, ticks_per_day: u32, days: u32, seed: u64) -> WorldConfig {
    let agents: Vec<AgentProfile> = (0..n_agents).map(|i| office_worker(i, n_agents, ticks_per_day)).collect();
    let mut owners = BTreeMap::new();
    for a in &agents {
        owners.entry(a.home).or_insert(a.id);
    }
    let mut config = WorldConfig::new(office_floor(&owners), agents, ticks_per_day, days, seed);
    config.sensors = office_sensors(0.9, 0.01, 0.05);
    config.validate().expect("scenario config is valid");
    config
}

/// 30 cameras over corridors and shared rooms plus 90 single-bin tag readers
/// cycling over all 50 bins, all with the given rates.
pub fn office_sensors(p_detect: f64, p_false_positive: f64, p_confuse: f64) -> Vec<SensorSpec> {
    let shared: Vec<LocationId> = MEETING_ROOMS
        .iter()
        .chain(&PRINTERS)
        .chain(std::iter::once(&LUNCH_AREA))
        .chain(&OTHER_ROOMS)
        .copied()
        .collect();
    let cameras = (0..N_CAMERAS).map(|k| {
        let k_us = k as usize;
        let coverage: Vec<LocationId> = if k_us < N_CORRIDORS {
            vec![k_us]
        } else if k_us < N_CORRIDORS + shared.len() {
            let room = shared[k_us - N_CORRIDORS];
            vec![room, door_of(room)]
        } else {
            let c = k_us - N_CORRIDORS - shared.len();
            vec![c, (c + 1) % N_CORRIDORS]
        };
        SensorSpec::new(k, SensorKind::Camera, coverage)
    });
    let readers = (0..N_TAG_READERS).map(|k| SensorSpec::new(N_CAMERAS + k, SensorKind::TagReader, [k as usize % N_LOCATIONS]));
    cameras
        .chain(readers)
        .map(|s| s.with_rates(p_detect, p_false_positive, p_confuse))
        .collect()
}

/// Index of the unusual day in [`surprise_week_config`].
pub const UNUSUAL_DAY: u32 = 4;

/// A five-day week for one focal person (agent 0, Research) plus two
/// colleagues. Days 0-3 follow the routine: department meeting in room 40
/// and lunch. On day 4 the routine is replaced by an all-day workshop in
/// meeting room 43, far from home.
pub fn surprise_week_config(seed: u64) -> WorldConfig {
    let ticks = 480;
    let mut config = office_config(3, ticks, 5, seed);
    let routine = [0, 1, 2, 3];
    let focal = &mut config.agents[0];
    for ev in &mut focal.schedule {
        ev.days = Some(routine.to_vec());
    }
    focal.schedule.push(ScheduleEvent::new(40, 420, MEETING_ROOMS[3], 1.0, "off-site workshop").on_days(&[UNUSUAL_DAY]));
    config.validate().expect("scenario config is valid");
    config
}
