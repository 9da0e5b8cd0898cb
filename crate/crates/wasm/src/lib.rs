//! Browser bindings. Every export takes plain numbers and returns a JSON
//! string; failures come back as `{"error": "..."}` so the page never has to
//! catch a thrown value.

use officelab::analytics::{analyze_agent, AnalyticsParams};
use officelab::contacts::{extract_contacts, graph_metrics, AgentTrack, ContactRule};
use officelab::decode::decode_run;
use officelab::fusion::{fuse_run, MotionModel};
use officelab::scenarios::{self, office_config, office_sensors, surprise_week_config, UNUSUAL_DAY};
use officelab::sensor::generate_event_log;
use officelab::sim::{paths_by_agent, run_simulation, AgentPaths};
use officelab::{LocationId, WorldConfig};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

const TRACK_AGENTS: usize = 4;
const TRACK_TICKS: u32 = 480;
const TRACK_CONFUSE: f64 = 0.05;
const NETWORK_AGENTS: usize = 10;
const NETWORK_TICKS: u32 = 960;
const NETWORK_DAYS: u32 = 3;
const HUBS: usize = 3;

fn respond(result: Result<serde_json::Value, String>) -> String {
    result.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

#[derive(Serialize)]
struct Bin {
    id: LocationId,
    tag: String,
    door: LocationId,
}

fn floor(config: &WorldConfig) -> Vec<Bin> {
    (0..config.floor_plan.len())
        .map(|id| Bin { id, tag: config.floor_plan.tag(id).as_str().to_owned(), door: scenarios::door_of(id) })
        .collect()
}

fn truth_paths(config: &WorldConfig) -> Result<AgentPaths, String> {
    paths_by_agent(&run_simulation(config), config.days, config.ticks_per_day)
}

/// One focal person over a five-day week whose last day breaks routine.
/// Reports per-day surprise against the week's baseline, computed from the
/// decoded (not true) paths.
#[wasm_bindgen]
pub fn surprise_week(seed: u32) -> String {
    respond(surprise_week_json(u64::from(seed)))
}

fn surprise_week_json(seed: u64) -> Result<serde_json::Value, String> {
    let config = surprise_week_config(seed);
    let truth = run_simulation(&config);
    let events = generate_event_log(&truth, &config.sensors, config.rng_seed);
    let motion = MotionModel::from_simulator(&config).map_err(|e| e.to_string())?;
    let decoded = decode_run(&events, &config, &motion).map_err(|e| e.to_string())?;
    let days: Vec<Vec<LocationId>> = decoded.into_iter().filter(|d| d.agent == 0).map(|d| d.path).collect();
    let params = AnalyticsParams { min_support: 3, ..config.analytics.clone() };
    let report = analyze_agent(0, &days, config.floor_plan.len(), &params).map_err(|e| e.to_string())?;
    Ok(json!({
        "unusual_day": UNUSUAL_DAY,
        "bits": report.surprise.iter().map(|s| s.bits).collect::<Vec<_>>(),
        "baseline": report.baseline.probs,
        "days": report.days.iter().map(|d| &d.probs).collect::<Vec<_>>(),
        "patterns": report.patterns.patterns.iter().take(5).map(|p| json!({"sequence": p.sequence, "support": p.support})).collect::<Vec<_>>(),
        "floor": floor(&config),
    }))
}

/// Tracks agent 0 for one day under the given sensor quality and compares
/// the per-tick argmax and the Viterbi path with the truth.
#[wasm_bindgen]
pub fn track_agent(seed: u32, p_detect: f64, p_false_positive: f64) -> String {
    respond(track_agent_json(u64::from(seed), p_detect, p_false_positive))
}

fn track_agent_json(seed: u64, p_detect: f64, p_false_positive: f64) -> Result<serde_json::Value, String> {
    let mut config = office_config(TRACK_AGENTS, TRACK_TICKS, 1, seed);
    config.sensors = office_sensors(p_detect, p_false_positive, TRACK_CONFUSE);
    config.validate().map_err(|e| e.to_string())?;
    let truth_records = run_simulation(&config);
    let truth = paths_by_agent(&truth_records, 1, TRACK_TICKS)?.swap_remove(0).1.swap_remove(0);
    let events = generate_event_log(&truth_records, &config.sensors, config.rng_seed);
    let motion = MotionModel::from_simulator(&config).map_err(|e| e.to_string())?;
    let argmax: Vec<LocationId> = fuse_run(&events, &config, &motion)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|m| m.argmax()[0])
        .collect();
    let viterbi = decode_run(&events, &config, &motion)
        .map_err(|e| e.to_string())?
        .into_iter()
        .find(|d| d.agent == 0)
        .ok_or("agent 0 was not decoded")?
        .path;
    let accuracy = |p: &[LocationId]| p.iter().zip(&truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64;
    Ok(json!({
        "events": events.iter().filter(|e| e.reported_agent == 0).count(),
        "argmax_accuracy": accuracy(&argmax),
        "viterbi_accuracy": accuracy(&viterbi),
        "truth": truth,
        "argmax": argmax,
        "viterbi": viterbi,
        "floor": floor(&config),
    }))
}

/// Contact network of ten people over three days from true paths, keeping
/// co-locations of at least `min_ticks` consecutive ticks.
#[wasm_bindgen]
pub fn contact_network(seed: u32, min_ticks: u32) -> String {
    respond(contact_network_json(u64::from(seed), min_ticks))
}

fn contact_network_json(seed: u64, min_ticks: u32) -> Result<serde_json::Value, String> {
    let config = office_config(NETWORK_AGENTS, NETWORK_TICKS, NETWORK_DAYS, seed);
    let rule = ContactRule { min_consecutive_ticks: min_ticks, ..config.contact_rule.clone() };
    rule.validate().map_err(|e| e.to_string())?;
    let tracks = AgentTrack::from_paths(&config, truth_paths(&config)?);
    let graph = extract_contacts(&tracks, &config.floor_plan, &rule).map_err(|e| e.to_string())?;
    let metrics = graph_metrics(&graph, HUBS);
    Ok(json!({
        "nodes": metrics.nodes,
        "edges": graph.edges.iter().map(|(&(from, to), &w)| json!({"from": from, "to": to, "ticks": w})).collect::<Vec<_>>(),
        "hubs": metrics.hubs,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: String) -> serde_json::Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn unusual_day_is_the_most_surprising() {
        let v = parse(surprise_week(3));
        let bits: Vec<f64> = serde_json::from_value(v["bits"].clone()).unwrap();
        assert_eq!(bits.len(), 5);
        let top = (0..5).max_by(|&a, &b| bits[a].total_cmp(&bits[b])).unwrap();
        assert_eq!(top as u32, UNUSUAL_DAY, "{bits:?}");
        assert_eq!(v["floor"].as_array().unwrap().len(), scenarios::N_LOCATIONS);
    }

    #[test]
    fn tracking_reports_paths_and_accuracies() {
        let v = parse(track_agent(5, 0.9, 0.01));
        assert_eq!(v["truth"].as_array().unwrap().len(), TRACK_TICKS as usize);
        assert_eq!(v["viterbi"].as_array().unwrap().len(), TRACK_TICKS as usize);
        let acc = v["viterbi_accuracy"].as_f64().unwrap();
        assert!(acc > 0.9, "{acc}");
    }

    #[test]
    fn bad_rates_come_back_as_errors() {
        let v = parse(track_agent(5, 1.5, 0.01));
        assert!(v["error"].as_str().unwrap().contains("1.5"), "{v}");
    }

    #[test]
    fn raising_the_threshold_never_adds_edges() {
        let loose = parse(contact_network(2, 5));
        let strict = parse(contact_network(2, 60));
        let n = |v: &serde_json::Value| v["edges"].as_array().unwrap().len();
        assert!(n(&strict) <= n(&loose));
        assert!(n(&loose) > 0);
        assert_eq!(loose["nodes"].as_array().unwrap().len(), NETWORK_AGENTS);
        assert!(parse(contact_network(2, 0))["error"].is_string());
    }
}
