//! File formats for stage handoff.
//!
//! | artifact          | format | columns / fields                               |
//! |-------------------|--------|------------------------------------------------|
//! | trajectories      | JSONL  | agent, day, tick, location                     |
//! | trajectories      | CSV    | agent, day, tick, location                     |
//! | events            | JSONL  | sensor, day, tick, reported_agent, location    |
//! | beliefs           | CSV    | day, tick, agent, location, probability        |
//! | paths             | CSV    | agent, day, tick, location                     |
//! | path scores       | CSV    | agent, day, log_score                          |
//! | occupancy         | CSV    | agent, scope, location, probability            |
//! | surprise          | CSV    | agent, day, bits                               |
//! | patterns          | CSV    | agent, pattern, support                        |
//! | figure data       | CSV    | panel, agent, day, location, value             |
//! | node metrics      | CSV    | agent, department, in/out degree and weights   |
//! | department matrix | CSV    | from_department, to_department, weight         |
//!
//! Belief rows below [`BELIEF_SPARSITY`] are omitted. Analytics reports
//! start with a `# source: <truth|decoded>` comment line.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::AgentReport;
use crate::contacts::GraphMetrics;
use crate::decode::DecodedPath;
use crate::fusion::BeliefMatrix;
use crate::sensor::ObservationEvent;
use crate::sim::TrajectoryRecord;
use crate::world::{AgentId, LocationId};

/// Belief entries below this probability are not written.
pub const BELIEF_SPARSITY: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub fn write_jsonl<T: Serialize>(mut w: impl Write, items: &[T]) -> Result<(), IoError> {
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|source| IoError::Json { line: 0, source })?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<T: DeserializeOwned>(r: impl BufRead) -> Result<Vec<T>, IoError> {
    let mut out = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| IoError::Json { line: k + 1, source })?);
    }
    Ok(out)
}

pub fn write_trajectories_jsonl(w: impl Write, records: &[TrajectoryRecord]) -> Result<(), IoError> {
    write_jsonl(w, records)
}

pub fn read_trajectories_jsonl(r: impl BufRead) -> Result<Vec<TrajectoryRecord>, IoError> {
    read_jsonl(r)
}

pub fn write_events_jsonl(w: impl Write, events: &[ObservationEvent]) -> Result<(), IoError> {
    write_jsonl(w, events)
}

pub fn read_events_jsonl(r: impl BufRead) -> Result<Vec<ObservationEvent>, IoError> {
    read_jsonl(r)
}

fn csv_writer<W: Write>(mut w: W, source: Option<&str>) -> Result<csv::Writer<W>, IoError> {
    if let Some(src) = source {
        writeln!(w, "# source: {src}")?;
    }
    Ok(csv::Writer::from_writer(w))
}

fn read_csv<T: DeserializeOwned>(r: impl std::io::Read) -> Result<Vec<T>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    Ok(rdr.deserialize().collect::<Result<Vec<T>, _>>()?)
}

/// Same columns as the trajectory JSONL; also used for decoded and argmax paths.
pub fn write_paths_csv(w: impl Write, records: &[TrajectoryRecord]) -> Result<(), IoError> {
    let mut wtr = csv_writer(w, None)?;
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_paths_csv(r: impl std::io::Read) -> Result<Vec<TrajectoryRecord>, IoError> {
    read_csv(r)
}

#[derive(Debug, Serialize)]
struct BeliefRow {
    day: u32,
    tick: u32,
    agent: AgentId,
    location: LocationId,
    probability: f64,
}

/// Streams belief matrices into CSV.
pub struct BeliefCsvWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> BeliefCsvWriter<W> {
    pub fn new(w: W) -> Result<Self, IoError> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        inner.write_record(["day", "tick", "agent", "location", "probability"])?;
        Ok(BeliefCsvWriter { inner })
    }

    pub fn write(&mut self, m: &BeliefMatrix) -> Result<(), IoError> {
        for (agent, row) in m.agents.iter().zip(&m.probs) {
            for (location, &probability) in row.iter().enumerate() {
                if probability >= BELIEF_SPARSITY {
                    self.inner.serialize(BeliefRow { day: m.day, tick: m.tick, agent: *agent, location, probability })?;
                }
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), IoError> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Decoded paths flattened to one row per tick, ordered by `(agent, day, tick)`.
pub fn decoded_records(paths: &[DecodedPath]) -> Vec<TrajectoryRecord> {
    paths
        .iter()
        .flat_map(|p| {
            p.path
                .iter()
                .enumerate()
                .map(move |(t, &location)| TrajectoryRecord { agent: p.agent, day: p.day, tick: t as u32, location })
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScoreRow {
    pub agent: AgentId,
    pub day: u32,
    pub log_score: f64,
}

pub fn write_scores_csv(w: impl Write, paths: &[DecodedPath]) -> Result<(), IoError> {
    let mut wtr = csv_writer(w, None)?;
    for p in paths {
        wtr.serialize(ScoreRow { agent: p.agent, day: p.day, log_score: p.log_score })?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_scores_csv(r: impl std::io::Read) -> Result<Vec<ScoreRow>, IoError> {
    read_csv(r)
}

pub fn write_occupancy_csv(w: impl Write, source: &str, reports: &[AgentReport]) -> Result<(), IoError> {
    let mut wtr = csv_writer(w, Some(source))?;
    wtr.write_record(["agent", "scope", "location", "probability"])?;
    for r in reports {
        for dist in std::iter::once(&r.baseline).chain(&r.days) {
            for (loc, p) in dist.probs.iter().enumerate() {
                wtr.write_record([r.agent.to_string(), dist.scope.to_string(), loc.to_string(), p.to_string()])?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurpriseRow {
    pub agent: AgentId,
    pub day: u32,
    pub bits: f64,
}

pub fn write_surprise_csv(w: impl Write, source: &str, reports: &[AgentReport]) -> Result<(), IoError> {
    let mut wtr = csv_writer(w, Some(source))?;
    for r in reports {
        for s in &r.surprise {
            wtr.serialize(SurpriseRow { agent: s.agent, day: s.day, bits: s.bits })?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_surprise_csv(r: impl std::io::Read) -> Result<Vec<SurpriseRow>, IoError> {
    read_csv(r)
}

/// Patterns are written as `>`-joined location ids, e.g. `3>7>3`.
pub fn write_patterns_csv(w: impl Write, source: &str, reports: &[AgentReport]) -> Result<(), IoError> {
    let mut wtr = csv_writer(w, Some(source))?;
    wtr.write_record(["agent", "pattern", "support"])?;
    for r in reports {
        for p in &r.patterns.patterns {
            let pattern = p.sequence.iter().map(ToString::to_string).collect::<Vec<_>>().join(">");
            wtr.write_record([r.agent.to_string(), pattern, p.support.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Long-format plot data: panel `a` is the pooled occupancy, `b` the per-day
/// occupancy, `c` the per-day surprise (no location).
pub fn write_figure_csv(w: impl Write, source: &str, reports: &[AgentReport]) -> Result<(), IoError> {
    let mut wtr = csv_writer(w, Some(source))?;
    wtr.write_record(["panel", "agent", "day", "location", "value"])?;
    for r in reports {
        for (loc, p) in r.baseline.probs.iter().enumerate() {
            wtr.write_record(["a".into(), r.agent.to_string(), String::new(), loc.to_string(), p.to_string()])?;
        }
        for (d, dist) in r.days.iter().enumerate() {
            for (loc, p) in dist.probs.iter().enumerate() {
                wtr.write_record(["b".into(), r.agent.to_string(), d.to_string(), loc.to_string(), p.to_string()])?;
            }
        }
        for s in &r.surprise {
            wtr.write_record(["c".into(), r.agent.to_string(), s.day.to_string(), String::new(), s.bits.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_node_metrics_csv(w: impl Write, metrics: &GraphMetrics) -> Result<(), IoError> {
    let mut wtr = csv_writer(w, None)?;
    wtr.write_record(["agent", "department", "in_degree", "out_degree", "weighted_in", "weighted_out", "weighted_total", "hub_rank"])?;
    for n in &metrics.nodes {
        let rank = metrics.hubs.iter().position(|&h| h == n.agent).map(|r| (r + 1).to_string()).unwrap_or_default();
        wtr.write_record([
            n.agent.to_string(),
            n.department.clone(),
            n.in_degree.to_string(),
            n.out_degree.to_string(),
            n.weighted_in.to_string(),
            n.weighted_out.to_string(),
            n.weighted_total().to_string(),
            rank,
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_department_matrix_csv(w: impl Write, metrics: &GraphMetrics) -> Result<(), IoError> {
    let mut wtr = csv_writer(w, None)?;
    wtr.write_record(["from_department", "to_department", "weight"])?;
    for ((from, to), weight) in &metrics.department_matrix {
        wtr.write_record([from.clone(), to.clone(), weight.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
