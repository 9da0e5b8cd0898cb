//! File-based pipeline behind the `officelab` binary.
//!
//! Every stage reads its inputs from files listed in the run directory's
//! `manifest.json` and adds its own outputs there, so any stage can be rerun
//! alone against an existing directory.

pub mod manifest;

use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use officelab::analytics::{analyze_agent, AgentReport};
use officelab::contacts::{export_graph, extract_contacts, graph_metrics, AgentTrack, ExportFormat};
use officelab::decode::decode_run;
use officelab::fusion::{fuse_run_with, MotionModel};
use officelab::io::{self, BeliefCsvWriter};
use officelab::sensor::generate_event_log;
use officelab::sim::{paths_by_agent, run_simulation, AgentPaths, TrajectoryRecord};
use officelab::world::{load_config, ConfigError};
use officelab::WorldConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

pub use manifest::{RunManifest, StageTimes, MANIFEST_FILE};

/// Hubs listed in the node metrics file.
pub const HUB_COUNT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Simulate,
    Observe,
    Fuse,
    Decode,
    Analyze,
    Graph,
}

impl Stage {
    pub const ALL: [Stage; 6] = [Stage::Simulate, Stage::Observe, Stage::Fuse, Stage::Decode, Stage::Analyze, Stage::Graph];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Simulate => "simulate",
            Stage::Observe => "observe",
            Stage::Fuse => "fuse",
            Stage::Decode => "decode",
            Stage::Analyze => "analyze",
            Stage::Graph => "graph",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which paths the analytics and graph stages read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticsSource {
    /// Simulated ground-truth trajectories.
    Truth,
    /// Viterbi paths decoded from the sensor events.
    #[default]
    Decoded,
}

impl AnalyticsSource {
    pub fn as_str(self) -> &'static str {
        match self {
            AnalyticsSource::Truth => "truth",
            AnalyticsSource::Decoded => "decoded",
        }
    }
}

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("seed {requested} differs from seed {recorded} recorded in the run manifest")]
    SeedMismatch { requested: u64, recorded: u64 },
    #[error("{0}")]
    Input(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("stage {stage} failed: {message}")]
    Stage { stage: Stage, message: String },
}

impl StageError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        StageError::Io { path: path.into(), source }
    }

    /// 1 for validation problems, 2 for failures while running a stage.
    pub fn exit_code(&self) -> u8 {
        match self {
            StageError::Config(_) | StageError::SeedMismatch { .. } => 1,
            _ => 2,
        }
    }
}

fn fail(e: impl fmt::Display) -> StageError {
    StageError::Input(e.to_string())
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config_path: PathBuf,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub analytics_source: AnalyticsSource,
}

/// A loaded config bound to a run directory.
#[derive(Debug)]
pub struct Run {
    pub config: WorldConfig,
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub source: AnalyticsSource,
}

impl Run {
    /// Loads and validates the config before touching the output directory.
    /// With `fresh`, starts a new manifest; otherwise continues the existing
    /// one, which must carry the same seed.
    pub fn open(opts: &RunOptions, fresh: bool) -> Result<Run, StageError> {
        let mut config = load_config(&opts.config_path)?;
        if let Some(seed) = opts.seed {
            config.rng_seed = seed;
        }
        let manifest = if fresh {
            RunManifest::new(&opts.config_path, config.rng_seed)
        } else {
            let m = RunManifest::load(&opts.out_dir)?;
            if m.seed != config.rng_seed {
                return Err(StageError::SeedMismatch { requested: config.rng_seed, recorded: m.seed });
            }
            m
        };
        fs::create_dir_all(&opts.out_dir).map_err(|e| StageError::io(&opts.out_dir, e))?;
        Ok(Run { config, dir: opts.out_dir.clone(), manifest, source: opts.analytics_source })
    }

    /// Runs one stage, records its outputs and times, and saves the manifest.
    pub fn run_stage(&mut self, stage: Stage) -> Result<(), StageError> {
        log::info!("stage {stage}: start");
        let started = now();
        let result = match stage {
            Stage::Simulate => self.simulate(),
            Stage::Observe => self.observe(),
            Stage::Fuse => self.fuse(),
            Stage::Decode => self.decode(),
            Stage::Analyze => self.analyze(),
            Stage::Graph => self.graph(),
        };
        result.map_err(|e| match e {
            e @ (StageError::Config(_) | StageError::SeedMismatch { .. } | StageError::Stage { .. }) => e,
            e => StageError::Stage { stage, message: e.to_string() },
        })?;
        self.manifest.timestamps.insert(stage.name().to_owned(), StageTimes { started, finished: now() });
        self.manifest.save(&self.dir)?;
        log::info!("stage {stage}: done");
        Ok(())
    }

    fn create(&mut self, key: &str, file: &str) -> Result<(PathBuf, BufWriter<File>), StageError> {
        let path = self.dir.join(file);
        let f = File::create(&path).map_err(|e| StageError::io(&path, e))?;
        self.manifest.outputs.insert(key.to_owned(), PathBuf::from(file));
        Ok((path, BufWriter::new(f)))
    }

    fn open_input(&self, key: &str) -> Result<BufReader<File>, StageError> {
        let path = self.manifest.input(&self.dir, key)?;
        let f = File::open(&path).map_err(|e| StageError::io(&path, e))?;
        Ok(BufReader::new(f))
    }

    fn simulate(&mut self) -> Result<(), StageError> {
        let records = run_simulation(&self.config);
        log::debug!("{} trajectory records", records.len());
        let (_, w) = self.create("trajectories", "trajectories.jsonl")?;
        io::write_trajectories_jsonl(w, &records).map_err(fail)?;
        let (_, w) = self.create("trajectories_csv", "trajectories.csv")?;
        io::write_paths_csv(w, &records).map_err(fail)
    }

    fn read_truth(&self) -> Result<Vec<TrajectoryRecord>, StageError> {
        io::read_trajectories_jsonl(self.open_input("trajectories")?).map_err(|e| StageError::Input(format!("trajectories: {e}")))
    }

    fn read_events(&self) -> Result<Vec<officelab::sensor::ObservationEvent>, StageError> {
        io::read_events_jsonl(self.open_input("events")?).map_err(|e| StageError::Input(format!("events: {e}")))
    }

    fn observe(&mut self) -> Result<(), StageError> {
        let truth = self.read_truth()?;
        let events = generate_event_log(&truth, &self.config.effective_sensors(), self.config.rng_seed);
        log::debug!("{} observation events", events.len());
        let (_, w) = self.create("events", "events.jsonl")?;
        io::write_events_jsonl(w, &events).map_err(fail)
    }

    fn fuse(&mut self) -> Result<(), StageError> {
        let events = self.read_events()?;
        let motion = MotionModel::from_simulator(&self.config).map_err(fail)?;
        let (_, w) = self.create("beliefs", "beliefs.csv")?;
        let mut beliefs = BeliefCsvWriter::new(w).map_err(fail)?;
        let mut argmax = Vec::new();
        let mut write_error = None;
        let summary = fuse_run_with(&events, &self.config, &motion, |m| {
            if write_error.is_none() {
                write_error = beliefs.write(&m).err();
            }
            argmax.extend(
                m.agents
                    .iter()
                    .zip(m.argmax())
                    .map(|(&agent, location)| TrajectoryRecord { agent, day: m.day, tick: m.tick, location }),
            );
        })
        .map_err(fail)?;
        if let Some(e) = write_error {
            return Err(fail(e));
        }
        beliefs.finish().map_err(fail)?;
        log::debug!("{} belief matrices, {} degenerate updates", summary.matrices, summary.degenerate_updates);
        argmax.sort_by_key(|r| (r.agent, r.day, r.tick));
        let (_, w) = self.create("argmax_paths", "argmax_paths.csv")?;
        io::write_paths_csv(w, &argmax).map_err(fail)
    }

    fn decode(&mut self) -> Result<(), StageError> {
        let events = self.read_events()?;
        let motion = MotionModel::from_simulator(&self.config).map_err(fail)?;
        let paths = decode_run(&events, &self.config, &motion).map_err(fail)?;
        let (_, w) = self.create("decoded_paths", "decoded_paths.csv")?;
        io::write_paths_csv(w, &io::decoded_records(&paths)).map_err(fail)?;
        let (_, w) = self.create("decoded_scores", "decoded_scores.csv")?;
        io::write_scores_csv(w, &paths).map_err(fail)
    }

    /// Day paths for the selected analytics source.
    fn source_paths(&self) -> Result<AgentPaths, StageError> {
        let records = match self.source {
            AnalyticsSource::Truth => self.read_truth()?,
            AnalyticsSource::Decoded => io::read_paths_csv(self.open_input("decoded_paths")?)
                .map_err(|e| StageError::Input(format!("decoded paths: {e}")))?,
        };
        paths_by_agent(&records, self.config.days, self.config.ticks_per_day).map_err(StageError::Input)
    }

    fn analyze(&mut self) -> Result<(), StageError> {
        let paths = self.source_paths()?;
        let n = self.config.floor_plan.len();
        let params = &self.config.analytics;
        let reports: Vec<AgentReport> = paths
            .iter()
            .map(|(agent, days)| analyze_agent(*agent, days, n, params))
            .collect::<Result<_, _>>()
            .map_err(fail)?;
        let source = self.source.as_str();
        let (_, w) = self.create("occupancy", "occupancy.csv")?;
        io::write_occupancy_csv(w, source, &reports).map_err(fail)?;
        let (_, w) = self.create("surprise", "surprise.csv")?;
        io::write_surprise_csv(w, source, &reports).map_err(fail)?;
        let (_, w) = self.create("patterns", "patterns.csv")?;
        io::write_patterns_csv(w, source, &reports).map_err(fail)?;
        let (_, w) = self.create("figure", "figure.csv")?;
        io::write_figure_csv(w, source, &reports).map_err(fail)
    }

    fn graph(&mut self) -> Result<(), StageError> {
        let tracks = AgentTrack::from_paths(&self.config, self.source_paths()?);
        let graph = extract_contacts(&tracks, &self.config.floor_plan, &self.config.contact_rule).map_err(fail)?;
        let metrics = graph_metrics(&graph, HUB_COUNT);
        for (key, file, format) in
            [("contacts_dot", "contacts.dot", ExportFormat::Dot), ("contact_edges", "contact_edges.csv", ExportFormat::EdgeCsv)]
        {
            let (path, mut w) = self.create(key, file)?;
            w.write_all(export_graph(&graph, format).as_bytes())
                .and_then(|()| w.flush())
                .map_err(|e| StageError::io(path, e))?;
        }
        let (_, w) = self.create("node_metrics", "node_metrics.csv")?;
        io::write_node_metrics_csv(w, &metrics).map_err(fail)?;
        let (_, w) = self.create("department_matrix", "department_matrix.csv")?;
        io::write_department_matrix_csv(w, &metrics).map_err(fail)
    }
}

fn now() -> String {
    OffsetDateTime::now_utc().format(&Rfc3339).unwrap_or_default()
}

/// Runs one stage against `opts.out_dir`. `simulate` starts a new manifest;
/// the others continue the existing one.
pub fn run_single(opts: &RunOptions, stage: Stage) -> Result<RunManifest, StageError> {
    let mut run = Run::open(opts, stage == Stage::Simulate)?;
    run.run_stage(stage)?;
    Ok(run.manifest)
}

/// Runs every stage in order into a fresh manifest.
pub fn run_pipeline(opts: &RunOptions) -> Result<RunManifest, StageError> {
    let mut run = Run::open(opts, true)?;
    for stage in Stage::ALL {
        run.run_stage(stage)?;
    }
    Ok(run.manifest)
}

/// Paths of every output listed in a manifest, resolved against `dir`.
pub fn listed_outputs(manifest: &RunManifest, dir: &Path) -> Vec<PathBuf> {
    manifest.outputs.values().map(|p| dir.join(p)).collect()
}
