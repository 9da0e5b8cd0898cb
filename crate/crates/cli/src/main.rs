use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use officelab_cli::{run_pipeline, run_single, AnalyticsSource, RunOptions, Stage};

/// Simulate office movement, observe it with noisy sensors, rebuild
/// locations and analyse behavior and contacts.
#[derive(Debug, Parser)]
#[command(name = "officelab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the movement simulator and write trajectories.
    Simulate(Common),
    /// Generate sensor events from the trajectories.
    Observe(Common),
    /// Track everyone from the events and write belief matrices.
    Fuse(Common),
    /// Decode most likely paths from the events.
    Decode(Common),
    /// Occupancy, surprise and pattern reports.
    Analyze(Common),
    /// Contact graph, metrics and DOT export.
    Graph(Common),
    /// Every stage in order.
    Pipeline(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// World config (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Run directory holding outputs and manifest.json.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Overrides the config's rng_seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Paths read by the analyze and graph stages.
    #[arg(long, value_enum, default_value_t = AnalyticsSource::Decoded)]
    analytics_source: AnalyticsSource,
}

impl From<&Common> for RunOptions {
    fn from(c: &Common) -> Self {
        RunOptions {
            config_path: c.config.clone(),
            out_dir: c.out.clone(),
            seed: c.seed,
            analytics_source: c.analytics_source,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("OFFICELAB_LOG", "info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (common, stage) = match &cli.command {
        Command::Simulate(c) => (c, Some(Stage::Simulate)),
        Command::Observe(c) => (c, Some(Stage::Observe)),
        Command::Fuse(c) => (c, Some(Stage::Fuse)),
        Command::Decode(c) => (c, Some(Stage::Decode)),
        Command::Analyze(c) => (c, Some(Stage::Analyze)),
        Command::Graph(c) => (c, Some(Stage::Graph)),
        Command::Pipeline(c) => (c, None),
    };
    let opts = RunOptions::from(common);
    let result = match stage {
        Some(stage) => run_single(&opts, stage),
        None => run_pipeline(&opts),
    };
    match result {
        Ok(manifest) => {
            log::info!("{} outputs listed in {}", manifest.outputs.len(), opts.out_dir.join(officelab_cli::MANIFEST_FILE).display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
