//! Synthetic office-life laboratory.
//!
//! People (agents) move through a floor divided into discrete location bins.
//! An imperfect sensor network observes them, per-person beliefs are rebuilt
//! by Bayesian predict/update, most-likely paths are decoded, and the results
//! feed two analyses: per-day surprise against an agent's average day, and a
//! directed contact graph built from co-location.
//!
//! Pipeline, module by module:
//!
//! ```text
//! world ──> sim ──> sensor ──> fusion ──> decode ──> analytics
//!                                                └─> contacts
//! ```

pub mod analytics;
pub mod contacts;
pub mod decode;
pub mod fusion;
pub mod io;
pub mod kernel;
pub mod rng;
pub mod scenarios;
pub mod sensor;
pub mod sim;
pub mod world;

pub use kernel::TransitionKernel;
pub use world::{AgentId, AgentProfile, FloorPlan, LocationId, LocationTag, ScheduleEvent, WorldConfig};
