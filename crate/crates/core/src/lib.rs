//! Scheduling of satellite test campaigns on a single shared ground antenna.
//!
//! The crate models passes and test procedures, expands them into candidate
//! procedures, detects conflicts, derives antenna slots and their cost, and
//! searches for Pareto-optimal schedules with NSGA-III, random search or a
//! MAX-MIN ant system. Fronts from repeated runs are compared with GD, spread
//! and hypervolume, Mann–Whitney U and the Vargha–Delaney effect size.

pub mod conflicts;
pub mod evaluation;
pub mod model;
pub mod objectives;
mod par;
pub mod scenario;
pub mod search;
pub mod slotting;

pub use conflicts::{build_graph, ConflictGraph};
pub use evaluation::{compare_runs, gd, hypervolume, spread, Front};
pub use model::{Instant, ProcedureSchedule, SatellitePass, TestProcedure};
pub use objectives::{CostModel, Objectives};
pub use scenario::{CampaignSpec, CandidateSet};
pub use search::{Algorithm, Scenario, SearchConfig};
pub use slotting::SlottingPolicy;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Scenario(#[from] scenario::ScenarioError),
    #[error(transparent)]
    Conflict(#[from] conflicts::ConflictError),
    #[error(transparent)]
    Slotting(#[from] slotting::SlottingError),
    #[error(transparent)]
    Objective(#[from] objectives::ObjectiveError),
    #[error(transparent)]
    Search(#[from] search::SearchError),
    #[error(transparent)]
    Evaluation(#[from] evaluation::EvaluationError),
}

/// Whether the crate was built with parallel evaluation.
pub const PARALLEL_AVAILABLE: bool = cfg!(feature = "parallel");
