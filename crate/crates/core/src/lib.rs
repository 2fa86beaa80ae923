//! Multi-agent deliberation on NK fitness landscapes.
//!
//! Agents alternate between independent steepest-ascent search on their own
//! perceived landscape and probabilistic integration toward a randomly drawn
//! proposer. The [`experiments`] module runs seeded Monte Carlo batches over
//! integration rates, schedules, ruggedness and belief divergence.
//!
//! Fitness values are generic over [`Fitness`] (`f64` or `f32`); the aliases
//! below fix the default `f64`.

pub mod beliefs;
pub mod cli;
pub mod config;
pub mod deliberation;
pub mod error;
pub mod experiments;
pub mod landscape;
pub mod metrics;
pub mod scalar;
pub mod schedule;
pub mod search;
pub mod seed;
pub mod stats;

pub use beliefs::BeliefStructure;
pub use config::Configuration;
pub use deliberation::{
    dm_select, integrate, is_consensus, run_deliberation, run_deliberation_from, run_outcome,
    select_proposer, AgentState, DeliberationParams, DeliberationTrace, DmEvaluator,
    IntegrationPolicy, RoundRecord, RunOutcome, Termination,
};
pub use error::{Error, Result};
pub use experiments::{
    compare_schedules, run_batch, sweep_alpha, Comparison, Condition, ExperimentResult,
    ExperimentSpec, Pairing,
};
pub use landscape::{enumerate_local_peaks, Landscape, NeighborScheme};
pub use metrics::{distinct_solutions, summarize_run, RunSummary};
pub use scalar::Fitness;
pub use schedule::AlphaSchedule;
pub use search::{local_search, neighborhood};
pub use seed::derive_run_seed;

pub type NkLandscape = Landscape<f64>;
pub type NkLandscape32 = Landscape<f32>;
pub type Beliefs = BeliefStructure<f64>;
pub type Beliefs32 = BeliefStructure<f32>;
