//! Per-run outcome measures.

use crate::config::Configuration;
use crate::deliberation::{select_best, DeliberationTrace, RunOutcome};
use crate::error::{Error, Result};
use crate::landscape::{Landscape, MAX_ENUMERATION_N};
use crate::scalar::Fitness;

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub distinct_solutions: usize,
    /// The decision maker's pick.
    pub dm_choice: Configuration,
    /// Value of the pick under the decision maker's evaluator.
    pub dm_value: f64,
    /// Ground-truth value of the pick over the global optimum; present when
    /// `n` is small enough to enumerate.
    pub dm_value_normalized: Option<f64>,
    pub consensus_round: Option<usize>,
    pub rounds_executed: usize,
}

pub fn distinct_solutions(trace: &DeliberationTrace) -> usize {
    trace.discovered().len()
}

pub fn summarize_run<F, E>(
    trace: &DeliberationTrace,
    truth: &Landscape<F>,
    dm_evaluate: E,
) -> Result<RunSummary>
where
    F: Fitness,
    E: Fn(&Configuration) -> Result<F>,
{
    summarize_outcome(&trace.outcome, truth, dm_evaluate)
}

pub fn summarize_outcome<F, E>(
    outcome: &RunOutcome,
    truth: &Landscape<F>,
    dm_evaluate: E,
) -> Result<RunSummary>
where
    F: Fitness,
    E: Fn(&Configuration) -> Result<F>,
{
    if let Some(x) = outcome.discovered.iter().find(|x| x.len() != truth.n()) {
        return Err(Error::param(format!(
            "discovered configuration has {} components, landscape has {}",
            x.len(),
            truth.n()
        )));
    }
    let (choice, value) = select_best(&outcome.discovered, dm_evaluate)?;
    let normalized = if truth.n() <= MAX_ENUMERATION_N {
        let (_, best) = truth.global_optimum()?;
        let own = truth.fitness(&choice)?;
        Some(own.to_f64_lossless() / best.to_f64_lossless())
    } else {
        None
    };
    Ok(RunSummary {
        distinct_solutions: outcome.discovered.len(),
        dm_choice: choice,
        dm_value: value.to_f64_lossless(),
        dm_value_normalized: normalized,
        consensus_round: outcome.consensus_round,
        rounds_executed: outcome.rounds_executed,
    })
}
