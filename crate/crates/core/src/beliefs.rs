//! Agents' perceived payoffs.
//!
//! Agent `i` perceives `(1 - w) * truth(x) + w * divergence_i(x)`, where each
//! divergence landscape is an independent NK landscape of the same shape as
//! the ground truth and `w` in `[0, 1]` sets how far evaluations drift apart.

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::landscape::{Landscape, NeighborScheme};
use crate::scalar::Fitness;
use crate::seed::{salt, split_seed};

#[derive(Clone, Debug, PartialEq)]
pub struct BeliefStructure<F> {
    truth: Landscape<F>,
    divergence: Vec<Landscape<F>>,
    weight: F,
}

impl<F: Fitness> BeliefStructure<F> {
    pub fn new(truth: Landscape<F>, divergence: Vec<Landscape<F>>, weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::param(format!(
                "divergence weight must be in [0, 1], got {weight}"
            )));
        }
        if divergence.is_empty() {
            return Err(Error::param("at least one agent is required"));
        }
        if let Some(i) = divergence
            .iter()
            .position(|b| b.n() != truth.n() || b.k() != truth.k())
        {
            return Err(Error::param(format!(
                "divergence landscape {i} has shape ({}, {}), truth is ({}, {})",
                divergence[i].n(),
                divergence[i].k(),
                truth.n(),
                truth.k()
            )));
        }
        Ok(Self {
            truth,
            divergence,
            weight: F::from_weight(weight),
        })
    }

    /// Truth and `m` divergence landscapes, all derived from `seed`.
    pub fn generate(
        n: usize,
        k: usize,
        m: usize,
        weight: f64,
        scheme: NeighborScheme,
        seed: u64,
    ) -> Result<Self> {
        let truth = Landscape::generate(n, k, scheme, split_seed(seed, salt::TRUTH, 0))?;
        let divergence = (0..m as u64)
            .map(|i| Landscape::generate(n, k, scheme, split_seed(seed, salt::DIVERGENCE, i)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(truth, divergence, weight)
    }

    pub fn truth(&self) -> &Landscape<F> {
        &self.truth
    }

    pub fn divergence(&self, agent: usize) -> Option<&Landscape<F>> {
        self.divergence.get(agent)
    }

    pub fn agents(&self) -> usize {
        self.divergence.len()
    }

    pub fn weight(&self) -> F {
        self.weight
    }

    pub fn is_aligned(&self) -> bool {
        self.weight == F::zero()
    }

    pub fn perceived_fitness(&self, agent: usize, x: &Configuration) -> Result<F> {
        if agent >= self.agents() {
            return Err(Error::param(format!(
                "agent {agent} out of range for {} agents",
                self.agents()
            )));
        }
        x.ensure_len(self.truth.n())?;
        Ok(self.perceived_unchecked(agent, x))
    }

    #[inline]
    pub(crate) fn perceived_unchecked(&self, agent: usize, x: &Configuration) -> F {
        let truth = self.truth.fitness_unchecked(x);
        if self.is_aligned() {
            return truth;
        }
        let own = self.divergence[agent].fitness_unchecked(x);
        ((F::one() - self.weight) * truth + self.weight * own).clamp_unit()
    }
}
