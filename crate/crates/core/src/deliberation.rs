//! The two-phase deliberation loop.
//!
//! Each round every agent first climbs (steepest ascent, radius `d`) to a peak
//! of its own perceived fitness. One agent is then drawn uniformly to propose
//! its peak, and every other agent adopts each differing component of the
//! proposal independently with probability `alpha`.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::beliefs::BeliefStructure;
use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::landscape::NeighborScheme;
use crate::scalar::Fitness;
use crate::schedule::AlphaSchedule;
use crate::search::{check_radius, climb_with_masks, neighborhood_masks};
use crate::seed::{rng_for, stream};

/// Perceived fitness is tabulated for every configuration up to this `n`.
const TABULATE_MAX_N: usize = 14;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationPolicy {
    /// Always move toward the proposal.
    #[default]
    Unconditional,
    /// Move only if the whole proposal looks strictly better to the agent.
    SelfInterested,
}

impl fmt::Display for IntegrationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Unconditional => "unconditional",
            Self::SelfInterested => "self-interested",
        })
    }
}

impl FromStr for IntegrationPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unconditional" => Ok(Self::Unconditional),
            "self-interested" | "self_interested" => Ok(Self::SelfInterested),
            other => Err(Error::param(format!(
                "unknown integration policy {other:?}"
            ))),
        }
    }
}

/// Whose evaluation the decision maker uses to pick among discovered solutions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DmEvaluator {
    #[default]
    Truth,
    Agent(usize),
}

impl DmEvaluator {
    pub fn evaluate<F: Fitness>(
        &self,
        beliefs: &BeliefStructure<F>,
        x: &Configuration,
    ) -> Result<F> {
        match *self {
            DmEvaluator::Truth => beliefs.truth().fitness(x),
            DmEvaluator::Agent(i) => beliefs.perceived_fitness(i, x),
        }
    }
}

impl fmt::Display for DmEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DmEvaluator::Truth => f.write_str("truth"),
            DmEvaluator::Agent(i) => write!(f, "agent:{i}"),
        }
    }
}

impl FromStr for DmEvaluator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "truth" {
            return Ok(DmEvaluator::Truth);
        }
        s.strip_prefix("agent:")
            .and_then(|i| i.parse().ok())
            .map(DmEvaluator::Agent)
            .ok_or_else(|| {
                Error::param(format!(
                    "DM evaluator must be `truth` or `agent:<i>`, got {s:?}"
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeliberationParams {
    pub n: usize,
    pub k: usize,
    /// Number of agents.
    pub m: usize,
    pub t_max: usize,
    /// Local-search radius (Hamming).
    pub d: usize,
    pub schedule: AlphaSchedule,
    pub divergence_weight: f64,
    pub integration_policy: IntegrationPolicy,
    pub stop_on_consensus: bool,
    /// Also count the random starting positions as discovered solutions.
    pub count_initial_positions: bool,
    pub neighbor_scheme: NeighborScheme,
    pub seed: u64,
}

impl Default for DeliberationParams {
    fn default() -> Self {
        Self {
            n: 10,
            k: 5,
            m: 5,
            t_max: 1000,
            d: 1,
            schedule: AlphaSchedule::Constant(0.5),
            divergence_weight: 0.0,
            integration_policy: IntegrationPolicy::Unconditional,
            stop_on_consensus: true,
            count_initial_positions: false,
            neighbor_scheme: NeighborScheme::Random,
            seed: 0,
        }
    }
}

impl DeliberationParams {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::param("m must be at least 1"));
        }
        if self.t_max == 0 {
            return Err(Error::param("t_max must be at least 1"));
        }
        if self.n == 0 {
            return Err(Error::param("n must be at least 1"));
        }
        if self.k >= self.n {
            return Err(Error::param(format!(
                "k must be in [0, n-1], got k={} with n={}",
                self.k, self.n
            )));
        }
        check_radius(self.n, self.d)?;
        if !(0.0..=1.0).contains(&self.divergence_weight) {
            return Err(Error::param(format!(
                "divergence weight must be in [0, 1], got {}",
                self.divergence_weight
            )));
        }
        self.schedule.validate()
    }

    fn check_beliefs<F: Fitness>(&self, beliefs: &BeliefStructure<F>) -> Result<()> {
        let truth = beliefs.truth();
        if truth.n() != self.n || truth.k() != self.k || beliefs.agents() != self.m {
            return Err(Error::param(format!(
                "parameters (n={}, k={}, m={}) do not match beliefs (n={}, k={}, m={})",
                self.n,
                self.k,
                self.m,
                truth.n(),
                truth.k(),
                beliefs.agents()
            )));
        }
        if F::from_weight(self.divergence_weight) != beliefs.weight() {
            return Err(Error::param(format!(
                "divergence weight {} does not match beliefs ({})",
                self.divergence_weight,
                beliefs.weight()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AgentState {
    pub id: usize,
    pub position: Configuration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    /// Local peaks reached in the search phase.
    pub pre_positions: Vec<Configuration>,
    pub proposer: usize,
    pub post_positions: Vec<Configuration>,
    pub alpha_used: f64,
    pub consensus_after: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Consensus,
    RoundLimit,
}

/// What a run produced, without the per-round detail.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub discovered: BTreeSet<Configuration>,
    pub terminated_by: Termination,
    pub rounds_executed: usize,
    /// First round after which all agents held the same position.
    pub consensus_round: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeliberationTrace {
    pub params: DeliberationParams,
    pub initial_positions: Vec<Configuration>,
    pub rounds: Vec<RoundRecord>,
    pub outcome: RunOutcome,
}

impl DeliberationTrace {
    pub fn discovered(&self) -> &BTreeSet<Configuration> {
        &self.outcome.discovered
    }

    pub fn terminated_by(&self) -> Termination {
        self.outcome.terminated_by
    }

    /// One CSV row per round: round, alpha, proposer, consensus flag, then
    /// for each agent its pre/post position and the owner's perceived fitness
    /// at each.
    pub fn write_csv<F: Fitness, W: Write>(
        &self,
        beliefs: &BeliefStructure<F>,
        mut out: W,
    ) -> Result<()> {
        let m = self.params.m;
        let mut header = String::from("round,alpha,proposer,consensus_after");
        for i in 0..m {
            header.push_str(&format!(
                ",pre_{i},pre_fitness_{i},post_{i},post_fitness_{i}"
            ));
        }
        writeln!(out, "{header}")?;
        for r in &self.rounds {
            let mut line = format!(
                "{},{},{},{}",
                r.round, r.alpha_used, r.proposer, r.consensus_after
            );
            for i in 0..m {
                let pre = r.pre_positions[i];
                let post = r.post_positions[i];
                line.push_str(&format!(
                    ",{},{},{},{}",
                    pre,
                    beliefs.perceived_fitness(i, &pre)?,
                    post,
                    beliefs.perceived_fitness(i, &post)?
                ));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Uniform draw of the proposing agent.
pub fn select_proposer<R: Rng + ?Sized>(m: usize, rng: &mut R) -> usize {
    assert!(m >= 1, "at least one agent is required");
    rng.gen_range(0..m)
}

pub fn is_consensus(positions: &[Configuration]) -> bool {
    positions.windows(2).all(|w| w[0] == w[1])
}

/// Moves `current` toward `proposal`: each differing component is adopted
/// independently with probability `alpha`. Under the self-interested policy
/// nothing moves unless `perceived(proposal) > perceived(current)`.
pub fn integrate<F, E, R>(
    current: Configuration,
    proposal: Configuration,
    alpha: f64,
    policy: IntegrationPolicy,
    perceived: E,
    rng: &mut R,
) -> Result<Configuration>
where
    F: Fitness,
    E: Fn(&Configuration) -> F,
    R: Rng + ?Sized,
{
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::param(format!(
            "alpha must be in [0, 1], got {alpha}"
        )));
    }
    proposal.ensure_len(current.len())?;
    if policy == IntegrationPolicy::SelfInterested && perceived(&proposal) <= perceived(&current) {
        return Ok(current);
    }
    Ok(adopt(current, proposal, alpha, rng))
}

#[inline]
fn adopt<R: Rng + ?Sized>(
    current: Configuration,
    proposal: Configuration,
    alpha: f64,
    rng: &mut R,
) -> Configuration {
    let mut next = current;
    for c in current.differing_components(&proposal) {
        if rng.gen::<f64>() < alpha {
            next = next.flipped(c);
        }
    }
    next
}

/// Per-agent view of perceived fitness with cached values and climb targets.
struct AgentView<'a, F> {
    beliefs: &'a BeliefStructure<F>,
    agent: usize,
    table: Option<Vec<F>>,
    peaks: Vec<Option<Configuration>>,
}

impl<'a, F: Fitness> AgentView<'a, F> {
    fn new(beliefs: &'a BeliefStructure<F>, agent: usize) -> Self {
        let n = beliefs.truth().n();
        let (table, peaks) = if n <= TABULATE_MAX_N {
            let table = (0..1u64 << n)
                .map(|idx| {
                    let x = Configuration::from_index(idx, n).expect("index within n bits");
                    beliefs.perceived_unchecked(agent, &x)
                })
                .collect();
            (Some(table), vec![None; 1 << n])
        } else {
            (None, Vec::new())
        };
        Self {
            beliefs,
            agent,
            table,
            peaks,
        }
    }

    #[inline]
    fn value(&self, x: &Configuration) -> F {
        match &self.table {
            Some(t) => t[x.index() as usize],
            None => self.beliefs.perceived_unchecked(self.agent, x),
        }
    }

    fn climb(&mut self, start: Configuration, masks: &[u64]) -> Configuration {
        if let Some(Some(peak)) = self.peaks.get(start.index() as usize) {
            return *peak;
        }
        let peak = climb_with_masks(start, &|x: &Configuration| self.value(x), masks);
        if let Some(slot) = self.peaks.get_mut(start.index() as usize) {
            *slot = Some(peak);
        }
        peak
    }
}

fn random_positions(params: &DeliberationParams) -> Result<Vec<Configuration>> {
    let mut rng = rng_for(params.seed, stream::INITIAL_POSITIONS);
    (0..params.m)
        .map(|_| Configuration::random(params.n, &mut rng))
        .collect()
}

fn simulate<F: Fitness>(
    params: &DeliberationParams,
    beliefs: &BeliefStructure<F>,
    initial: &[Configuration],
    mut record: Option<&mut Vec<RoundRecord>>,
) -> Result<RunOutcome> {
    params.validate()?;
    params.check_beliefs(beliefs)?;
    if initial.len() != params.m {
        return Err(Error::param(format!(
            "{} initial positions for {} agents",
            initial.len(),
            params.m
        )));
    }
    for x in initial {
        x.ensure_len(params.n)?;
    }

    let masks = neighborhood_masks(params.n, params.d);
    // Aligned agents see the same landscape and can share one view.
    let mut views: Vec<AgentView<'_, F>> = if beliefs.is_aligned() {
        vec![AgentView::new(beliefs, 0)]
    } else {
        (0..params.m).map(|i| AgentView::new(beliefs, i)).collect()
    };
    let view_of = |i: usize| if beliefs.is_aligned() { 0 } else { i };

    let mut rng = rng_for(params.seed, stream::DYNAMICS);
    let mut agents: Vec<AgentState> = initial
        .iter()
        .enumerate()
        .map(|(id, &position)| AgentState { id, position })
        .collect();
    let mut discovered = BTreeSet::new();
    if params.count_initial_positions {
        discovered.extend(initial.iter().copied());
    }
    let mut consensus_round = None;
    let mut terminated_by = Termination::RoundLimit;
    let mut rounds_executed = 0;

    for t in 1..=params.t_max {
        let alpha = params.schedule.alpha_at(t, params.t_max)?;
        let pre: Vec<Configuration> = agents
            .iter()
            .map(|a| views[view_of(a.id)].climb(a.position, &masks))
            .collect();
        discovered.extend(pre.iter().copied());

        let proposer = select_proposer(params.m, &mut rng);
        let proposal = pre[proposer];
        for agent in agents.iter_mut() {
            let own = pre[agent.id];
            agent.position = if agent.id == proposer {
                own
            } else {
                let view = &views[view_of(agent.id)];
                integrate(
                    own,
                    proposal,
                    alpha,
                    params.integration_policy,
                    |x: &Configuration| view.value(x),
                    &mut rng,
                )?
            };
        }

        let post: Vec<Configuration> = agents.iter().map(|a| a.position).collect();
        let consensus = is_consensus(&post);
        if consensus && consensus_round.is_none() {
            consensus_round = Some(t);
        }
        rounds_executed = t;
        if let Some(rounds) = record.as_deref_mut() {
            rounds.push(RoundRecord {
                round: t,
                pre_positions: pre,
                proposer,
                post_positions: post,
                alpha_used: alpha,
                consensus_after: consensus,
            });
        }
        if consensus && params.stop_on_consensus {
            terminated_by = Termination::Consensus;
            break;
        }
    }

    Ok(RunOutcome {
        discovered,
        terminated_by,
        rounds_executed,
        consensus_round,
    })
}

/// Full run with per-round records. Initial positions are drawn from
/// `params.seed`.
pub fn run_deliberation<F: Fitness>(
    params: &DeliberationParams,
    beliefs: &BeliefStructure<F>,
) -> Result<DeliberationTrace> {
    params.validate()?;
    let initial = random_positions(params)?;
    run_deliberation_from(params, beliefs, initial)
}

/// Like [`run_deliberation`] but starting from caller-supplied positions.
pub fn run_deliberation_from<F: Fitness>(
    params: &DeliberationParams,
    beliefs: &BeliefStructure<F>,
    initial_positions: Vec<Configuration>,
) -> Result<DeliberationTrace> {
    let mut rounds = Vec::with_capacity(params.t_max.min(1024));
    let outcome = simulate(params, beliefs, &initial_positions, Some(&mut rounds))?;
    Ok(DeliberationTrace {
        params: params.clone(),
        initial_positions,
        rounds,
        outcome,
    })
}

/// Same dynamics as [`run_deliberation`] without keeping round records.
pub fn run_outcome<F: Fitness>(
    params: &DeliberationParams,
    beliefs: &BeliefStructure<F>,
) -> Result<RunOutcome> {
    params.validate()?;
    let initial = random_positions(params)?;
    simulate(params, beliefs, &initial, None)
}

/// Argmax of `evaluate` over a discovered set, ties to the smallest configuration.
pub fn select_best<F, E>(
    discovered: &BTreeSet<Configuration>,
    evaluate: E,
) -> Result<(Configuration, F)>
where
    F: Fitness,
    E: Fn(&Configuration) -> Result<F>,
{
    let mut best: Option<(Configuration, F)> = None;
    for x in discovered {
        let v = evaluate(x)?;
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((*x, v));
        }
    }
    best.ok_or_else(|| Error::State("no solutions were discovered".into()))
}

/// The decision maker's pick among everything the run discovered.
pub fn dm_select<F, E>(trace: &DeliberationTrace, dm_evaluate: E) -> Result<(Configuration, F)>
where
    F: Fitness,
    E: Fn(&Configuration) -> Result<F>,
{
    select_best(trace.discovered(), dm_evaluate)
}
