//! Monte Carlo harness: batched runs over conditions, sweeps and paired
//! schedule comparisons.
//!
//! Results are a pure function of the [`ExperimentSpec`]. Runs execute on the
//! current rayon pool and are reduced in `(condition, run)` order, so thread
//! count never changes the output.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beliefs::BeliefStructure;
use crate::deliberation::{run_outcome, DeliberationParams, DmEvaluator};
use crate::error::{Error, Result};
use crate::metrics::{summarize_outcome, RunSummary};
use crate::scalar::Fitness;
use crate::schedule::AlphaSchedule;
use crate::seed::{derive_run_seed, rng_for, salt, split_seed, stream};
use crate::stats::{self, Interval};

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const CONFIDENCE_LEVEL: f64 = 0.95;

/// `{0.0, 0.1, ..., 1.0}`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// Run `r` of every condition shares one seed (landscapes, starts, dynamics).
    #[default]
    CommonRandomNumbers,
    Independent,
}

impl std::str::FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crn" | "common" | "common_random_numbers" | "common-random-numbers" => {
                Ok(Pairing::CommonRandomNumbers)
            }
            "independent" => Ok(Pairing::Independent),
            other => Err(Error::param(format!("unknown pairing {other:?}"))),
        }
    }
}

impl std::fmt::Display for Pairing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Pairing::CommonRandomNumbers => "common_random_numbers",
            Pairing::Independent => "independent",
        })
    }
}

/// Overrides applied to the base parameters for one condition.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Condition {
    pub label: String,
    pub k: Option<usize>,
    pub divergence_weight: Option<f64>,
    pub schedule: Option<AlphaSchedule>,
}

impl Condition {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            ..Default::default()
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_weight(mut self, w: f64) -> Self {
        self.divergence_weight = Some(w);
        self
    }

    pub fn with_schedule(mut self, s: AlphaSchedule) -> Self {
        self.schedule = Some(s);
        self
    }

    pub fn apply(&self, base: &DeliberationParams) -> DeliberationParams {
        let mut p = base.clone();
        if let Some(k) = self.k {
            p.k = k;
        }
        if let Some(w) = self.divergence_weight {
            p.divergence_weight = w;
        }
        if let Some(s) = &self.schedule {
            p.schedule = s.clone();
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub base: DeliberationParams,
    pub conditions: Vec<Condition>,
    pub runs_per_condition: usize,
    pub master_seed: u64,
    pub pairing: Pairing,
    pub dm: DmEvaluator,
    /// Bootstrap resamples for every interval and p-value.
    pub resamples: usize,
}

impl ExperimentSpec {
    pub fn new(
        base: DeliberationParams,
        conditions: Vec<Condition>,
        runs_per_condition: usize,
        master_seed: u64,
    ) -> Self {
        Self {
            base,
            conditions,
            runs_per_condition,
            master_seed,
            pairing: Pairing::CommonRandomNumbers,
            dm: DmEvaluator::Truth,
            resamples: DEFAULT_RESAMPLES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.conditions.is_empty() {
            return Err(Error::param("an experiment needs at least one condition"));
        }
        if self.runs_per_condition == 0 {
            return Err(Error::param("runs per condition must be at least 1"));
        }
        if self.conditions.len() > u32::MAX as usize || self.runs_per_condition > u32::MAX as usize
        {
            return Err(Error::param("condition or run count exceeds 2^32"));
        }
        for c in &self.conditions {
            let p = c.apply(&self.base);
            p.validate()
                .map_err(|e| Error::param(format!("condition {:?}: {e}", c.label)))?;
            if let DmEvaluator::Agent(i) = self.dm {
                if i >= p.m {
                    return Err(Error::param(format!(
                        "DM evaluator agent {i} out of range for m={}",
                        p.m
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn run_seed(&self, condition_index: usize, run_index: usize) -> u64 {
        let c = match self.pairing {
            Pairing::CommonRandomNumbers => 0,
            Pairing::Independent => condition_index as u32,
        };
        derive_run_seed(self.master_seed, c, run_index as u32)
    }
}

/// Executes one seeded run: builds the belief structure from the run seed,
/// runs the deliberation and summarizes it.
pub fn execute_run<F: Fitness>(
    params: &DeliberationParams,
    seed: u64,
    dm: DmEvaluator,
) -> Result<RunSummary> {
    let mut p = params.clone();
    p.seed = seed;
    let beliefs = BeliefStructure::<F>::generate(
        p.n,
        p.k,
        p.m,
        p.divergence_weight,
        p.neighbor_scheme,
        split_seed(seed, salt::BELIEFS, 0),
    )?;
    let outcome = run_outcome(&p, &beliefs)?;
    summarize_outcome(&outcome, beliefs.truth(), |x| dm.evaluate(&beliefs, x))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub run_index: usize,
    pub seed: u64,
    pub summary: RunSummary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionStats {
    pub runs: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci: Interval,
    pub mean_dm_value: f64,
    pub mean_dm_value_normalized: Option<f64>,
    /// Mean consensus round among runs that reached consensus.
    pub mean_consensus_round: Option<f64>,
    pub converged_runs: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionResult {
    pub label: String,
    /// Effective parameters (seed field is the master seed).
    pub params: DeliberationParams,
    pub runs: Vec<RunRecord>,
    pub stats: ConditionStats,
}

impl ConditionResult {
    pub fn distinct_counts(&self) -> Vec<f64> {
        self.runs
            .iter()
            .map(|r| r.summary.distinct_solutions as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub label_a: String,
    pub label_b: String,
    pub runs: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Mean over runs of `distinct_a - distinct_b`.
    pub mean_difference: f64,
    /// One-sided bootstrap p-value for `mean_difference > 0`.
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub master_seed: u64,
    pub pairing: Pairing,
    pub resamples: usize,
    pub conditions: Vec<ConditionResult>,
}

fn condition_stats(runs: &[RunRecord], resamples: usize, boot_seed: u64) -> ConditionStats {
    let counts: Vec<f64> = runs
        .iter()
        .map(|r| r.summary.distinct_solutions as f64)
        .collect();
    let mut rng = rng_for(boot_seed, stream::BOOTSTRAP);
    let dm: Vec<f64> = runs.iter().map(|r| r.summary.dm_value).collect();
    let normalized: Option<Vec<f64>> = runs.iter().map(|r| r.summary.dm_value_normalized).collect();
    let converged: Vec<f64> = runs
        .iter()
        .filter_map(|r| r.summary.consensus_round.map(|c| c as f64))
        .collect();
    ConditionStats {
        runs: runs.len(),
        mean: stats::mean(&counts),
        sd: stats::sample_sd(&counts),
        ci: stats::bootstrap_mean_ci(&counts, resamples, CONFIDENCE_LEVEL, &mut rng),
        mean_dm_value: stats::mean(&dm),
        mean_dm_value_normalized: normalized.map(|v| stats::mean(&v)),
        mean_consensus_round: (!converged.is_empty()).then(|| stats::mean(&converged)),
        converged_runs: converged.len(),
    }
}

impl ExperimentResult {
    pub fn condition(&self, label: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.label == label)
    }

    /// Paired comparison of conditions `a` and `b` over run index.
    pub fn compare(&self, a: usize, b: usize) -> Result<Comparison> {
        let (ca, cb) = (&self.conditions[a], &self.conditions[b]);
        if ca.runs.len() != cb.runs.len() {
            return Err(Error::State("paired conditions differ in run count".into()));
        }
        let xa = ca.distinct_counts();
        let xb = cb.distinct_counts();
        let diffs: Vec<f64> = xa.iter().zip(&xb).map(|(x, y)| x - y).collect();
        let boot_seed = split_seed(
            self.master_seed,
            salt::BOOTSTRAP,
            ((a as u64) << 32) | (b as u64 + 1) << 16,
        );
        let mut rng = rng_for(boot_seed, stream::BOOTSTRAP);
        Ok(Comparison {
            label_a: ca.label.clone(),
            label_b: cb.label.clone(),
            runs: diffs.len(),
            mean_a: stats::mean(&xa),
            mean_b: stats::mean(&xb),
            mean_difference: stats::mean(&diffs),
            p_value: stats::paired_bootstrap_p(&diffs, self.resamples, &mut rng),
        })
    }

    /// Bootstrap interval for `max - min` of mean distinct counts over the
    /// given conditions, resampling run indices jointly.
    pub fn spread_ci(&self, indices: &[usize]) -> (f64, Interval) {
        let columns: Vec<Vec<f64>> = indices
            .iter()
            .map(|&i| self.conditions[i].distinct_counts())
            .collect();
        let key = indices
            .iter()
            .fold(0u64, |h, &i| crate::seed::mix64(h ^ i as u64));
        let mut rng = rng_for(
            split_seed(self.master_seed, salt::BOOTSTRAP, key),
            stream::BOOTSTRAP,
        );
        let ci = stats::bootstrap_spread_ci(&columns, self.resamples, CONFIDENCE_LEVEL, &mut rng);
        (stats::spread_of_means(&columns), ci)
    }

    /// One row per run.
    pub fn write_runs_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "condition_label,k,w,alpha_spec,run_index,seed,distinct_solutions,dm_value,dm_value_normalized,consensus_round,rounds_executed"
        )?;
        for c in &self.conditions {
            for r in &c.runs {
                let s = &r.summary;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    c.label,
                    c.params.k,
                    c.params.divergence_weight,
                    c.params.schedule,
                    r.run_index,
                    r.seed,
                    s.distinct_solutions,
                    s.dm_value,
                    opt(s.dm_value_normalized),
                    opt(s.consensus_round),
                    s.rounds_executed
                )?;
            }
        }
        Ok(())
    }

    /// One row per condition.
    pub fn write_aggregate_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{AGGREGATE_HEADER}")?;
        for c in &self.conditions {
            let s = &c.stats;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                c.label,
                c.params.k,
                c.params.divergence_weight,
                c.params.schedule,
                s.runs,
                s.mean,
                s.sd,
                s.ci.low,
                s.ci.high,
                s.mean_dm_value,
                opt(s.mean_dm_value_normalized),
                opt(s.mean_consensus_round),
                s.converged_runs
            )?;
        }
        Ok(())
    }
}

/// Column order of the per-condition aggregate CSV.
pub const AGGREGATE_HEADER: &str = "condition_label,k,w,alpha_spec,runs,mean,sd,ci_low,ci_high,mean_dm_value,mean_dm_value_normalized,mean_consensus_round,converged_runs";

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl Comparison {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "label_a,label_b,runs,mean_a,mean_b,mean_difference,p_value"
        )?;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            self.label_a,
            self.label_b,
            self.runs,
            self.mean_a,
            self.mean_b,
            self.mean_difference,
            self.p_value
        )?;
        Ok(())
    }
}

/// Runs every condition of `spec` with `f64` landscapes.
pub fn run_batch(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    run_batch_with::<f64>(spec)
}

pub fn run_batch_with<F: Fitness>(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let params: Vec<DeliberationParams> = spec
        .conditions
        .iter()
        .map(|c| {
            let mut p = c.apply(&spec.base);
            p.seed = spec.master_seed;
            p
        })
        .collect();
    let runs = spec.runs_per_condition;
    let jobs: Vec<(usize, usize)> = (0..spec.conditions.len())
        .flat_map(|c| (0..runs).map(move |r| (c, r)))
        .collect();
    let outcomes: Vec<Result<RunRecord>> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let seed = spec.run_seed(c, r);
            execute_run::<F>(&params[c], seed, spec.dm)
                .map(|summary| RunRecord {
                    run_index: r,
                    seed,
                    summary,
                })
                .map_err(|e| Error::Run {
                    seed,
                    source: Box::new(e),
                })
        })
        .collect();
    let mut records = outcomes
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter();

    let grouped: Vec<(usize, Vec<RunRecord>)> = (0..spec.conditions.len())
        .map(|c| (c, records.by_ref().take(runs).collect()))
        .collect();
    let conditions = grouped
        .into_par_iter()
        .map(|(c, runs)| {
            let boot_seed = split_seed(spec.master_seed, salt::BOOTSTRAP, c as u64);
            ConditionResult {
                label: spec.conditions[c].label.clone(),
                params: params[c].clone(),
                stats: condition_stats(&runs, spec.resamples, boot_seed),
                runs,
            }
        })
        .collect();
    Ok(ExperimentResult {
        master_seed: spec.master_seed,
        pairing: spec.pairing,
        resamples: spec.resamples,
        conditions,
    })
}

pub fn alpha_condition_label(k: usize, alpha: f64) -> String {
    format!("k{k}/const:{alpha}")
}

/// One condition per `(k, alpha)` pair, `k` outermost, at weight `w`.
pub fn sweep_alpha_spec(
    base: &DeliberationParams,
    alphas: &[f64],
    k_values: &[usize],
    w: f64,
    runs: usize,
    master_seed: u64,
) -> Result<ExperimentSpec> {
    if alphas.is_empty() || k_values.is_empty() {
        return Err(Error::param("alpha grid and k values must be nonempty"));
    }
    let conditions = k_values
        .iter()
        .flat_map(|&k| {
            alphas.iter().map(move |&a| {
                AlphaSchedule::constant(a).map(|s| {
                    Condition::new(alpha_condition_label(k, a))
                        .with_k(k)
                        .with_weight(w)
                        .with_schedule(s)
                })
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentSpec::new(
        base.clone(),
        conditions,
        runs,
        master_seed,
    ))
}

pub fn sweep_alpha(
    base: &DeliberationParams,
    alphas: &[f64],
    k_values: &[usize],
    w: f64,
    runs: usize,
    master_seed: u64,
) -> Result<ExperimentResult> {
    run_batch(&sweep_alpha_spec(
        base,
        alphas,
        k_values,
        w,
        runs,
        master_seed,
    )?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleComparison {
    pub result: ExperimentResult,
    pub comparison: Comparison,
}

pub fn compare_schedules_spec(
    base: &DeliberationParams,
    schedule_a: &AlphaSchedule,
    schedule_b: &AlphaSchedule,
    runs: usize,
    master_seed: u64,
) -> Result<ExperimentSpec> {
    if runs < 2 {
        return Err(Error::param("a paired comparison needs at least 2 runs"));
    }
    let conditions = vec![
        Condition::new(format!("a/{schedule_a}")).with_schedule(schedule_a.clone()),
        Condition::new(format!("b/{schedule_b}")).with_schedule(schedule_b.clone()),
    ];
    Ok(ExperimentSpec::new(
        base.clone(),
        conditions,
        runs,
        master_seed,
    ))
}

/// Paired runs of two schedules on shared seeds.
pub fn compare_schedules(
    base: &DeliberationParams,
    schedule_a: &AlphaSchedule,
    schedule_b: &AlphaSchedule,
    runs: usize,
    master_seed: u64,
) -> Result<ScheduleComparison> {
    run_comparison(&compare_schedules_spec(
        base,
        schedule_a,
        schedule_b,
        runs,
        master_seed,
    )?)
}

pub fn run_comparison(spec: &ExperimentSpec) -> Result<ScheduleComparison> {
    if spec.conditions.len() != 2 {
        return Err(Error::param(
            "a schedule comparison has exactly two conditions",
        ));
    }
    let result = run_batch(spec)?;
    let comparison = result.compare(0, 1)?;
    Ok(ScheduleComparison { result, comparison })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deliberation::run_deliberation;

    fn small_base() -> DeliberationParams {
        DeliberationParams {
            n: 8,
            k: 3,
            m: 4,
            t_max: 60,
            ..Default::default()
        }
    }

    #[test]
    fn single_run_condition_reports_that_run() {
        let spec = ExperimentSpec::new(small_base(), vec![Condition::new("only")], 1, 5);
        let result = run_batch(&spec).unwrap();
        let c = &result.conditions[0];
        let s = &c.runs[0].summary;
        assert_eq!(c.stats.mean, s.distinct_solutions as f64);
        assert_eq!(c.stats.sd, 0.0);
        assert_eq!(c.stats.mean_dm_value, s.dm_value);
        assert_eq!(c.stats.mean_dm_value_normalized, s.dm_value_normalized);
        assert_eq!(
            c.stats.mean_consensus_round,
            s.consensus_round.map(|r| r as f64)
        );
    }

    #[test]
    fn batch_matches_a_direct_run() {
        let spec = ExperimentSpec::new(small_base(), vec![Condition::new("x")], 3, 9);
        let result = run_batch(&spec).unwrap();
        for r in &result.conditions[0].runs {
            let mut p = small_base();
            p.seed = r.seed;
            let beliefs = BeliefStructure::<f64>::generate(
                8,
                3,
                4,
                0.0,
                p.neighbor_scheme,
                split_seed(r.seed, salt::BELIEFS, 0),
            )
            .unwrap();
            let trace = run_deliberation(&p, &beliefs).unwrap();
            assert_eq!(trace.discovered().len(), r.summary.distinct_solutions);
        }
    }

    #[test]
    fn identical_spec_gives_identical_result() {
        let spec = sweep_alpha_spec(&small_base(), &[0.0, 0.5, 1.0], &[1, 3], 0.0, 20, 77).unwrap();
        assert_eq!(run_batch(&spec).unwrap(), run_batch(&spec).unwrap());
    }

    #[test]
    fn thread_count_does_not_matter() {
        let spec = sweep_alpha_spec(&small_base(), &[0.2, 0.6], &[3], 0.5, 30, 1).unwrap();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| run_batch(&spec)).unwrap();
        let b = four.install(|| run_batch(&spec)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn condition_order_does_not_change_per_condition_results() {
        let spec = sweep_alpha_spec(&small_base(), &[0.2, 0.6], &[3], 0.0, 25, 4).unwrap();
        let mut reversed = spec.clone();
        reversed.conditions.reverse();
        let a = run_batch(&spec).unwrap();
        let b = run_batch(&reversed).unwrap();
        for c in &a.conditions {
            let other = b.condition(&c.label).unwrap();
            assert_eq!(c.runs, other.runs);
            assert_eq!(c.stats.mean, other.stats.mean);
        }
    }

    #[test]
    fn crn_pairs_round_one_peaks() {
        // With shared seeds, alpha = 0 and alpha = 1 see the same landscapes and
        // starts, so their first-round peak sets coincide.
        let spec = sweep_alpha_spec(&small_base(), &[0.0, 1.0], &[3], 0.0, 40, 8).unwrap();
        let result = run_batch(&spec).unwrap();
        let (a, b) = (&result.conditions[0], &result.conditions[1]);
        for (ra, rb) in a.runs.iter().zip(&b.runs) {
            assert_eq!(ra.seed, rb.seed);
            assert_eq!(ra.summary.distinct_solutions, rb.summary.distinct_solutions);
        }
        let mut indep = spec.clone();
        indep.pairing = Pairing::Independent;
        let r = run_batch(&indep).unwrap();
        assert_ne!(r.conditions[0].runs[0].seed, r.conditions[1].runs[0].seed);
    }

    #[test]
    fn degenerate_sweep_matches_plain_batch() {
        let base = small_base();
        let sweep = sweep_alpha(&base, &[0.3], &[5], 0.0, 15, 2).unwrap();
        let spec = ExperimentSpec::new(
            base,
            vec![Condition::new(alpha_condition_label(5, 0.3))
                .with_k(5)
                .with_weight(0.0)
                .with_schedule(AlphaSchedule::Constant(0.3))],
            15,
            2,
        );
        assert_eq!(sweep, run_batch(&spec).unwrap());
    }

    #[test]
    fn identical_schedules_have_zero_difference() {
        let s = AlphaSchedule::Constant(0.4);
        let cmp = compare_schedules(&small_base(), &s, &s, 30, 3).unwrap();
        assert_eq!(cmp.comparison.mean_difference, 0.0);
        assert_eq!(cmp.comparison.p_value, 1.0);

        let zero = AlphaSchedule::Constant(0.0);
        let cmp = compare_schedules(&small_base(), &zero, &zero, 30, 3).unwrap();
        assert_eq!(cmp.comparison.mean_difference, 0.0);
        for c in &cmp.result.conditions {
            assert!(c.runs.iter().all(|r| r.summary.distinct_solutions <= 4));
        }
    }

    #[test]
    fn invalid_specs() {
        let base = small_base();
        assert!(run_batch(&ExperimentSpec::new(base.clone(), vec![], 3, 0)).is_err());
        assert!(run_batch(&ExperimentSpec::new(
            base.clone(),
            vec![Condition::new("a")],
            0,
            0
        ))
        .is_err());
        assert!(run_batch(&ExperimentSpec::new(
            base.clone(),
            vec![Condition::new("a").with_k(8)],
            2,
            0
        ))
        .is_err());
        let s = AlphaSchedule::Constant(0.4);
        assert!(compare_schedules(&base, &s, &s, 1, 0).is_err());
        assert!(sweep_alpha(&base, &[], &[1], 0.0, 2, 0).is_err());
        assert!(sweep_alpha(&base, &[1.2], &[1], 0.0, 2, 0).is_err());
        let mut spec = ExperimentSpec::new(base, vec![Condition::new("a")], 2, 0);
        spec.dm = DmEvaluator::Agent(9);
        assert!(run_batch(&spec).is_err());
    }

    #[test]
    fn aggregate_sanity_and_csv_shape() {
        let spec = sweep_alpha_spec(&small_base(), &[0.0, 0.5], &[0, 3], 0.0, 20, 12).unwrap();
        let result = run_batch(&spec).unwrap();
        for c in &result.conditions {
            assert_eq!(c.stats.runs, 20);
            assert!(c.stats.mean >= 1.0 && c.stats.mean <= (4 * 60) as f64);
            assert!(c.stats.ci.contains(c.stats.mean));
            if c.params.k == 0 {
                assert_eq!(c.stats.mean, 1.0);
            }
        }
        let mut runs = Vec::new();
        result.write_runs_csv(&mut runs).unwrap();
        let runs = String::from_utf8(runs).unwrap();
        assert_eq!(runs.lines().count(), 1 + 4 * 20);
        assert!(runs.lines().all(|l| l.split(',').count() == 11));
        let mut agg = Vec::new();
        result.write_aggregate_csv(&mut agg).unwrap();
        let agg = String::from_utf8(agg).unwrap();
        assert_eq!(agg.lines().next().unwrap(), AGGREGATE_HEADER);
        assert_eq!(agg.lines().count(), 5);
    }
}
