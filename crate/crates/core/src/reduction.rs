//! The outlier to outlier-free reduction.
//!
//! 1. Compute `k + m` anchor centers with the baseline solver.
//! 2. Draw a pool `S` by D^z sampling (or take every client).
//! 3. For every subset `Y ⊆ S` with `|Y| <= m` and every valid tuple `τ`
//!    (`Σ τ_j + |Y| = m`), remove `Y` plus the points an exact b-matching
//!    assigns to the anchors with demands `τ`, then solve the remaining
//!    outlier-free instance with the plugin.
//! 4. Return the cheapest feasible result.
//!
//! Iterations are independent and may run on a worker pool; results are
//! merged in enumeration order so every parallelism width yields the same
//! output.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{anchors_for, default_beta, AnchorSet};
use crate::bmatching::{prune_left, solve_bmatching, BMatchingProblem};
use crate::instance::{self, ClusteringInstance, Solution, COST_TOLERANCE};
use crate::metric::PointRef;
use crate::sampling::{dz_sample, sample_size, SamplePool, SamplingError, SamplingMode};
use crate::solvers::{binomial, compositions, Clustering, OutlierFreeProblem, SolveError, SolverPlugin};

/// Iterations handed to the worker pool at a time. Fixed so that early
/// termination sees the same prefix regardless of parallelism.
const CHUNK: usize = 256;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("no (Y, tau) pair produced a feasible solution")]
    NoFeasible,
    #[error("solver {plugin} returned an invalid clustering: {detail}")]
    PluginViolation { plugin: String, detail: String },
    #[error(transparent)]
    Solver(#[from] SolveError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Per-anchor near-outlier counts, with per-label splits when labelled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidTuple {
    pub counts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_parts: Option<Vec<Vec<usize>>>,
}

impl ValidTuple {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionConfig {
    pub epsilon: f64,
    /// Approximation factor assumed for the baseline; defaults to 5 (z = 1)
    /// or 25 (z = 2).
    pub beta: Option<f64>,
    pub sampling: SamplingMode,
    /// Overrides the computed pool size in random mode.
    pub pool_size: Option<usize>,
    pub baseline_seed: u64,
    pub sample_seed: u64,
    pub solver_seed: u64,
    pub parallelism: usize,
    /// Stop as soon as a zero-cost solution is found.
    pub early_stop: bool,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self::from_seed(0)
    }
}

impl ReductionConfig {
    /// Default configuration with every seed derived from `seed`.
    pub fn from_seed(seed: u64) -> Self {
        Self {
            epsilon: 0.5,
            beta: None,
            sampling: SamplingMode::Random,
            pool_size: None,
            baseline_seed: derive_seed(seed, "baseline"),
            sample_seed: derive_seed(seed, "sampling"),
            solver_seed: derive_seed(seed, "solver"),
            parallelism: 1,
            early_stop: false,
        }
    }

    pub fn beta_for(&self, z: u32) -> f64 {
        self.beta.unwrap_or_else(|| default_beta(z))
    }

    /// `ε` for k-median, `ε² / (2m + 1)²` for k-means.
    pub fn effective_epsilon(&self, z: u32, m: usize) -> f64 {
        if z == 2 {
            let d = (2 * m + 1) as f64;
            self.epsilon * self.epsilon / (d * d)
        } else {
            self.epsilon
        }
    }

    pub fn pool_draws(&self, z: u32, m: usize) -> Result<usize, SamplingError> {
        match self.pool_size {
            Some(s) => Ok(if m == 0 { 0 } else { s }),
            None => sample_size(self.beta_for(z), m, self.effective_epsilon(z, m)),
        }
    }
}

/// Splits a master seed into a named substream (splitmix64 finalizer over
/// the seed and an FNV-1a hash of the name).
pub fn derive_seed(seed: u64, stream: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stream.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix(seed ^ h)
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub y: Vec<PointRef>,
    pub tau: ValidTuple,
    pub matching_weight: Option<f64>,
    pub solver_cost: Option<f64>,
    pub feasible: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub baseline: Duration,
    pub sampling: Duration,
    /// Summed over iterations.
    pub matching: Duration,
    /// Summed over iterations.
    pub solver: Duration,
}

#[derive(Debug, Clone)]
pub struct ReductionOutcome {
    pub solution: Solution,
    pub chosen_y: Vec<PointRef>,
    pub chosen_tau: ValidTuple,
    /// Number of `(Y, τ)` iterations executed.
    pub q: usize,
    pub records: Vec<IterationRecord>,
    pub anchors: AnchorSet,
    pub pool: SamplePool,
    pub timings: StageTimings,
}

/// Distinct subsets of the pool of size `0..=m`, by size then
/// lexicographically.
pub fn enumerate_outlier_subsets(pool: &SamplePool, m: usize) -> OutlierSubsets {
    OutlierSubsets::new(pool.distinct.clone(), m)
}

#[derive(Debug, Clone)]
pub struct OutlierSubsets {
    items: Vec<PointRef>,
    max: usize,
    idx: Vec<usize>,
    done: bool,
}

impl OutlierSubsets {
    fn new(items: Vec<PointRef>, m: usize) -> Self {
        let max = m.min(items.len());
        Self {
            items,
            max,
            idx: Vec::new(),
            done: false,
        }
    }
}

impl Iterator for OutlierSubsets {
    type Item = Vec<PointRef>;

    fn next(&mut self) -> Option<Vec<PointRef>> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().map(|&i| self.items[i]).collect();
        let n = self.items.len();
        let k = self.idx.len();
        match (0..k).rev().find(|&i| self.idx[i] < n - k + i) {
            Some(i) => {
                self.idx[i] += 1;
                for j in (i + 1)..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
            }
            None if k < self.max => self.idx = (0..=k).collect(),
            None => self.done = true,
        }
        Some(out)
    }
}

/// All `τ` with `slots` nonnegative entries summing to `residual`.
pub fn enumerate_valid_tuples(residual: usize, slots: usize) -> Vec<ValidTuple> {
    compositions(residual, slots)
        .into_iter()
        .map(|counts| ValidTuple {
            counts,
            label_parts: None,
        })
        .collect()
}

/// Labelled tuples: every `τ` together with every label partition of each
/// entry.
pub fn enumerate_labelled_tuples(residual: usize, slots: usize, num_labels: usize) -> Vec<ValidTuple> {
    let num_labels = num_labels.max(1);
    compositions(residual, slots * num_labels)
        .into_iter()
        .map(|cells| {
            let parts: Vec<Vec<usize>> = cells.chunks(num_labels).map(<[usize]>::to_vec).collect();
            ValidTuple {
                counts: parts.iter().map(|p| p.iter().sum()).collect(),
                label_parts: Some(parts),
            }
        })
        .collect()
}

/// Closed-form iteration count for a pool with `distinct` points.
pub fn iteration_count(distinct: usize, m: usize, slots: usize, num_labels: Option<usize>) -> u64 {
    let cells = slots * num_labels.unwrap_or(1).max(1);
    (0..=m.min(distinct))
        .map(|s| {
            let r = m - s;
            let tuples = if cells == 0 {
                u64::from(r == 0)
            } else {
                binomial((r + cells - 1) as u64, (cells - 1) as u64)
            };
            binomial(distinct as u64, s as u64).saturating_mul(tuples)
        })
        .fold(0u64, u64::saturating_add)
}

struct Candidate {
    outliers: Vec<PointRef>,
    clustering: Clustering,
}

struct IterationResult {
    record: IterationRecord,
    candidate: Option<Candidate>,
    matching: Duration,
    solver: Duration,
}

struct Shared<'a> {
    instance: &'a ClusteringInstance,
    anchors: &'a AnchorSet,
    plugin: &'a dyn SolverPlugin,
    solver_seed: u64,
}

fn run_iteration(
    shared: &Shared<'_>,
    index: usize,
    y: &[PointRef],
    tau: &ValidTuple,
) -> Result<IterationResult, ReductionError> {
    let start = Instant::now();
    let inst = shared.instance;
    let m = inst.m();
    let mut record = IterationRecord {
        y: y.to_vec(),
        tau: tau.clone(),
        matching_weight: None,
        solver_cost: None,
        feasible: false,
        wall_time: Duration::ZERO,
    };
    let finish = |mut record: IterationRecord, candidate, matching, solver| {
        record.wall_time = start.elapsed();
        Ok(IterationResult {
            record,
            candidate,
            matching,
            solver,
        })
    };

    let mut outliers: Vec<PointRef> = y.to_vec();
    if tau.total() > 0 {
        let left: Vec<PointRef> = inst.clients().iter().copied().filter(|p| !y.contains(p)).collect();
        let mut problem =
            BMatchingProblem::from_space(inst.space(), left, shared.anchors.centers.clone(), tau.counts.clone());
        if let Some(parts) = &tau.label_parts {
            let labels = problem.left.iter().map(|&p| inst.label_of(p).unwrap_or(0)).collect();
            problem = problem.with_labels(labels, parts.clone());
        }
        let pruned = prune_left(&problem, m);
        match solve_bmatching(&pruned) {
            Ok(matching) => {
                record.matching_weight = Some(matching.total_weight);
                outliers.extend(matching.matched_left);
            }
            Err(_) => return finish(record, None, start.elapsed(), Duration::ZERO),
        }
    } else {
        record.matching_weight = Some(0.0);
    }
    outliers.sort();
    let matching_time = start.elapsed();

    if !inst.constraint().admits_outliers(&inst.label_histogram(&outliers)) {
        return finish(record, None, matching_time, Duration::ZERO);
    }
    let rest: Vec<PointRef> = inst
        .clients()
        .iter()
        .copied()
        .filter(|p| outliers.binary_search(p).is_err())
        .collect();
    let solve_start = Instant::now();
    let problem = OutlierFreeProblem::new(inst, &rest);
    let result = shared
        .plugin
        .solve(&problem, derive_seed(shared.solver_seed ^ index as u64, "iteration"));
    let solver_time = solve_start.elapsed();
    match result {
        Ok(clustering) => {
            verify_plugin_output(shared, &rest, &clustering)?;
            record.solver_cost = Some(clustering.cost);
            record.feasible = true;
            let candidate = Candidate { outliers, clustering };
            finish(record, Some(candidate), matching_time, solver_time)
        }
        Err(SolveError::Infeasible) => finish(record, None, matching_time, solver_time),
        Err(e) => Err(e.into()),
    }
}

fn verify_plugin_output(shared: &Shared<'_>, points: &[PointRef], c: &Clustering) -> Result<(), ReductionError> {
    let inst = shared.instance;
    let fail = |detail: String| {
        Err(ReductionError::PluginViolation {
            plugin: shared.plugin.name().to_string(),
            detail,
        })
    };
    if c.clusters.len() != inst.k() || c.centers.len() != inst.k() {
        return fail(format!("{} clusters for k = {}", c.clusters.len(), inst.k()));
    }
    let mut all: Vec<PointRef> = c.clusters.iter().flatten().copied().collect();
    all.sort();
    let mut expected = points.to_vec();
    expected.sort();
    if all != expected {
        return fail("clusters do not partition the remaining points".into());
    }
    match instance::check(inst, &c.clusters, &c.centers) {
        Ok(true) => {}
        Ok(false) => return fail("constraint check failed".into()),
        Err(e) => return fail(e.to_string()),
    }
    let recomputed = instance::cost(inst, &c.clusters, &c.centers);
    if (recomputed - c.cost).abs() > COST_TOLERANCE * recomputed.max(1.0) {
        return fail(format!("reported cost {} but clusters cost {recomputed}", c.cost));
    }
    Ok(())
}

/// Runs the full reduction.
pub fn run_reduction(
    instance: &ClusteringInstance,
    config: &ReductionConfig,
    plugin: &dyn SolverPlugin,
) -> Result<ReductionOutcome, ReductionError> {
    if !(config.epsilon > 0.0 && config.epsilon <= 1.0) {
        return Err(SamplingError::BadEpsilon(config.epsilon).into());
    }
    let z = instance.space().power().exponent();
    let m = instance.m();
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let anchors = anchors_for(instance, config.baseline_seed);
    timings.baseline = t.elapsed();

    let t = Instant::now();
    let pool = match config.sampling {
        SamplingMode::Exhaustive => SamplePool::exhaustive(instance),
        SamplingMode::Random => {
            let draws = config.pool_draws(z, m)?;
            if draws == 0 {
                SamplePool {
                    draws: Vec::new(),
                    distinct: Vec::new(),
                    mode: SamplingMode::Random,
                }
            } else {
                dz_sample(instance, &anchors, draws, config.sample_seed)?
            }
        }
    };
    timings.sampling = t.elapsed();
    log::debug!(
        "anchors: {} (cost {}), pool: {} draws / {} distinct",
        anchors.centers.len(),
        anchors.anchor_cost,
        pool.draws.len(),
        pool.distinct.len()
    );

    let slots = anchors.centers.len();
    let tuples_by_residual: Vec<Vec<ValidTuple>> = (0..=m)
        .map(|r| {
            if instance.is_labelled() {
                enumerate_labelled_tuples(r, slots, instance.num_labels())
            } else {
                enumerate_valid_tuples(r, slots)
            }
        })
        .collect();
    let mut work = enumerate_outlier_subsets(&pool, m)
        .flat_map(|y| {
            let tuples = &tuples_by_residual[m - y.len()];
            tuples.iter().map(move |tau| (y.clone(), tau))
        })
        .enumerate();

    let shared = Shared {
        instance,
        anchors: &anchors,
        plugin,
        solver_seed: config.solver_seed,
    };
    let workers = if config.parallelism > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.parallelism)
                .build()
                .map_err(|e| ReductionError::Config(e.to_string()))?,
        )
    } else {
        None
    };

    let mut records = Vec::new();
    let mut best: Option<(Candidate, Vec<PointRef>, ValidTuple)> = None;
    loop {
        let chunk: Vec<(usize, (Vec<PointRef>, &ValidTuple))> = work.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        let run = |(i, (y, tau)): &(usize, (Vec<PointRef>, &ValidTuple))| run_iteration(&shared, *i, y, tau);
        let results: Vec<Result<IterationResult, ReductionError>> = match &workers {
            Some(pool) => pool.install(|| chunk.par_iter().map(run).collect()),
            None => chunk.iter().map(run).collect(),
        };
        for result in results {
            let r = result?;
            timings.matching += r.matching;
            timings.solver += r.solver;
            if let Some(c) = r.candidate {
                let better = best
                    .as_ref()
                    .is_none_or(|(b, _, _)| c.clustering.cost < b.clustering.cost - COST_TOLERANCE);
                if better {
                    best = Some((c, r.record.y.clone(), r.record.tau.clone()));
                }
            }
            records.push(r.record);
        }
        if config.early_stop && best.as_ref().is_some_and(|(b, _, _)| b.clustering.cost <= 0.0) {
            break;
        }
    }

    let (candidate, chosen_y, chosen_tau) = best.ok_or(ReductionError::NoFeasible)?;
    let solution = Solution {
        outliers: candidate.outliers,
        clusters: candidate.clustering.clusters,
        centers: candidate.clustering.centers,
        cost: candidate.clustering.cost,
    };
    Ok(ReductionOutcome {
        solution,
        chosen_y,
        chosen_tau,
        q: records.len(),
        records,
        anchors,
        pool,
        timings,
    })
}

/// Repeats the reduction with independent sampling seeds and keeps the
/// cheapest outcome (earliest trial on ties).
pub fn run_trials(
    instance: &ClusteringInstance,
    config: &ReductionConfig,
    plugin: &dyn SolverPlugin,
    trials: usize,
) -> Result<ReductionOutcome, ReductionError> {
    let mut best: Option<ReductionOutcome> = None;
    let mut last_err = None;
    for t in 0..trials.max(1) {
        let mut cfg = config.clone();
        if t > 0 {
            cfg.sample_seed = derive_seed(config.sample_seed ^ t as u64, "trial");
        }
        match run_reduction(instance, &cfg, plugin) {
            Ok(out) => {
                if best
                    .as_ref()
                    .is_none_or(|b| out.solution.cost < b.solution.cost - COST_TOLERANCE)
                {
                    best = Some(out);
                }
            }
            Err(ReductionError::NoFeasible) => last_err = Some(ReductionError::NoFeasible),
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(ReductionError::NoFeasible))
}
