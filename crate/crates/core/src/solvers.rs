//! Outlier-free constrained solvers, the pluggable `A` of the reduction.
//!
//! Both shipped solvers sit on [`assign_given_centers`], which computes the
//! optimal feasible partition for a fixed center tuple as a min-cost flow.
//! This is exact for every constraint whose feasibility depends only on
//! cluster sizes, per-label counts and center identities.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::dz_seed;
use crate::flow::FlowNetwork;
use crate::instance::{self, ClusteringInstance, ConstraintSpec, InstanceError, COST_TOLERANCE};
use crate::metric::PointRef;

/// Default cap on center tuples examined by [`solve_exact`].
pub const DEFAULT_EXACT_BUDGET: u64 = 2_000_000;

/// Cap on cluster-size vectors enumerated for fractional label bounds.
pub const FRACTIONAL_SIZE_BUDGET: u64 = 50_000;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("no feasible clustering exists")]
    Infeasible,
    #[error("work bound exceeded: {needed} candidates, budget {budget}")]
    WorkBound { needed: u64, budget: u64 },
    #[error("expected {expected} centers, got {found}")]
    CenterCount { expected: usize, found: usize },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// The outlier-free instance handed to a solver: the surviving points,
/// with facilities, k, constraint and metric taken from the parent.
#[derive(Debug, Clone, Copy)]
pub struct OutlierFreeProblem<'a> {
    pub instance: &'a ClusteringInstance,
    pub points: &'a [PointRef],
}

impl<'a> OutlierFreeProblem<'a> {
    pub fn new(instance: &'a ClusteringInstance, points: &'a [PointRef]) -> Self {
        Self { instance, points }
    }

    /// The whole client set of an instance.
    pub fn full(instance: &'a ClusteringInstance) -> Self {
        Self {
            instance,
            points: instance.clients(),
        }
    }
}

/// Clusters, centers and cost of an outlier-free clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<Vec<PointRef>>,
    pub centers: Vec<PointRef>,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    Heuristic,
}

/// An outlier-free constrained clustering algorithm.
///
/// Implementations must be pure functions of `(problem, seed)` and must
/// return clusterings that partition `problem.points` and pass `check`.
pub trait SolverPlugin: Send + Sync {
    fn name(&self) -> &str;
    fn exactness(&self) -> Exactness;
    fn solve(&self, problem: &OutlierFreeProblem<'_>, seed: u64) -> Result<Clustering, SolveError>;
}

/// Exhaustive search over center tuples.
#[derive(Debug, Clone, Copy)]
pub struct ExactSolver {
    pub budget: u64,
}

impl Default for ExactSolver {
    fn default() -> Self {
        Self {
            budget: DEFAULT_EXACT_BUDGET,
        }
    }
}

impl SolverPlugin for ExactSolver {
    fn name(&self) -> &str {
        "exact"
    }

    fn exactness(&self) -> Exactness {
        Exactness::Exact
    }

    fn solve(&self, problem: &OutlierFreeProblem<'_>, _seed: u64) -> Result<Clustering, SolveError> {
        solve_exact(problem, self.budget)
    }
}

/// Single-swap local search over centers.
#[derive(Debug, Clone, Copy, Default)]
pub struct LocalSearchSolver;

impl SolverPlugin for LocalSearchSolver {
    fn name(&self) -> &str {
        "local-search"
    }

    fn exactness(&self) -> Exactness {
        Exactness::Heuristic
    }

    fn solve(&self, problem: &OutlierFreeProblem<'_>, seed: u64) -> Result<Clustering, SolveError> {
        solve_local_search(problem, seed)
    }
}

/// Optimal feasible assignment of `problem.points` to the given centers.
///
/// Cluster `i` is served by `centers[i]`. Points inside a cluster are
/// sorted by ground index.
pub fn assign_given_centers(problem: &OutlierFreeProblem<'_>, centers: &[PointRef]) -> Result<Clustering, SolveError> {
    let inst = problem.instance;
    let k = inst.k();
    if centers.len() != k {
        return Err(SolveError::CenterCount {
            expected: k,
            found: centers.len(),
        });
    }
    let positions = centers
        .iter()
        .map(|&c| inst.facility_position(c).ok_or(InstanceError::NotAFacility(c)))
        .collect::<Result<Vec<_>, _>>()?;

    let clusters = match inst.constraint() {
        ConstraintSpec::Unconstrained | ConstraintSpec::OutlierLabelQuota { .. } => {
            nearest_assignment(problem, centers)
        }
        ConstraintSpec::SizeBounds { lower, upper } => {
            let bounds: Vec<(usize, usize)> = lower.iter().copied().zip(upper.iter().copied()).collect();
            flow_assignment(problem, centers, &bounds, None).ok_or(SolveError::Infeasible)?
        }
        ConstraintSpec::Capacitated { capacities } => {
            let bounds: Vec<(usize, usize)> = positions.iter().map(|&f| (0, capacities[f])).collect();
            flow_assignment(problem, centers, &bounds, None).ok_or(SolveError::Infeasible)?
        }
        ConstraintSpec::LabelCounts { min, max } => {
            let n = problem.points.len();
            let bounds = vec![(0, n); k];
            let label_bounds: Vec<Vec<(usize, usize)>> = min
                .iter()
                .zip(max)
                .map(|(lo, hi)| lo.iter().copied().zip(hi.iter().copied()).collect())
                .collect();
            flow_assignment(problem, centers, &bounds, Some(&label_bounds)).ok_or(SolveError::Infeasible)?
        }
        ConstraintSpec::LabelFractions { alpha, beta } => fractional_assignment(problem, centers, alpha, beta)?,
    };
    let cost = instance::cost(inst, &clusters, centers);
    Ok(Clustering {
        clusters,
        centers: centers.to_vec(),
        cost,
    })
}

fn nearest_assignment(problem: &OutlierFreeProblem<'_>, centers: &[PointRef]) -> Vec<Vec<PointRef>> {
    let space = problem.instance.space();
    let mut clusters = vec![Vec::new(); centers.len()];
    for &x in problem.points {
        let mut best = 0;
        for i in 1..centers.len() {
            if space.dz(x, centers[i]) < space.dz(x, centers[best]) {
                best = i;
            }
        }
        clusters[best].push(x);
    }
    for c in &mut clusters {
        c.sort();
    }
    clusters
}

/// Flow network: point -> (cluster, label) group -> cluster -> sink, with
/// `[lo, hi]` windows on group and cluster arcs.
fn flow_assignment(
    problem: &OutlierFreeProblem<'_>,
    centers: &[PointRef],
    cluster_bounds: &[(usize, usize)],
    label_bounds: Option<&[Vec<(usize, usize)>]>,
) -> Option<Vec<Vec<PointRef>>> {
    let inst = problem.instance;
    let space = inst.space();
    let n = problem.points.len();
    let k = centers.len();
    // quick counting checks before building anything
    let lo_sum: usize = cluster_bounds.iter().map(|b| b.0).sum();
    let hi_sum: usize = cluster_bounds.iter().map(|b| b.1.min(n)).sum();
    if lo_sum > n || hi_sum < n {
        return None;
    }

    let mut g = FlowNetwork::new(n);
    let sink = g.add_node();
    g.add_supply(sink, -(n as i64));
    let cluster_nodes: Vec<usize> = (0..k).map(|_| g.add_node()).collect();
    for (i, &node) in cluster_nodes.iter().enumerate() {
        let (lo, hi) = cluster_bounds[i];
        g.add_arc(node, sink, lo as i64, hi.min(n) as i64, 0.0);
    }
    let entry: Vec<Vec<usize>> = match label_bounds {
        Some(lb) => {
            let num_labels = inst.num_labels();
            (0..k)
                .map(|i| {
                    (0..num_labels)
                        .map(|l| {
                            let node = g.add_node();
                            let (lo, hi) = lb[i][l];
                            g.add_arc(node, cluster_nodes[i], lo as i64, hi.min(n) as i64, 0.0);
                            node
                        })
                        .collect()
                })
                .collect()
        }
        None => cluster_nodes.iter().map(|&c| vec![c]).collect(),
    };
    let mut arcs = Vec::with_capacity(n * k);
    for (u, &x) in problem.points.iter().enumerate() {
        g.add_supply(u, 1);
        let group = match label_bounds {
            Some(_) => inst.label_of(x).unwrap_or(0),
            None => 0,
        };
        for i in 0..k {
            arcs.push(g.add_arc(u, entry[i][group], 0, 1, space.dz(x, centers[i])));
        }
    }
    g.solve()?;
    let mut clusters = vec![Vec::new(); k];
    for (u, &x) in problem.points.iter().enumerate() {
        let i = (0..k).find(|&i| g.flow(arcs[u * k + i]) > 0)?;
        clusters[i].push(x);
    }
    for c in &mut clusters {
        c.sort();
    }
    Some(clusters)
}

/// Number of ways to write `n` as an ordered sum of `k` nonnegative parts.
fn compositions_count(n: usize, k: usize) -> u64 {
    binomial((n + k - 1) as u64, (k - 1) as u64)
}

pub(crate) fn binomial(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Fractional bounds depend on the cluster size, so every size vector is
/// tried with exact windows.
fn fractional_assignment(
    problem: &OutlierFreeProblem<'_>,
    centers: &[PointRef],
    alpha: &[instance::Fraction],
    beta: &[instance::Fraction],
) -> Result<Vec<Vec<PointRef>>, SolveError> {
    let n = problem.points.len();
    let k = centers.len();
    let needed = compositions_count(n, k);
    if needed > FRACTIONAL_SIZE_BUDGET {
        return Err(SolveError::WorkBound {
            needed,
            budget: FRACTIONAL_SIZE_BUDGET,
        });
    }
    let num_labels = alpha.len();
    let mut best: Option<(f64, Vec<Vec<PointRef>>)> = None;
    for sizes in compositions(n, k) {
        let mut label_bounds = Vec::with_capacity(k);
        let mut ok = true;
        for &s in &sizes {
            let row: Vec<(usize, usize)> = (0..num_labels)
                .map(|l| (alpha[l].ceil_times(s), beta[l].floor_times(s)))
                .collect();
            ok &= row.iter().all(|&(lo, hi)| lo <= hi);
            label_bounds.push(row);
        }
        if !ok {
            continue;
        }
        let bounds: Vec<(usize, usize)> = sizes.iter().map(|&s| (s, s)).collect();
        if let Some(clusters) = flow_assignment(problem, centers, &bounds, Some(&label_bounds)) {
            let c = instance::cost(problem.instance, &clusters, centers);
            if best.as_ref().is_none_or(|(b, _)| c < *b - COST_TOLERANCE) {
                best = Some((c, clusters));
            }
        }
    }
    best.map(|(_, c)| c).ok_or(SolveError::Infeasible)
}

/// All compositions of `n` into `k` nonnegative parts, lexicographically
/// descending.
pub(crate) fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(rest);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in (0..=rest).rev() {
            cur.push(first);
            rec(rest - first, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Number of center tuples [`solve_exact`] would examine.
pub fn exact_work(instance: &ClusteringInstance) -> u64 {
    let f = instance.facilities().len() as u64;
    let k = instance.k() as u64;
    let subsets = binomial(f, k);
    if instance.constraint().is_cluster_symmetric() {
        subsets
    } else {
        (1..=k).fold(subsets, |acc, i| acc.saturating_mul(i))
    }
}

/// Exact optimum of the outlier-free problem: best assignment over every
/// k-subset of facilities (every ordered k-tuple when the constraint tells
/// clusters apart).
pub fn solve_exact(problem: &OutlierFreeProblem<'_>, budget: u64) -> Result<Clustering, SolveError> {
    let inst = problem.instance;
    let needed = exact_work(inst);
    if needed > budget {
        return Err(SolveError::WorkBound { needed, budget });
    }
    let facilities = inst.facilities();
    let k = inst.k();
    let ordered = !inst.constraint().is_cluster_symmetric();
    let mut best: Option<Clustering> = None;
    let mut tuple = Vec::with_capacity(k);
    let mut consider = |centers: &[PointRef]| -> Result<(), SolveError> {
        match assign_given_centers(problem, centers) {
            Ok(c) => {
                if best.as_ref().is_none_or(|b| c.cost < b.cost - COST_TOLERANCE) {
                    best = Some(c);
                }
                Ok(())
            }
            Err(SolveError::Infeasible) => Ok(()),
            Err(e) => Err(e),
        }
    };
    for_each_subset(facilities.len(), k, &mut |idx| {
        tuple.clear();
        tuple.extend(idx.iter().map(|&i| facilities[i]));
        if ordered {
            for_each_permutation(&mut tuple.clone(), &mut |perm| consider(perm))
        } else {
            consider(&tuple)
        }
    })?;
    best.ok_or(SolveError::Infeasible)
}

fn for_each_subset<E>(n: usize, k: usize, f: &mut impl FnMut(&[usize]) -> Result<(), E>) -> Result<(), E> {
    if k > n {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx)?;
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return Ok(());
        };
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Visits every permutation of `items` in lexicographic order of positions.
fn for_each_permutation<T: Copy, E>(items: &mut [T], f: &mut impl FnMut(&[T]) -> Result<(), E>) -> Result<(), E> {
    fn rec<T: Copy, E>(
        items: &[T],
        used: &mut [bool],
        cur: &mut Vec<T>,
        f: &mut impl FnMut(&[T]) -> Result<(), E>,
    ) -> Result<(), E> {
        if cur.len() == items.len() {
            return f(cur);
        }
        for i in 0..items.len() {
            if !used[i] {
                used[i] = true;
                cur.push(items[i]);
                rec(items, used, cur, f)?;
                cur.pop();
                used[i] = false;
            }
        }
        Ok(())
    }
    let mut used = vec![false; items.len()];
    rec(items, &mut used, &mut Vec::with_capacity(items.len()), f)
}

/// Local search over centers: D^z seeding, then best-improvement single
/// swaps (plus position exchanges for cluster-indexed constraints) until no
/// move improves by more than the cost tolerance or `200 k` moves were made.
pub fn solve_local_search(problem: &OutlierFreeProblem<'_>, seed: u64) -> Result<Clustering, SolveError> {
    let inst = problem.instance;
    let k = inst.k();
    let facilities = inst.facilities();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seed_points = if problem.points.is_empty() {
        inst.clients()
    } else {
        problem.points
    };
    let mut centers = dz_seed(inst.space(), seed_points, facilities, k, &mut rng);

    let evaluate = |centers: &[PointRef]| -> Result<Option<Clustering>, SolveError> {
        match assign_given_centers(problem, centers) {
            Ok(c) => Ok(Some(c)),
            Err(SolveError::Infeasible) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let key = |c: &Option<Clustering>| c.as_ref().map_or(f64::INFINITY, |c| c.cost);

    let mut current = evaluate(&centers)?;
    let ordered = !inst.constraint().is_cluster_symmetric();
    for _ in 0..200 * k {
        let mut best: Option<(Vec<PointRef>, Option<Clustering>)> = None;
        let mut best_key = key(&current);
        let mut consider = |trial: Vec<PointRef>| -> Result<(), SolveError> {
            let eval = evaluate(&trial)?;
            let v = key(&eval);
            let improves = if best_key.is_finite() {
                v < best_key - COST_TOLERANCE
            } else {
                v.is_finite()
            };
            if improves {
                best_key = v;
                best = Some((trial, eval));
            }
            Ok(())
        };
        for i in 0..k {
            for &f in facilities {
                if centers.contains(&f) {
                    continue;
                }
                let mut trial = centers.clone();
                trial[i] = f;
                consider(trial)?;
            }
        }
        if ordered {
            for i in 0..k {
                for j in (i + 1)..k {
                    let mut trial = centers.clone();
                    trial.swap(i, j);
                    consider(trial)?;
                }
            }
        }
        match best {
            Some((c, eval)) => {
                centers = c;
                current = eval;
            }
            None => break,
        }
    }
    current.ok_or(SolveError::Infeasible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{MetricSpace, Power};

    fn line(xs: &[f64], k: usize, power: Power, constraint: ConstraintSpec) -> ClusteringInstance {
        let space = MetricSpace::euclidean(1, xs.iter().map(|&x| vec![x]).collect(), power).unwrap();
        let pts: Vec<_> = (0..xs.len()).map(PointRef).collect();
        ClusteringInstance::new(space, pts.clone(), pts, k, 0, None, constraint).unwrap()
    }

    fn refs(ix: &[usize]) -> Vec<PointRef> {
        ix.iter().map(|&i| PointRef(i)).collect()
    }

    #[test]
    fn unconstrained_goes_to_nearest() {
        let inst = line(&[0.0, 1.0, 10.0, 6.0], 2, Power::Median, ConstraintSpec::Unconstrained);
        let p = OutlierFreeProblem::full(&inst);
        let c = assign_given_centers(&p, &refs(&[0, 2])).unwrap();
        assert_eq!(c.clusters, vec![refs(&[0, 1]), refs(&[2, 3])]);
        assert_eq!(c.cost, 5.0);
    }

    #[test]
    fn capacitated_assignment_example() {
        // X' = {0, 1, 2}, centers {0, 2}, s = (1, 2)
        let inst = line(
            &[0.0, 1.0, 2.0],
            2,
            Power::Median,
            ConstraintSpec::Capacitated {
                capacities: vec![1, 0, 2],
            },
        );
        let p = OutlierFreeProblem::full(&inst);
        let c = assign_given_centers(&p, &refs(&[0, 2])).unwrap();
        assert_eq!(c.clusters, vec![refs(&[0]), refs(&[1, 2])]);
        assert_eq!(c.cost, 1.0);
        assert_eq!(solve_exact(&p, 1000).unwrap().cost, 1.0);
    }

    #[test]
    fn size_bounds_assignment_example() {
        let inst = line(
            &[0.0, 1.0, 10.0],
            2,
            Power::Median,
            ConstraintSpec::SizeBounds {
                lower: vec![2, 1],
                upper: vec![3, 3],
            },
        );
        let p = OutlierFreeProblem::full(&inst);
        let c = assign_given_centers(&p, &refs(&[0, 2])).unwrap();
        assert_eq!(c.clusters, vec![refs(&[0, 1]), refs(&[2])]);
        assert_eq!(c.cost, 1.0);
        // the other orientation must give cluster 0 two points
        let c = assign_given_centers(&p, &refs(&[2, 0])).unwrap();
        assert_eq!(c.cost, 9.0 + 0.0);
    }

    #[test]
    fn infeasible_capacity() {
        let inst = line(
            &[0.0, 1.0, 2.0],
            2,
            Power::Median,
            ConstraintSpec::Capacitated {
                capacities: vec![1, 1, 0],
            },
        );
        let p = OutlierFreeProblem::full(&inst);
        assert_eq!(assign_given_centers(&p, &refs(&[0, 1])), Err(SolveError::Infeasible));
        assert_eq!(solve_exact(&p, 1000), Err(SolveError::Infeasible));
    }

    #[test]
    fn exact_small_cases() {
        let inst = line(&[3.0, 5.0], 1, Power::Median, ConstraintSpec::Unconstrained);
        let c = solve_exact(&OutlierFreeProblem::full(&inst), 10).unwrap();
        assert_eq!(c.clusters, vec![refs(&[0, 1])]);
        assert_eq!(c.cost, 2.0);

        let inst = line(&[0.0, 1.0, 10.0, 11.0], 2, Power::Median, ConstraintSpec::Unconstrained);
        assert_eq!(solve_exact(&OutlierFreeProblem::full(&inst), 10).unwrap().cost, 2.0);
        assert!(matches!(
            solve_exact(&OutlierFreeProblem::full(&inst), 3),
            Err(SolveError::WorkBound { needed: 6, budget: 3 })
        ));
    }

    #[test]
    fn label_count_assignment() {
        let space =
            MetricSpace::euclidean(1, vec![vec![0.0], vec![1.0], vec![9.0], vec![10.0]], Power::Median).unwrap();
        let pts = refs(&[0, 1, 2, 3]);
        let inst = ClusteringInstance::new(
            space,
            pts.clone(),
            pts,
            2,
            0,
            Some(vec![0, 0, 1, 1]),
            ConstraintSpec::LabelCounts {
                min: vec![vec![1, 1], vec![1, 1]],
                max: vec![vec![1, 1], vec![1, 1]],
            },
        )
        .unwrap();
        let p = OutlierFreeProblem::full(&inst);
        let c = assign_given_centers(&p, &refs(&[0, 3])).unwrap();
        assert!(instance::check(&inst, &c.clusters, &c.centers).unwrap());
        // each cluster pairs one of {0, 1} with one of {9, 10}
        assert_eq!(c.cost, 18.0);
        assert_eq!(solve_exact(&p, 100).unwrap().cost, 18.0);
    }

    #[test]
    fn fractional_assignment_is_feasible_and_exact() {
        let space = MetricSpace::euclidean(
            1,
            vec![vec![0.0], vec![1.0], vec![2.0], vec![9.0], vec![10.0], vec![11.0]],
            Power::Median,
        )
        .unwrap();
        let pts = refs(&[0, 1, 2, 3, 4, 5]);
        let inst = ClusteringInstance::new(
            space,
            pts.clone(),
            pts,
            2,
            0,
            Some(vec![0, 0, 1, 1, 1, 0]),
            ConstraintSpec::LabelFractions {
                alpha: vec![instance::Fraction::new(1, 3); 2],
                beta: vec![instance::Fraction::new(2, 3); 2],
            },
        )
        .unwrap();
        let p = OutlierFreeProblem::full(&inst);
        let c = solve_exact(&p, 100).unwrap();
        assert!(instance::check(&inst, &c.clusters, &c.centers).unwrap());
        // {0,1,2} at 1 and {9,10,11} at 10 are already balanced
        assert_eq!(c.cost, 4.0);
    }

    #[test]
    fn local_search_never_beats_exact_and_is_deterministic() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for trial in 0..30 {
            let n = rng.random_range(4..9);
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(0..50) as f64).collect();
            let constraint = if trial % 2 == 0 {
                ConstraintSpec::Unconstrained
            } else {
                ConstraintSpec::SizeBounds {
                    lower: vec![1, 2],
                    upper: vec![n, n],
                }
            };
            let inst = line(&xs, 2, Power::Means, constraint);
            let p = OutlierFreeProblem::full(&inst);
            let exact = solve_exact(&p, 10_000).unwrap();
            let ls = solve_local_search(&p, trial).unwrap();
            assert!(ls.cost >= exact.cost - 1e-9);
            assert_eq!(ls, solve_local_search(&p, trial).unwrap());
            assert!(instance::check(&inst, &ls.clusters, &ls.centers).unwrap());
            // the exact optimum is a fixed point of swaps
            let again = assign_given_centers(&p, &exact.centers).unwrap();
            assert!((again.cost - exact.cost).abs() < 1e-9);
        }
    }

    #[test]
    fn enumeration_helpers() {
        assert_eq!(compositions(2, 3).len(), 6);
        assert_eq!(compositions(0, 3), vec![vec![0, 0, 0]]);
        assert_eq!(binomial(12, 3), 220);
        let mut seen = Vec::new();
        for_each_subset::<()>(4, 2, &mut |s| {
            seen.push(s.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(
            seen,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        let mut perms = 0;
        for_each_permutation::<_, ()>(&mut [1, 2, 3], &mut |_| {
            perms += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(perms, 6);
    }
}
