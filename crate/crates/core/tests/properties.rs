mod common;

use common::*;
use outlier_reduce::baseline::{anchor_cost_of, anchors_for, default_beta};
use outlier_reduce::gen::{generate, FacilityMode, GenConstraint, GenMetric, GeneratorConfig};
use outlier_reduce::instance::{validate_solution, ClusteringInstance, ConstraintSpec};
use outlier_reduce::oracle::{exact_outlier_opt, OracleBudget, OracleError};
use outlier_reduce::reduction::{iteration_count, run_reduction, ReductionConfig, ReductionError};
use outlier_reduce::sampling::SamplingMode;
use outlier_reduce::solvers::{
    solve_exact, solve_local_search, ExactSolver, LocalSearchSolver, OutlierFreeProblem, SolveError, SolverPlugin,
    DEFAULT_EXACT_BUDGET,
};
use outlier_reduce::PointRef;
use proptest::prelude::*;

fn constraint_strategy() -> impl Strategy<Value = GenConstraint> {
    prop_oneof![
        Just(GenConstraint::Unconstrained),
        Just(GenConstraint::Capacitated),
        Just(GenConstraint::SizeBounds),
        Just(GenConstraint::LabelCounts),
        Just(GenConstraint::LabelFractions),
        Just(GenConstraint::OutlierLabelQuota),
    ]
}

fn metric_strategy() -> impl Strategy<Value = GenMetric> {
    prop_oneof![
        (1usize..=3).prop_map(|dim| GenMetric::Euclidean { dim }),
        Just(GenMetric::Matrix),
        (3usize..=6).prop_map(|perm_len| GenMetric::Ulam { perm_len }),
    ]
}

prop_compose! {
    fn small_config(max_n: usize)(
        k in 1usize..=2,
        m in 0usize..=2,
        extra in 0usize..=4,
        metric in metric_strategy(),
        z in 1u32..=2,
        constraint in constraint_strategy(),
        num_labels in 1usize..=3,
        planted in any::<bool>(),
        seed in any::<u64>(),
    ) -> GeneratorConfig {
        let n = (k + m + 2 + extra).min(max_n);
        GeneratorConfig { n, k, m, metric, z, constraint, num_labels, planted, facilities: FacilityMode::Clients, seed }
    }
}

fn oracle(inst: &ClusteringInstance) -> Option<f64> {
    match exact_outlier_opt(inst, &OracleBudget::default()) {
        Ok(s) => Some(s.cost),
        Err(OracleError::Infeasible) => None,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reduction_output_always_validates(
        cfg in small_config(9),
        exhaustive in any::<bool>(),
        local in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let inst = build(&cfg);
        let config = ReductionConfig {
            sampling: if exhaustive { SamplingMode::Exhaustive } else { SamplingMode::Random },
            ..ReductionConfig::from_seed(seed)
        };
        let plugin: &dyn SolverPlugin = if local { &LocalSearchSolver } else { &ExactSolver::default() };
        match run_reduction(&inst, &config, plugin) {
            Ok(out) => {
                let report = validate_solution(&inst, &out.solution);
                prop_assert!(report.feasible, "{:?}", report.violations);
                prop_assert_eq!(out.solution.outliers.len(), inst.m());
                let labels = inst.is_labelled().then(|| inst.num_labels());
                let slots = out.anchors.centers.len();
                let expected = iteration_count(out.pool.distinct.len(), inst.m(), slots, labels);
                prop_assert_eq!(out.q as u64, expected);
                if labels.is_none() {
                    let m = inst.m() as u64;
                    let k = inst.k() as u64;
                    let per_y = binom(2 * m + k - 1, m);
                    prop_assert!(out.q as u64 <= (1u64 << out.pool.distinct.len()) * per_y);
                }
            }
            Err(ReductionError::NoFeasible) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn exhaustive_reduction_matches_oracle(
        cfg in small_config(8).prop_filter("kinds where removing extra points never hurts", |c| matches!(
            c.constraint,
            GenConstraint::Unconstrained | GenConstraint::Capacitated | GenConstraint::SizeBounds
        )),
        seed in any::<u64>(),
    ) {
        let inst = build(&cfg);
        let config = ReductionConfig { sampling: SamplingMode::Exhaustive, ..ReductionConfig::from_seed(seed) };
        let got = match run_reduction(&inst, &config, &ExactSolver::default()) {
            Ok(out) => Some(out.solution.cost),
            Err(ReductionError::NoFeasible) => None,
            Err(e) => panic!("{e}"),
        };
        match (got, oracle(&inst)) {
            (Some(a), Some(b)) => prop_assert!(close(a, b), "{} vs {}", a, b),
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn oracle_without_outliers_is_the_exact_solver(cfg in small_config(8)) {
        let inst = build(&cfg).with_budget(0).unwrap();
        let exact = match solve_exact(&OutlierFreeProblem::full(&inst), DEFAULT_EXACT_BUDGET) {
            Ok(c) => Some(c.cost),
            Err(SolveError::Infeasible) => None,
            Err(e) => panic!("{e}"),
        };
        prop_assert_eq!(oracle(&inst), exact);
    }

    #[test]
    fn anchors_relate_to_the_outlier_optimum(
        cfg in small_config(9).prop_filter("unconstrained", |c| c.constraint == GenConstraint::Unconstrained),
        seed in any::<u64>(),
    ) {
        let inst = build(&cfg);
        let Some(opt) = oracle(&inst) else { return Ok(()) };
        let anchors = anchors_for(&inst, seed);
        let z = inst.space().power().exponent();
        prop_assert!(leq(anchors.anchor_cost, default_beta(z) * opt));
        // the best (k + m)-clustering of all points is at most opt: serve
        // each outlier by a center of its own
        let best = best_subset_cost(&inst, anchors.centers.len());
        prop_assert!(leq(best, opt), "{} > {}", best, opt);
    }

    #[test]
    fn local_search_never_beats_exact(cfg in small_config(9), seed in any::<u64>()) {
        let inst = build(&cfg).with_budget(0).unwrap();
        let problem = OutlierFreeProblem::full(&inst);
        match (solve_local_search(&problem, seed), solve_exact(&problem, DEFAULT_EXACT_BUDGET)) {
            (Ok(ls), Ok(ex)) => prop_assert!(leq(ex.cost, ls.cost)),
            (Err(SolveError::Infeasible), Err(SolveError::Infeasible)) => {}
            // local search may miss a feasible tuple, never the converse
            (Err(SolveError::Infeasible), Ok(_)) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a.map(|c| c.cost), b.map(|c| c.cost)),
        }
    }

    #[test]
    fn exact_cost_ignores_cluster_order(
        xs in proptest::collection::vec(0u8..40, 3..8),
        bounds in proptest::collection::vec((0usize..3, 0usize..4), 2..=3),
        rotate in 1usize..3,
    ) {
        let n = xs.len();
        let k = bounds.len();
        let lower: Vec<usize> = bounds.iter().map(|b| b.0).collect();
        let upper: Vec<usize> = bounds.iter().map(|b| b.0 + b.1).collect();
        let make = |lower: Vec<usize>, upper: Vec<usize>| {
            let space = outlier_reduce::MetricSpace::euclidean(
                1,
                xs.iter().map(|&x| vec![f64::from(x)]).collect(),
                outlier_reduce::Power::Median,
            ).unwrap();
            let pts: Vec<PointRef> = (0..n).map(PointRef).collect();
            ClusteringInstance::new(space, pts.clone(), pts, k, 0, None, ConstraintSpec::SizeBounds { lower, upper }).unwrap()
        };
        let cost = |inst: &ClusteringInstance| solve_exact(&OutlierFreeProblem::full(inst), DEFAULT_EXACT_BUDGET).ok().map(|c| c.cost);
        let base = cost(&make(lower.clone(), upper.clone()));
        let (mut l2, mut u2) = (lower, upper);
        l2.rotate_left(rotate % k);
        u2.rotate_left(rotate % k);
        prop_assert_eq!(base, cost(&make(l2, u2)));
    }
}

fn binom(n: u64, r: u64) -> u64 {
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Exhaustive minimum over all `p`-subsets of facilities, every point served.
fn best_subset_cost(inst: &ClusteringInstance, p: usize) -> f64 {
    fn rec(inst: &ClusteringInstance, start: usize, p: usize, cur: &mut Vec<PointRef>, best: &mut f64) {
        if cur.len() == p {
            *best = best.min(anchor_cost_of(inst, cur).unwrap());
            return;
        }
        for i in start..inst.facilities().len() {
            cur.push(inst.facilities()[i]);
            rec(inst, i + 1, p, cur, best);
            cur.pop();
        }
    }
    let mut best = f64::INFINITY;
    rec(inst, 0, p, &mut Vec::new(), &mut best);
    best
}

#[test]
fn far_point_with_extra_budget_leaves_cost_unchanged() {
    for seed in 0..10 {
        let cfg = GeneratorConfig {
            n: 8,
            k: 2,
            m: 1,
            metric: GenMetric::Euclidean { dim: 2 },
            planted: false,
            seed,
            ..GeneratorConfig::default()
        };
        let mut g = generate(&cfg).unwrap();
        let base = g.file.build(None).unwrap();
        g.file
            .points
            .push(outlier_reduce::io::PointSpec::Vector(vec![1e6, 1e6]));
        g.file.m += 1;
        let grown = g.file.build(None).unwrap();
        let config = ReductionConfig {
            sampling: SamplingMode::Exhaustive,
            ..ReductionConfig::from_seed(seed)
        };
        let a = run_reduction(&base, &config, &ExactSolver::default())
            .unwrap()
            .solution
            .cost;
        let b = run_reduction(&grown, &config, &ExactSolver::default())
            .unwrap()
            .solution
            .cost;
        assert!(close(a, b), "seed {seed}: {a} vs {b}");
        assert!(close(oracle(&base).unwrap(), oracle(&grown).unwrap()));
    }
}
