//! Brute-force references and random instance builders shared by the
//! integration tests. Nothing here calls the flow or matching code.

#![allow(dead_code)]

use outlier_reduce::bmatching::BMatchingProblem;
use outlier_reduce::gen::{generate, FacilityMode, GenConstraint, GenMetric, GeneratorConfig};
use outlier_reduce::instance::{self, ClusteringInstance, ConstraintSpec, Fraction};
use outlier_reduce::metric::{MetricSpace, PointRef, Power};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Tolerance-aware `a <= b`.
pub fn leq(a: f64, b: f64) -> bool {
    a <= b + TOL * b.abs().max(1.0)
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
}

/// `1 + ε^{1/z} (2m + 1)^{z-1}`.
pub fn lemma_factor(epsilon: f64, z: u32, m: usize) -> f64 {
    1.0 + epsilon.powf(1.0 / z as f64) * ((2 * m + 1) as f64).powi(z as i32 - 1)
}

/// Minimum weight over every assignment of left vertices to right vertices
/// (or to nothing) that meets every demand exactly; `None` if none does.
pub fn brute_bmatching(p: &BMatchingProblem) -> Option<f64> {
    let labels = p.left_labels.clone();
    let mut remaining: Vec<Vec<usize>> = match &p.label_demands {
        Some(ld) => ld.clone(),
        None => p.demands.iter().map(|&t| vec![t]).collect(),
    };
    fn rec(
        p: &BMatchingProblem,
        labels: &Option<Vec<usize>>,
        u: usize,
        remaining: &mut Vec<Vec<usize>>,
        left_to_fill: usize,
        acc: f64,
        best: &mut Option<f64>,
    ) {
        if left_to_fill == 0 {
            if best.is_none_or(|b| acc < b) {
                *best = Some(acc);
            }
            return;
        }
        if u == p.left.len() || p.left.len() - u < left_to_fill {
            return;
        }
        rec(p, labels, u + 1, remaining, left_to_fill, acc, best);
        let l = labels.as_ref().map_or(0, |ls| ls[u]);
        for j in 0..p.right.len() {
            if l < remaining[j].len() && remaining[j][l] > 0 {
                remaining[j][l] -= 1;
                rec(
                    p,
                    labels,
                    u + 1,
                    remaining,
                    left_to_fill - 1,
                    acc + p.weights[u][j],
                    best,
                );
                remaining[j][l] += 1;
            }
        }
    }
    let total = remaining.iter().flatten().sum();
    let mut best = None;
    rec(p, &labels, 0, &mut remaining, total, 0.0, &mut best);
    best
}

/// Random b-matching problem with random weights in `[0, 10)`.
pub fn random_bmatching(
    rng: &mut ChaCha8Rng,
    max_left: usize,
    max_right: usize,
    labels: Option<usize>,
) -> BMatchingProblem {
    let nl = rng.random_range(0..=max_left);
    let nr = rng.random_range(1..=max_right);
    let weights: Vec<Vec<f64>> = (0..nl)
        .map(|_| {
            (0..nr)
                .map(|_| {
                    // occasional exact ties
                    if rng.random_bool(0.2) {
                        1.0
                    } else {
                        rng.random_range(0.0..10.0)
                    }
                })
                .collect()
        })
        .collect();
    let budget = rng.random_range(0..=nl.max(1));
    let mut demands = vec![0; nr];
    for _ in 0..budget {
        demands[rng.random_range(0..nr)] += 1;
    }
    let mut p = BMatchingProblem {
        left: (0..nl).map(PointRef).collect(),
        right: (nl..nl + nr).map(PointRef).collect(),
        weights,
        demands: demands.clone(),
        left_labels: None,
        label_demands: None,
    };
    if let Some(ell) = labels {
        let left_labels: Vec<usize> = (0..nl).map(|_| rng.random_range(0..ell)).collect();
        let label_demands = demands
            .iter()
            .map(|&t| {
                let mut parts = vec![0; ell];
                for _ in 0..t {
                    parts[rng.random_range(0..ell)] += 1;
                }
                parts
            })
            .collect();
        p.left_labels = Some(left_labels);
        p.label_demands = Some(label_demands);
    }
    p
}

/// Minimum cost over all `k^|points|` assignments of `points` to the
/// given centers that pass `check`.
pub fn exhaustive_assignment(inst: &ClusteringInstance, points: &[PointRef], centers: &[PointRef]) -> Option<f64> {
    let k = centers.len();
    let n = points.len();
    let mut choice = vec![0usize; n];
    let mut best: Option<f64> = None;
    loop {
        let mut clusters = vec![Vec::new(); k];
        for (i, &c) in choice.iter().enumerate() {
            clusters[c].push(points[i]);
        }
        if instance::check(inst, &clusters, centers).unwrap() {
            let c = instance::cost(inst, &clusters, centers);
            if best.is_none_or(|b| c < b) {
                best = Some(c);
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            choice[i] += 1;
            if choice[i] < k {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Unconstrained,
    Capacitated,
    SizeBounds,
    LabelCounts,
    LabelFractions,
    OutlierLabelQuota,
}

pub const ALL_KINDS: [Kind; 6] = [
    Kind::Unconstrained,
    Kind::Capacitated,
    Kind::SizeBounds,
    Kind::LabelCounts,
    Kind::LabelFractions,
    Kind::OutlierLabelQuota,
];

/// Random 1-D or 2-D instance with `F = X` and random (often tight or
/// infeasible) constraint parameters.
pub fn random_constrained(rng: &mut ChaCha8Rng, kind: Kind, n: usize, k: usize, m: usize) -> ClusteringInstance {
    let dim = rng.random_range(1..=2);
    let coords: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(0..20) as f64 / 2.0).collect())
        .collect();
    let power = if rng.random_bool(0.5) {
        Power::Median
    } else {
        Power::Means
    };
    let space = MetricSpace::euclidean(dim, coords, power).unwrap();
    let pts: Vec<PointRef> = (0..n).map(PointRef).collect();
    let ell = rng.random_range(1..=3);
    let labels = (0..n).map(|_| rng.random_range(0..ell)).collect::<Vec<_>>();
    let constraint = match kind {
        Kind::Unconstrained => ConstraintSpec::Unconstrained,
        Kind::Capacitated => ConstraintSpec::Capacitated {
            capacities: (0..n).map(|_| rng.random_range(0..=n.div_ceil(k) + 1)).collect(),
        },
        Kind::SizeBounds => {
            let lower: Vec<usize> = (0..k).map(|_| rng.random_range(0..=n / k)).collect();
            let upper = lower.iter().map(|&l| l + rng.random_range(0..=n / k + 1)).collect();
            ConstraintSpec::SizeBounds { lower, upper }
        }
        Kind::LabelCounts => {
            let min: Vec<Vec<usize>> = (0..k)
                .map(|_| (0..ell).map(|_| rng.random_range(0..=1)).collect())
                .collect();
            let max = min
                .iter()
                .map(|row| row.iter().map(|&lo| lo + rng.random_range(0..=3)).collect())
                .collect();
            ConstraintSpec::LabelCounts { min, max }
        }
        // alpha <= 1/2 <= beta keeps every pair valid
        Kind::LabelFractions => ConstraintSpec::LabelFractions {
            alpha: (0..ell)
                .map(|_| Fraction::new(rng.random_range(0..=1), rng.random_range(2..=8)))
                .collect(),
            beta: (0..ell)
                .map(|_| {
                    let den = rng.random_range(1..=4u64);
                    Fraction::new(rng.random_range(den.div_ceil(2)..=den), den)
                })
                .collect(),
        },
        Kind::OutlierLabelQuota => ConstraintSpec::OutlierLabelQuota {
            quotas: (0..ell).map(|_| rng.random_range(0..=m)).collect(),
        },
    };
    let labels = constraint.is_label_dependent().then_some(labels);
    ClusteringInstance::new(space, pts.clone(), pts, k, m, labels, constraint).unwrap()
}

/// Generator config for the theorem-check family: n ≤ 12, k ≤ 3, m ≤ 2.
pub fn family_config(seed: u64, m: usize, z: u32, constraint: GenConstraint) -> GeneratorConfig {
    let mut r = rng(seed ^ 0x5eed);
    let k = r.random_range(1..=3);
    let n = r.random_range((k + m + 2).max(6)..=12);
    let metric = match r.random_range(0..4) {
        0 => GenMetric::Matrix,
        1 => GenMetric::Ulam { perm_len: 5 },
        2 => GenMetric::Euclidean { dim: 1 },
        _ => GenMetric::Euclidean { dim: 2 },
    };
    GeneratorConfig {
        n,
        k,
        m,
        metric,
        z,
        constraint,
        num_labels: 2,
        planted: r.random_bool(0.5),
        facilities: FacilityMode::Clients,
        seed,
    }
}

pub fn build(cfg: &GeneratorConfig) -> ClusteringInstance {
    generate(cfg).unwrap().file.build(None).unwrap()
}
