//! Seeded random instance generators.
//!
//! Instances are built as [`InstanceFile`]s so they can be written to disk
//! unchanged. Every generator guarantees `n - m >= Σ lower bounds`, so
//! removing any `m` points leaves a feasible size-bounded instance;
//! label-fraction instances are best effort and may be infeasible.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{ConstraintSpec, Fraction};
use crate::io::{InstanceFile, MetricSpec, PointSpec};

/// Radius of a generated Euclidean cluster.
pub const CLUSTER_RADIUS: f64 = 2.0;
/// Side of the box holding cluster centers.
const CENTER_BOX: f64 = 100.0;

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenMetric {
    Euclidean {
        dim: usize,
    },
    /// Euclidean points in the plane, written as a distance matrix.
    Matrix,
    Ulam {
        perm_len: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenConstraint {
    Unconstrained,
    Capacitated,
    SizeBounds,
    LabelCounts,
    LabelFractions,
    OutlierLabelQuota,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacilityMode {
    /// `F = X`.
    Clients,
    /// `F = X` minus the planted outliers.
    ExcludePlanted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Total number of points, planted outliers included.
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub metric: GenMetric,
    pub z: u32,
    pub constraint: GenConstraint,
    /// Label count for label-dependent constraints.
    pub num_labels: usize,
    /// Place `m` points far away from every cluster.
    pub planted: bool,
    pub facilities: FacilityMode,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n: 12,
            k: 2,
            m: 2,
            metric: GenMetric::Euclidean { dim: 2 },
            z: 1,
            constraint: GenConstraint::Unconstrained,
            num_labels: 2,
            planted: true,
            facilities: FacilityMode::Clients,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub file: InstanceFile,
    /// Point positions of the planted outliers.
    pub planted: Vec<usize>,
}

impl GeneratorConfig {
    fn validate(&self) -> Result<(), GenError> {
        let bad = |msg: String| Err(GenError::Config(msg));
        if self.k == 0 {
            return bad("k must be positive".into());
        }
        if self.m + self.k > self.n {
            return bad(format!("n = {} is smaller than k + m = {}", self.n, self.k + self.m));
        }
        if self.z != 1 && self.z != 2 {
            return bad(format!("z must be 1 or 2, got {}", self.z));
        }
        match self.metric {
            GenMetric::Euclidean { dim: 0 } => return bad("dim must be positive".into()),
            GenMetric::Ulam { perm_len } if perm_len < 2 => return bad("perm_len must be at least 2".into()),
            _ => {}
        }
        if self.needs_labels() && self.num_labels == 0 {
            return bad("label constraints need at least one label".into());
        }
        if self.facilities == FacilityMode::ExcludePlanted && self.planted && self.n - self.m < self.k {
            return bad("too few facilities once planted points are excluded".into());
        }
        Ok(())
    }

    fn needs_labels(&self) -> bool {
        matches!(
            self.constraint,
            GenConstraint::LabelCounts | GenConstraint::LabelFractions | GenConstraint::OutlierLabelQuota
        )
    }
}

pub fn generate(cfg: &GeneratorConfig) -> Result<GeneratedInstance, GenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let planted_count = if cfg.planted { cfg.m } else { 0 };
    let inliers = cfg.n - planted_count;
    // planted points go last, then the order is shuffled
    let mut order: Vec<usize> = (0..cfg.n).collect();
    order.shuffle(&mut rng);
    let mut planted: Vec<usize> = (0..cfg.n).filter(|&pos| order[pos] >= inliers).collect();
    planted.sort_unstable();

    let (metric, raw_points) = match cfg.metric {
        GenMetric::Euclidean { dim } => {
            let pts = euclidean_points(&mut rng, dim, cfg.k, inliers, planted_count);
            let specs = pts.into_iter().map(PointSpec::Vector).collect::<Vec<_>>();
            (MetricSpec::Euclidean { dim }, specs)
        }
        GenMetric::Matrix => {
            let pts = euclidean_points(&mut rng, 2, cfg.k, inliers, planted_count);
            let mut ordered = vec![Vec::new(); cfg.n];
            for (pos, &src) in order.iter().enumerate() {
                ordered[pos] = pts[src].clone();
            }
            let distances = ordered
                .iter()
                .map(|a| ordered.iter().map(|b| euclid(a, b)).collect())
                .collect();
            let metric = MetricSpec::Matrix {
                distances: Some(distances),
                csv: None,
            };
            // already in final order
            let specs = (0..cfg.n).map(PointSpec::Index).collect();
            order = (0..cfg.n).collect();
            (metric, specs)
        }
        GenMetric::Ulam { perm_len } => {
            let perms = ulam_points(&mut rng, perm_len, cfg.k, inliers, planted_count);
            let specs = perms.into_iter().map(PointSpec::Permutation).collect::<Vec<_>>();
            (MetricSpec::Ulam { perm_len, file: None }, specs)
        }
    };
    let points: Vec<PointSpec> = order.iter().map(|&src| raw_points[src].clone()).collect();

    let facilities = match cfg.facilities {
        FacilityMode::Clients => None,
        FacilityMode::ExcludePlanted => Some(
            (0..cfg.n)
                .filter(|pos| planted.binary_search(pos).is_err())
                .map(|pos| points[pos].clone())
                .collect::<Vec<_>>(),
        ),
    };
    let num_facilities = facilities.as_ref().map_or(cfg.n, Vec::len);

    let labels = cfg.needs_labels().then(|| {
        (0..cfg.n)
            .map(|_| rng.random_range(0..cfg.num_labels))
            .collect::<Vec<_>>()
    });
    let constraint = make_constraint(&mut rng, cfg, num_facilities, labels.as_deref());

    Ok(GeneratedInstance {
        file: InstanceFile {
            metric,
            z: cfg.z,
            points,
            facilities,
            k: cfg.k,
            m: cfg.m,
            labels,
            constraint,
        },
        planted,
    })
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Inliers in `k` balls of radius [`CLUSTER_RADIUS`], then planted points
/// more than `10 × CLUSTER_RADIUS` from every ball.
fn euclidean_points(rng: &mut ChaCha8Rng, dim: usize, k: usize, inliers: usize, planted: usize) -> Vec<Vec<f64>> {
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..dim).map(|_| rng.random_range(0.0..CENTER_BOX)).collect())
        .collect();
    let mut pts = Vec::with_capacity(inliers + planted);
    for i in 0..inliers {
        let c = &centers[i % k];
        let r = CLUSTER_RADIUS * rng.random::<f64>();
        let u = unit_vector(rng, dim);
        pts.push(c.iter().zip(&u).map(|(a, b)| round3(a + r * b)).collect());
    }
    // the center box has diameter CENTER_BOX * sqrt(dim), so this clears
    // every ball by far more than ten radii
    let middle = CENTER_BOX / 2.0;
    let reach = CENTER_BOX * (dim as f64).sqrt();
    for _ in 0..planted {
        let r = reach + 20.0 * CLUSTER_RADIUS + rng.random_range(0.0..reach);
        let u = unit_vector(rng, dim);
        pts.push(u.iter().map(|b| round3(middle + r * b)).collect());
    }
    pts
}

/// Inliers within one random move of `k` random centers; planted points
/// are uniform permutations.
fn ulam_points(rng: &mut ChaCha8Rng, len: usize, k: usize, inliers: usize, planted: usize) -> Vec<Vec<u32>> {
    let random_perm = |rng: &mut ChaCha8Rng| {
        let mut p: Vec<u32> = (1..=len as u32).collect();
        p.shuffle(rng);
        p
    };
    let centers: Vec<Vec<u32>> = (0..k).map(|_| random_perm(rng)).collect();
    let mut out = Vec::with_capacity(inliers + planted);
    for i in 0..inliers {
        let mut p = centers[i % k].clone();
        if i >= k {
            let from = rng.random_range(0..len);
            let v = p.remove(from);
            let to = rng.random_range(0..len);
            p.insert(to, v);
        }
        out.push(p);
    }
    for _ in 0..planted {
        out.push(random_perm(rng));
    }
    out
}

fn make_constraint(
    rng: &mut ChaCha8Rng,
    cfg: &GeneratorConfig,
    num_facilities: usize,
    labels: Option<&[usize]>,
) -> ConstraintSpec {
    let k = cfg.k;
    let kept = cfg.n - cfg.m;
    let share = kept.div_ceil(k);
    match cfg.constraint {
        GenConstraint::Unconstrained => ConstraintSpec::Unconstrained,
        GenConstraint::Capacitated => ConstraintSpec::Capacitated {
            capacities: (0..num_facilities).map(|_| share + rng.random_range(0..=1)).collect(),
        },
        GenConstraint::SizeBounds => {
            let lower_max = kept / (2 * k);
            let lower: Vec<usize> = (0..k).map(|_| rng.random_range(0..=lower_max)).collect();
            let upper: Vec<usize> = lower
                .iter()
                .map(|&l| (share + rng.random_range(0..=1)).max(l))
                .collect();
            ConstraintSpec::SizeBounds { lower, upper }
        }
        GenConstraint::LabelCounts => {
            let ell = cfg.num_labels;
            let counts = label_counts(labels.unwrap_or(&[]), ell);
            let min = (0..k)
                .map(|_| {
                    counts
                        .iter()
                        .map(|&c| usize::from(c >= k + cfg.m && rng.random_bool(0.5)))
                        .collect()
                })
                .collect();
            let max = (0..k)
                .map(|_| counts.iter().map(|&c| c.div_ceil(k) + 1).collect())
                .collect();
            ConstraintSpec::LabelCounts { min, max }
        }
        GenConstraint::LabelFractions => {
            let ell = cfg.num_labels;
            let beta = if ell == 1 {
                Fraction::new(1, 1)
            } else {
                Fraction::new(3, 4)
            };
            ConstraintSpec::LabelFractions {
                alpha: vec![Fraction::new(0, 1); ell],
                beta: vec![beta; ell],
            }
        }
        GenConstraint::OutlierLabelQuota => {
            let ell = cfg.num_labels;
            ConstraintSpec::OutlierLabelQuota {
                quotas: vec![cfg.m.div_ceil(ell); ell],
            }
        }
    }
}

fn label_counts(labels: &[usize], ell: usize) -> Vec<usize> {
    let mut counts = vec![0; ell];
    for &l in labels {
        counts[l] += 1;
    }
    counts
}
