//! Instance data model, the feasibility predicate and the objective.
//!
//! Feasibility is evaluated through a [`Profile`]: per-cluster sizes,
//! per-(cluster, label) counts and the facility positions of the centers.
//! A constraint never sees which individual points sit in a cluster.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{MetricSpace, PointRef};

pub type Label = usize;

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("k = {k} exceeds the number of candidate centers ({facilities})")]
    TooFewFacilities { k: usize, facilities: usize },
    #[error("outlier budget m = {m} exceeds the number of clients ({n})")]
    BudgetTooLarge { m: usize, n: usize },
    #[error("point {0} is not in the ground set")]
    UnknownPoint(PointRef),
    #[error("point {0} is listed twice as a client")]
    DuplicateClient(PointRef),
    #[error("point {0} is listed twice as a facility")]
    DuplicateFacility(PointRef),
    #[error("point {0} is not a candidate center")]
    NotAFacility(PointRef),
    #[error("the constraint depends on labels but the instance has none")]
    MissingLabels,
    #[error("labels are given but the constraint does not use them")]
    UnusedLabels,
    #[error("expected {expected} labels, got {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("invalid constraint: {0}")]
    BadConstraint(String),
}

/// A nonnegative rational `num / den`, serialized as `[num, den]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(u64, u64)", into = "(u64, u64)")]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Self {
        Self { num, den }
    }

    /// `self * total <= count`, exactly.
    pub fn times_at_most(self, total: usize, count: usize) -> bool {
        (self.num as u128) * (total as u128) <= (count as u128) * (self.den as u128)
    }

    /// `count <= self * total`, exactly.
    pub fn times_at_least(self, total: usize, count: usize) -> bool {
        (count as u128) * (self.den as u128) <= (self.num as u128) * (total as u128)
    }

    /// Smallest integer `c` with `self * total <= c`.
    pub fn ceil_times(self, total: usize) -> usize {
        let p = self.num as u128 * total as u128;
        p.div_ceil(self.den as u128) as usize
    }

    /// Largest integer `c` with `c <= self * total`.
    pub fn floor_times(self, total: usize) -> usize {
        (self.num as u128 * total as u128 / self.den as u128) as usize
    }
}

impl From<(u64, u64)> for Fraction {
    fn from((num, den): (u64, u64)) -> Self {
        Self { num, den }
    }
}

impl From<Fraction> for (u64, u64) {
    fn from(f: Fraction) -> Self {
        (f.num, f.den)
    }
}

/// Declarative feasibility constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSpec {
    Unconstrained,
    /// `lower[i] <= |X_i| <= upper[i]` (balanced, r-gather, l-capacity).
    SizeBounds {
        lower: Vec<usize>,
        upper: Vec<usize>,
    },
    /// `|X_i| <= capacities[f_i]`; capacities are indexed by facility position.
    Capacitated {
        capacities: Vec<usize>,
    },
    /// `min[i][l] <= |X_i ∩ label l| <= max[i][l]`.
    LabelCounts {
        min: Vec<Vec<usize>>,
        max: Vec<Vec<usize>>,
    },
    /// `alpha[l] |X_i| <= |X_i ∩ label l| <= beta[l] |X_i|` (fair / l-diversity).
    LabelFractions {
        alpha: Vec<Fraction>,
        beta: Vec<Fraction>,
    },
    /// At most `quotas[l]` outliers may carry label `l`; clusters are unconstrained.
    OutlierLabelQuota {
        quotas: Vec<usize>,
    },
}

/// Cardinality view of a clustering: all a constraint is allowed to look at.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub sizes: Vec<usize>,
    /// `label_counts[i][l]`, present when the instance is labelled.
    pub label_counts: Option<Vec<Vec<usize>>>,
    /// Facility positions of the centers.
    pub centers: Vec<usize>,
}

impl ConstraintSpec {
    pub fn is_label_dependent(&self) -> bool {
        matches!(
            self,
            ConstraintSpec::LabelCounts { .. }
                | ConstraintSpec::LabelFractions { .. }
                | ConstraintSpec::OutlierLabelQuota { .. }
        )
    }

    /// True when permuting cluster indices never changes feasibility, so
    /// solvers may enumerate unordered center sets.
    pub fn is_cluster_symmetric(&self) -> bool {
        fn uniform<T: PartialEq>(v: &[T]) -> bool {
            v.windows(2).all(|w| w[0] == w[1])
        }
        match self {
            ConstraintSpec::SizeBounds { lower, upper } => uniform(lower) && uniform(upper),
            ConstraintSpec::LabelCounts { min, max } => uniform(min) && uniform(max),
            _ => true,
        }
    }

    pub fn validate(&self, k: usize, facilities: usize, labels: usize) -> Result<(), InstanceError> {
        let bad = |msg: String| Err(InstanceError::BadConstraint(msg));
        match self {
            ConstraintSpec::Unconstrained => Ok(()),
            ConstraintSpec::SizeBounds { lower, upper } => {
                if lower.len() != k || upper.len() != k {
                    return bad(format!("size bounds need {k} lower and {k} upper entries"));
                }
                if let Some(i) = (0..k).find(|&i| lower[i] > upper[i]) {
                    return bad(format!("lower bound exceeds upper bound for cluster {i}"));
                }
                Ok(())
            }
            ConstraintSpec::Capacitated { capacities } => {
                if capacities.len() != facilities {
                    return bad(format!("{} capacities for {facilities} facilities", capacities.len()));
                }
                Ok(())
            }
            ConstraintSpec::LabelCounts { min, max } => {
                if min.len() != k || max.len() != k {
                    return bad(format!("label count bounds need {k} rows"));
                }
                for i in 0..k {
                    if min[i].len() != labels || max[i].len() != labels {
                        return bad(format!("label count bounds need {labels} columns"));
                    }
                    if (0..labels).any(|l| min[i][l] > max[i][l]) {
                        return bad(format!("min exceeds max in cluster {i}"));
                    }
                }
                Ok(())
            }
            ConstraintSpec::LabelFractions { alpha, beta } => {
                if alpha.len() != labels || beta.len() != labels {
                    return bad(format!("fractional bounds need {labels} entries"));
                }
                for l in 0..labels {
                    let (a, b) = (alpha[l], beta[l]);
                    if a.den == 0 || b.den == 0 {
                        return bad("zero denominator".into());
                    }
                    // 0 <= a <= b <= 1
                    if a.num as u128 * b.den as u128 > b.num as u128 * a.den as u128 || b.num > b.den {
                        return bad(format!("need 0 <= alpha <= beta <= 1 for label {l}"));
                    }
                }
                Ok(())
            }
            ConstraintSpec::OutlierLabelQuota { quotas } => {
                if quotas.len() != labels {
                    return bad(format!("outlier quotas need {labels} entries"));
                }
                Ok(())
            }
        }
    }

    /// Evaluates the cluster-side constraint on a cardinality profile.
    pub fn admits(&self, profile: &Profile) -> Result<bool, InstanceError> {
        let counts = || profile.label_counts.as_ref().ok_or(InstanceError::MissingLabels);
        Ok(match self {
            ConstraintSpec::Unconstrained | ConstraintSpec::OutlierLabelQuota { .. } => true,
            ConstraintSpec::SizeBounds { lower, upper } => profile
                .sizes
                .iter()
                .enumerate()
                .all(|(i, &s)| lower[i] <= s && s <= upper[i]),
            ConstraintSpec::Capacitated { capacities } => profile
                .sizes
                .iter()
                .zip(&profile.centers)
                .all(|(&s, &f)| s <= capacities[f]),
            ConstraintSpec::LabelCounts { min, max } => {
                let counts = counts()?;
                counts
                    .iter()
                    .enumerate()
                    .all(|(i, row)| row.iter().enumerate().all(|(l, &c)| min[i][l] <= c && c <= max[i][l]))
            }
            ConstraintSpec::LabelFractions { alpha, beta } => {
                let counts = counts()?;
                counts.iter().enumerate().all(|(i, row)| {
                    let size = profile.sizes[i];
                    row.iter()
                        .enumerate()
                        .all(|(l, &c)| alpha[l].times_at_most(size, c) && beta[l].times_at_least(size, c))
                })
            }
        })
    }

    /// Evaluates the outlier-side constraint on per-label outlier counts.
    pub fn admits_outliers(&self, outlier_label_counts: &[usize]) -> bool {
        match self {
            ConstraintSpec::OutlierLabelQuota { quotas } => {
                outlier_label_counts.iter().zip(quotas).all(|(&c, &q)| c <= q)
            }
            _ => true,
        }
    }
}

/// An outlier constrained clustering instance. Immutable once built.
#[derive(Debug, Clone)]
pub struct ClusteringInstance {
    space: MetricSpace,
    clients: Vec<PointRef>,
    facilities: Vec<PointRef>,
    k: usize,
    m: usize,
    labels: Option<Vec<Label>>,
    num_labels: usize,
    constraint: ConstraintSpec,
    client_pos: Vec<Option<usize>>,
    facility_pos: Vec<Option<usize>>,
}

impl ClusteringInstance {
    /// `labels`, when present, is aligned with `clients`; label ids are
    /// `0..num_labels` where `num_labels = max + 1`.
    pub fn new(
        space: MetricSpace,
        clients: Vec<PointRef>,
        facilities: Vec<PointRef>,
        k: usize,
        m: usize,
        labels: Option<Vec<Label>>,
        constraint: ConstraintSpec,
    ) -> Result<Self, InstanceError> {
        let g = space.len();
        let mut client_pos = vec![None; g];
        for (i, &p) in clients.iter().enumerate() {
            if p.0 >= g {
                return Err(InstanceError::UnknownPoint(p));
            }
            if client_pos[p.0].replace(i).is_some() {
                return Err(InstanceError::DuplicateClient(p));
            }
        }
        let mut facility_pos = vec![None; g];
        for (i, &p) in facilities.iter().enumerate() {
            if p.0 >= g {
                return Err(InstanceError::UnknownPoint(p));
            }
            if facility_pos[p.0].replace(i).is_some() {
                return Err(InstanceError::DuplicateFacility(p));
            }
        }
        if k == 0 {
            return Err(InstanceError::ZeroK);
        }
        if k > facilities.len() {
            return Err(InstanceError::TooFewFacilities {
                k,
                facilities: facilities.len(),
            });
        }
        if m > clients.len() {
            return Err(InstanceError::BudgetTooLarge { m, n: clients.len() });
        }
        if m + k > clients.len() {
            log::warn!(
                "m + k = {} exceeds n = {}; some clusters will be empty",
                m + k,
                clients.len()
            );
        }
        let num_labels = match (&labels, constraint.is_label_dependent()) {
            (None, true) => return Err(InstanceError::MissingLabels),
            (Some(_), false) => return Err(InstanceError::UnusedLabels),
            (Some(ls), true) => {
                if ls.len() != clients.len() {
                    return Err(InstanceError::LabelCount {
                        expected: clients.len(),
                        found: ls.len(),
                    });
                }
                let from_constraint = match &constraint {
                    ConstraintSpec::LabelCounts { min, .. } => min.first().map_or(0, Vec::len),
                    ConstraintSpec::LabelFractions { alpha, .. } => alpha.len(),
                    ConstraintSpec::OutlierLabelQuota { quotas } => quotas.len(),
                    _ => 0,
                };
                let observed = ls.iter().max().map_or(0, |&l| l + 1);
                if observed > from_constraint {
                    return Err(InstanceError::BadConstraint(format!(
                        "labels go up to {} but the constraint covers {from_constraint}",
                        observed - 1
                    )));
                }
                from_constraint
            }
            (None, false) => 0,
        };
        constraint.validate(k, facilities.len(), num_labels)?;
        Ok(Self {
            space,
            clients,
            facilities,
            k,
            m,
            labels,
            num_labels,
            constraint,
            client_pos,
            facility_pos,
        })
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn clients(&self) -> &[PointRef] {
        &self.clients
    }

    pub fn facilities(&self) -> &[PointRef] {
        &self.facilities
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.clients.len()
    }

    pub fn constraint(&self) -> &ConstraintSpec {
        &self.constraint
    }

    pub fn is_labelled(&self) -> bool {
        self.labels.is_some()
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    /// Label of a client, if the instance is labelled.
    pub fn label_of(&self, p: PointRef) -> Option<Label> {
        let labels = self.labels.as_ref()?;
        let pos = (*self.client_pos.get(p.0)?)?;
        Some(labels[pos])
    }

    pub fn client_position(&self, p: PointRef) -> Option<usize> {
        *self.client_pos.get(p.0)?
    }

    pub fn facility_position(&self, p: PointRef) -> Option<usize> {
        *self.facility_pos.get(p.0)?
    }

    /// Same instance with a different outlier budget.
    pub fn with_budget(&self, m: usize) -> Result<Self, InstanceError> {
        if m > self.clients.len() {
            return Err(InstanceError::BudgetTooLarge {
                m,
                n: self.clients.len(),
            });
        }
        Ok(Self { m, ..self.clone() })
    }

    /// Builds the cardinality profile of a clustering.
    pub fn profile(&self, clusters: &[Vec<PointRef>], centers: &[PointRef]) -> Result<Profile, InstanceError> {
        let centers = centers
            .iter()
            .map(|&c| self.facility_position(c).ok_or(InstanceError::NotAFacility(c)))
            .collect::<Result<Vec<_>, _>>()?;
        let label_counts = self
            .labels
            .as_ref()
            .map(|_| clusters.iter().map(|cl| self.label_histogram(cl)).collect::<Vec<_>>());
        Ok(Profile {
            sizes: clusters.iter().map(Vec::len).collect(),
            label_counts,
            centers,
        })
    }

    /// Per-label counts of a point set (all zeros when unlabelled).
    pub fn label_histogram(&self, points: &[PointRef]) -> Vec<usize> {
        let mut h = vec![0; self.num_labels];
        for &p in points {
            if let Some(l) = self.label_of(p) {
                h[l] += 1;
            }
        }
        h
    }
}

/// Feasibility of a clustering (cluster side only).
pub fn check(
    instance: &ClusteringInstance,
    clusters: &[Vec<PointRef>],
    centers: &[PointRef],
) -> Result<bool, InstanceError> {
    if clusters.len() != centers.len() {
        return Ok(false);
    }
    let profile = instance.profile(clusters, centers)?;
    instance.constraint.admits(&profile)
}

/// `Σ_i Σ_{x ∈ X_i} D^z(x, f_i)`: each point pays for its own cluster's
/// center, not the nearest one.
pub fn cost(instance: &ClusteringInstance, clusters: &[Vec<PointRef>], centers: &[PointRef]) -> f64 {
    clusters
        .iter()
        .zip(centers)
        .map(|(cl, &f)| cl.iter().map(|&x| instance.space.dz(x, f)).sum::<f64>())
        .sum()
}

/// Outlier set, clusters and centers of an outlier constrained clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub outliers: Vec<PointRef>,
    pub clusters: Vec<Vec<PointRef>>,
    pub centers: Vec<PointRef>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    UnknownPoint { point: usize },
    Overlap { point: usize },
    Unassigned { point: usize },
    OutlierBudget { found: usize, budget: usize },
    OutlierQuota { counts: Vec<usize> },
    ClusterCount { found: usize, expected: usize },
    NotAFacility { point: usize },
    DuplicateCenter { point: usize },
    CheckFailed,
    CostMismatch { reported: f64, recomputed: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownPoint { point } => write!(f, "unknown point: #{point} is not a client"),
            Violation::Overlap { point } => write!(f, "overlap: #{point} appears more than once"),
            Violation::Unassigned { point } => write!(f, "unassigned: #{point} is neither clustered nor an outlier"),
            Violation::OutlierBudget { found, budget } => {
                write!(f, "outlier budget: {found} outliers exceed m = {budget}")
            }
            Violation::OutlierQuota { counts } => write!(f, "outlier quota: per-label counts {counts:?}"),
            Violation::ClusterCount { found, expected } => {
                write!(f, "cluster count: {found} clusters, expected {expected}")
            }
            Violation::NotAFacility { point } => write!(f, "center #{point} is not a candidate center"),
            Violation::DuplicateCenter { point } => write!(f, "center #{point} is used twice"),
            Violation::CheckFailed => write!(f, "constraint check failed"),
            Violation::CostMismatch { reported, recomputed } => {
                write!(f, "cost mismatch: reported {reported}, recomputed {recomputed}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub feasible: bool,
    pub recomputed_cost: f64,
    pub violations: Vec<Violation>,
}

/// Absolute tolerance for cost comparisons.
pub const COST_TOLERANCE: f64 = 1e-9;

/// Recomputes partition, budget, constraint and cost of a solution and
/// lists every violation found.
pub fn validate_solution(instance: &ClusteringInstance, solution: &Solution) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    let mut refs_ok = true;
    for &p in solution.outliers.iter().chain(solution.clusters.iter().flatten()) {
        if instance.client_position(p).is_none() {
            violations.push(Violation::UnknownPoint { point: p.0 });
            refs_ok = false;
        } else if !seen.insert(p) {
            violations.push(Violation::Overlap { point: p.0 });
        }
    }
    for &p in &instance.clients {
        if !seen.contains(&p) {
            violations.push(Violation::Unassigned { point: p.0 });
        }
    }
    if solution.outliers.len() > instance.m {
        violations.push(Violation::OutlierBudget {
            found: solution.outliers.len(),
            budget: instance.m,
        });
    }
    if solution.clusters.len() != instance.k || solution.centers.len() != instance.k {
        violations.push(Violation::ClusterCount {
            found: solution.clusters.len().max(solution.centers.len()),
            expected: instance.k,
        });
        refs_ok = false;
    }
    let mut center_seen = HashSet::new();
    for &c in &solution.centers {
        if instance.facility_position(c).is_none() {
            violations.push(Violation::NotAFacility { point: c.0 });
            refs_ok = false;
        } else if !center_seen.insert(c) {
            violations.push(Violation::DuplicateCenter { point: c.0 });
        }
    }
    let mut recomputed_cost = f64::NAN;
    if refs_ok {
        recomputed_cost = cost(instance, &solution.clusters, &solution.centers);
        if (recomputed_cost - solution.cost).abs() > COST_TOLERANCE * recomputed_cost.abs().max(1.0) {
            violations.push(Violation::CostMismatch {
                reported: solution.cost,
                recomputed: recomputed_cost,
            });
        }
        match check(instance, &solution.clusters, &solution.centers) {
            Ok(true) => {}
            _ => violations.push(Violation::CheckFailed),
        }
        let counts = instance.label_histogram(&solution.outliers);
        if !instance.constraint.admits_outliers(&counts) {
            violations.push(Violation::OutlierQuota { counts });
        }
    }
    ValidationReport {
        feasible: violations.is_empty(),
        recomputed_cost,
        violations,
    }
}
