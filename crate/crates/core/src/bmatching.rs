//! Exact minimum-weight bipartite b-matching.
//!
//! Every right vertex `j` must be matched to exactly `demands[j]` distinct
//! left vertices, each left vertex is used at most once, and the total edge
//! weight is minimized. The labelled variant additionally fixes how many of
//! those partners carry each label; it is reduced to a plain assignment by
//! expanding right vertex `j` into `label_demands[j][l]` copies that only
//! accept label-`l` vertices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::FlowNetwork;
use crate::instance::Label;
use crate::metric::{MetricSpace, PointRef};

#[derive(Debug, Error, PartialEq)]
pub enum BMatchingError {
    #[error("weight matrix must be {left} x {right}")]
    Shape { left: usize, right: usize },
    #[error("edge weight ({0}, {1}) is negative or not finite")]
    BadWeight(usize, usize),
    #[error("expected {expected} demands, got {found}")]
    DemandCount { expected: usize, found: usize },
    #[error("label demands of right vertex {right} sum to {found}, expected {expected}")]
    LabelSum {
        right: usize,
        expected: usize,
        found: usize,
    },
    #[error("labels and label demands must be given together")]
    PartialLabels,
    #[error("right vertex {right} cannot be served: {needed} partners needed, {available} available")]
    ShortRight {
        right: usize,
        needed: usize,
        available: usize,
    },
    #[error("label {label} is short at right vertex {right}: {needed} needed in total, {available} available")]
    ShortLabel {
        right: usize,
        label: Label,
        needed: usize,
        available: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BMatchingProblem {
    pub left: Vec<PointRef>,
    pub right: Vec<PointRef>,
    /// `weights[u][j]` for left position `u` and right position `j`.
    pub weights: Vec<Vec<f64>>,
    pub demands: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_labels: Option<Vec<Label>>,
    /// `label_demands[j][l]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_demands: Option<Vec<Vec<usize>>>,
}

/// One matched pair, by position in the problem's left / right lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatchedEdge {
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BMatchingSolution {
    pub edges: Vec<MatchedEdge>,
    pub total_weight: f64,
    pub matched_left: Vec<PointRef>,
}

impl BMatchingProblem {
    /// Weights are powered distances `D^z(left, right)`.
    pub fn from_space(space: &MetricSpace, left: Vec<PointRef>, right: Vec<PointRef>, demands: Vec<usize>) -> Self {
        let weights = left
            .iter()
            .map(|&u| right.iter().map(|&v| space.dz(u, v)).collect())
            .collect();
        Self {
            left,
            right,
            weights,
            demands,
            left_labels: None,
            label_demands: None,
        }
    }

    pub fn with_labels(mut self, left_labels: Vec<Label>, label_demands: Vec<Vec<usize>>) -> Self {
        self.left_labels = Some(left_labels);
        self.label_demands = Some(label_demands);
        self
    }

    pub fn is_labelled(&self) -> bool {
        self.label_demands.is_some()
    }

    pub fn total_demand(&self) -> usize {
        self.demands.iter().sum()
    }

    /// Structural validation plus the counting conditions that decide
    /// feasibility on a complete bipartite graph.
    pub fn validate(&self) -> Result<(), BMatchingError> {
        let (nl, nr) = (self.left.len(), self.right.len());
        if self.weights.len() != nl || self.weights.iter().any(|row| row.len() != nr) {
            return Err(BMatchingError::Shape { left: nl, right: nr });
        }
        for (u, row) in self.weights.iter().enumerate() {
            if let Some(j) = row.iter().position(|w| !w.is_finite() || *w < 0.0) {
                return Err(BMatchingError::BadWeight(u, j));
            }
        }
        if self.demands.len() != nr {
            return Err(BMatchingError::DemandCount {
                expected: nr,
                found: self.demands.len(),
            });
        }
        match (&self.left_labels, &self.label_demands) {
            (None, None) => {
                let mut cumulative = 0;
                for (j, &t) in self.demands.iter().enumerate() {
                    cumulative += t;
                    if cumulative > nl {
                        return Err(BMatchingError::ShortRight {
                            right: j,
                            needed: cumulative,
                            available: nl,
                        });
                    }
                }
                Ok(())
            }
            (Some(labels), Some(ld)) => {
                if labels.len() != nl {
                    return Err(BMatchingError::Shape { left: nl, right: nr });
                }
                if ld.len() != nr {
                    return Err(BMatchingError::DemandCount {
                        expected: nr,
                        found: ld.len(),
                    });
                }
                for (j, row) in ld.iter().enumerate() {
                    let s: usize = row.iter().sum();
                    if s != self.demands[j] {
                        return Err(BMatchingError::LabelSum {
                            right: j,
                            expected: self.demands[j],
                            found: s,
                        });
                    }
                }
                let num_labels = ld.iter().map(Vec::len).max().unwrap_or(0);
                for l in 0..num_labels {
                    let available = labels.iter().filter(|&&x| x == l).count();
                    let mut needed = 0;
                    for (j, row) in ld.iter().enumerate() {
                        needed += row.get(l).copied().unwrap_or(0);
                        if needed > available {
                            return Err(BMatchingError::ShortLabel {
                                right: j,
                                label: l,
                                needed,
                                available,
                            });
                        }
                    }
                }
                Ok(())
            }
            _ => Err(BMatchingError::PartialLabels),
        }
    }
}

/// Solves the b-matching exactly with min-cost flow.
pub fn solve_bmatching(problem: &BMatchingProblem) -> Result<BMatchingSolution, BMatchingError> {
    problem.validate()?;
    let nl = problem.left.len();
    let nr = problem.right.len();
    let total = problem.total_demand();
    if total == 0 {
        return Ok(BMatchingSolution {
            edges: Vec::new(),
            total_weight: 0.0,
            matched_left: Vec::new(),
        });
    }

    // node layout: source, left vertices, right slots, sink
    let source = 0;
    let mut g = FlowNetwork::new(1 + nl);
    g.add_supply(source, total as i64);
    for u in 0..nl {
        g.add_arc(source, 1 + u, 0, 1, 0.0);
    }
    let sink;
    // (arc, left position, right position)
    let mut pair_arcs = Vec::new();
    match (&problem.left_labels, &problem.label_demands) {
        (Some(labels), Some(label_demands)) => {
            let mut copies = Vec::new();
            for (j, row) in label_demands.iter().enumerate() {
                for (l, &count) in row.iter().enumerate() {
                    for _ in 0..count {
                        copies.push((g.add_node(), j, l));
                    }
                }
            }
            sink = g.add_node();
            for (u, &label) in labels.iter().enumerate() {
                for &(node, j, l) in &copies {
                    if label == l {
                        let a = g.add_arc(1 + u, node, 0, 1, problem.weights[u][j]);
                        pair_arcs.push((a, u, j));
                    }
                }
            }
            for &(node, _, _) in &copies {
                g.add_arc(node, sink, 0, 1, 0.0);
            }
        }
        _ => {
            let right_nodes: Vec<usize> = (0..nr).map(|_| g.add_node()).collect();
            sink = g.add_node();
            for u in 0..nl {
                for (j, &node) in right_nodes.iter().enumerate() {
                    if problem.demands[j] > 0 {
                        let a = g.add_arc(1 + u, node, 0, 1, problem.weights[u][j]);
                        pair_arcs.push((a, u, j));
                    }
                }
            }
            for (j, &node) in right_nodes.iter().enumerate() {
                let t = problem.demands[j] as i64;
                g.add_arc(node, sink, t, t, 0.0);
            }
        }
    }
    g.add_supply(sink, -(total as i64));

    if g.solve().is_none() {
        // validate() covers the counting conditions, so this is unreachable
        // for well-formed problems
        return Err(BMatchingError::ShortRight {
            right: 0,
            needed: total,
            available: nl,
        });
    }
    let mut edges: Vec<MatchedEdge> = pair_arcs
        .into_iter()
        .filter(|&(a, _, _)| g.flow(a) > 0)
        .map(|(_, left, right)| MatchedEdge { left, right })
        .collect();
    edges.sort();
    let total_weight = edges.iter().map(|e| problem.weights[e.left][e.right]).sum();
    let matched_left = edges.iter().map(|e| problem.left[e.left]).collect();
    Ok(BMatchingSolution {
        edges,
        total_weight,
        matched_left,
    })
}

/// Keeps, for every right vertex (and every label, when labelled), only its
/// `m` lightest left vertices. The optimum is unchanged whenever every
/// per-vertex (per-label) demand is at most `m`.
pub fn prune_left(problem: &BMatchingProblem, m: usize) -> BMatchingProblem {
    let nl = problem.left.len();
    if nl <= m {
        return problem.clone();
    }
    let mut keep = vec![false; nl];
    let groups: Vec<Option<Label>> = match &problem.label_demands {
        Some(ld) => (0..ld.iter().map(Vec::len).max().unwrap_or(0)).map(Some).collect(),
        None => vec![None],
    };
    let mut order: Vec<usize> = Vec::with_capacity(nl);
    for j in 0..problem.right.len() {
        for &group in &groups {
            order.clear();
            order.extend((0..nl).filter(|&u| match (group, &problem.left_labels) {
                (Some(l), Some(labels)) => labels[u] == l,
                _ => true,
            }));
            order.sort_by(|&a, &b| problem.weights[a][j].total_cmp(&problem.weights[b][j]).then(a.cmp(&b)));
            for &u in order.iter().take(m) {
                keep[u] = true;
            }
        }
    }
    let kept: Vec<usize> = (0..nl).filter(|&u| keep[u]).collect();
    BMatchingProblem {
        left: kept.iter().map(|&u| problem.left[u]).collect(),
        right: problem.right.clone(),
        weights: kept.iter().map(|&u| problem.weights[u].clone()).collect(),
        demands: problem.demands.clone(),
        left_labels: problem
            .left_labels
            .as_ref()
            .map(|labels| kept.iter().map(|&u| labels[u]).collect()),
        label_demands: problem.label_demands.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(weights: Vec<Vec<f64>>, demands: Vec<usize>) -> BMatchingProblem {
        let nl = weights.len();
        let nr = demands.len();
        BMatchingProblem {
            left: (0..nl).map(PointRef).collect(),
            right: (0..nr).map(|j| PointRef(100 + j)).collect(),
            weights,
            demands,
            left_labels: None,
            label_demands: None,
        }
    }

    /// Exhaustive minimum over injective demand-respecting assignments.
    fn brute_force(p: &BMatchingProblem) -> Option<f64> {
        fn rec(
            p: &BMatchingProblem,
            slots: &[(usize, Option<usize>)],
            idx: usize,
            used: &mut Vec<bool>,
        ) -> Option<f64> {
            if idx == slots.len() {
                return Some(0.0);
            }
            let (j, label) = slots[idx];
            let mut best: Option<f64> = None;
            for u in 0..p.left.len() {
                if used[u] {
                    continue;
                }
                if let (Some(l), Some(labels)) = (label, &p.left_labels) {
                    if labels[u] != l {
                        continue;
                    }
                }
                used[u] = true;
                if let Some(rest) = rec(p, slots, idx + 1, used) {
                    let c = rest + p.weights[u][j];
                    best = Some(best.map_or(c, |b: f64| b.min(c)));
                }
                used[u] = false;
            }
            best
        }
        let mut slots = Vec::new();
        match &p.label_demands {
            Some(ld) => {
                for (j, row) in ld.iter().enumerate() {
                    for (l, &c) in row.iter().enumerate() {
                        slots.extend(std::iter::repeat_n((j, Some(l)), c));
                    }
                }
            }
            None => {
                for (j, &t) in p.demands.iter().enumerate() {
                    slots.extend(std::iter::repeat_n((j, None), t));
                }
            }
        }
        rec(p, &slots, 0, &mut vec![false; p.left.len()])
    }

    #[test]
    fn zero_demands_give_empty_matching() {
        let s = solve_bmatching(&grid(vec![vec![1.0, 2.0]], vec![0, 0])).unwrap();
        assert!(s.edges.is_empty());
        assert_eq!(s.total_weight, 0.0);
    }

    #[test]
    fn single_center_takes_cheapest() {
        let s = solve_bmatching(&grid(vec![vec![3.0], vec![5.0]], vec![1])).unwrap();
        assert_eq!(s.total_weight, 3.0);
        assert_eq!(s.matched_left, vec![PointRef(0)]);
    }

    #[test]
    fn two_by_three_matches_brute_force() {
        let p = grid(vec![vec![4.0, 1.0], vec![2.0, 3.0], vec![1.5, 7.0]], vec![1, 1]);
        let s = solve_bmatching(&p).unwrap();
        // brute force over the 6 injective assignments
        let mut best = f64::INFINITY;
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    best = best.min(p.weights[a][0] + p.weights[b][1]);
                }
            }
        }
        assert_eq!(best, 2.5);
        assert_eq!(s.total_weight, best);
        assert_eq!(brute_force(&p), Some(best));
    }

    #[test]
    fn labelled_demands_are_respected() {
        // red at 1, red at 2, blue at 5; one red and one blue needed
        let p = grid(vec![vec![1.0], vec![2.0], vec![5.0]], vec![2]).with_labels(vec![0, 0, 1], vec![vec![1, 1]]);
        let s = solve_bmatching(&p).unwrap();
        assert_eq!(s.total_weight, 6.0);
        assert_eq!(brute_force(&p), Some(6.0));
        let unlabelled = grid(vec![vec![1.0], vec![2.0], vec![5.0]], vec![2]);
        assert_eq!(solve_bmatching(&unlabelled).unwrap().total_weight, 3.0);
    }

    #[test]
    fn infeasible_demands_name_the_short_vertex() {
        let p = grid(vec![vec![1.0, 1.0]], vec![1, 1]);
        assert_eq!(
            solve_bmatching(&p).unwrap_err(),
            BMatchingError::ShortRight {
                right: 1,
                needed: 2,
                available: 1
            }
        );
        let p = grid(vec![vec![1.0], vec![1.0]], vec![2]).with_labels(vec![0, 0], vec![vec![1, 1]]);
        assert!(matches!(
            solve_bmatching(&p).unwrap_err(),
            BMatchingError::ShortLabel { label: 1, .. }
        ));
        let p = grid(vec![vec![1.0], vec![1.0]], vec![2]).with_labels(vec![0, 0], vec![vec![1, 0]]);
        assert!(matches!(
            solve_bmatching(&p).unwrap_err(),
            BMatchingError::LabelSum { .. }
        ));
    }

    #[test]
    fn pruning_keeps_nearest() {
        let p = grid(vec![vec![3.0], vec![1.0], vec![4.0], vec![2.0]], vec![2]);
        let pruned = prune_left(&p, 2);
        assert_eq!(pruned.left, vec![PointRef(1), PointRef(3)]);
        for t in 0..=2 {
            let mut a = p.clone();
            a.demands = vec![t];
            let mut b = pruned.clone();
            b.demands = vec![t];
            assert_eq!(
                solve_bmatching(&a).unwrap().total_weight,
                solve_bmatching(&b).unwrap().total_weight
            );
        }
        let small = grid(vec![vec![3.0], vec![1.0]], vec![1]);
        assert_eq!(prune_left(&small, 2), small);
    }

    #[test]
    fn single_label_reduces_to_unlabelled() {
        let w = vec![vec![4.0, 1.0], vec![2.0, 3.0], vec![1.5, 7.0], vec![0.5, 0.25]];
        let p = grid(w.clone(), vec![2, 1]);
        let lp = grid(w, vec![2, 1]).with_labels(vec![0; 4], vec![vec![2], vec![1]]);
        assert_eq!(
            solve_bmatching(&p).unwrap().total_weight,
            solve_bmatching(&lp).unwrap().total_weight
        );
    }

    #[test]
    fn separable_centers_add_up() {
        // each center's two nearest clients are far from the other center
        let w = vec![vec![1.0, 50.0], vec![2.0, 60.0], vec![70.0, 1.0], vec![80.0, 3.0]];
        let joint = solve_bmatching(&grid(w.clone(), vec![1, 2])).unwrap().total_weight;
        let a = solve_bmatching(&grid(w.clone(), vec![1, 0])).unwrap().total_weight;
        let b = solve_bmatching(&grid(w, vec![0, 2])).unwrap().total_weight;
        assert_eq!(joint, a + b);
    }

    pub(crate) fn random_problem(seed: u64, labelled: bool) -> BMatchingProblem {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let nl = rng.random_range(1..=8);
        let nr = rng.random_range(1..=3);
        let weights: Vec<Vec<f64>> = (0..nl)
            .map(|_| (0..nr).map(|_| rng.random_range(0..20) as f64 * 0.5).collect())
            .collect();
        let mut p = grid(weights, vec![0; nr]);
        if labelled {
            let nlab = rng.random_range(1..=3);
            let labels: Vec<usize> = (0..nl).map(|_| rng.random_range(0..nlab)).collect();
            let mut avail: Vec<usize> = (0..nlab).map(|l| labels.iter().filter(|&&x| x == l).count()).collect();
            let mut ld = vec![vec![0; nlab]; nr];
            for row in ld.iter_mut() {
                for (l, cell) in row.iter_mut().enumerate() {
                    let c = rng.random_range(0..=avail[l].min(2));
                    *cell = c;
                    avail[l] -= c;
                }
            }
            p.demands = ld.iter().map(|r| r.iter().sum()).collect();
            p.with_labels(labels, ld)
        } else {
            let mut left = nl;
            for j in 0..nr {
                let t = rng.random_range(0..=left.min(3));
                p.demands[j] = t;
                left -= t;
            }
            p
        }
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        for seed in 0..200 {
            for labelled in [false, true] {
                let p = random_problem(seed, labelled);
                let got = solve_bmatching(&p).unwrap();
                let want = brute_force(&p).unwrap();
                assert!(
                    (got.total_weight - want).abs() < 1e-9,
                    "seed {seed}: {} vs {want}",
                    got.total_weight
                );
                assert_eq!(got.edges.len(), p.total_demand());
            }
        }
    }
}
