//! Brute-force ground truth for small instances.
//!
//! [`exact_outlier_opt`] tries every outlier set of size at most `m` and
//! solves each residual exactly. It shares only the cost and constraint
//! primitives with the reduction, so it can certify it.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{ClusteringInstance, Solution, COST_TOLERANCE};
use crate::metric::PointRef;
use crate::solvers::{solve_exact, OutlierFreeProblem, SolveError, DEFAULT_EXACT_BUDGET};

/// Longest permutation [`ulam_bfs`] accepts.
pub const ULAM_BFS_MAX_LEN: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("instance exceeds oracle budget: {0}")]
    OverBudget(String),
    #[error("no feasible solution for any outlier set")]
    Infeasible,
    #[error(transparent)]
    Solver(SolveError),
    #[error("permutations of lengths {0} and {1} cannot be compared")]
    LengthMismatch(usize, usize),
    #[error("permutation length {0} exceeds the BFS limit of {ULAM_BFS_MAX_LEN}")]
    TooLong(usize),
    #[error("not a permutation: {0:?}")]
    NotPermutation(Vec<u32>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub max_n: usize,
    pub max_k: usize,
    pub max_m: usize,
    pub max_f: usize,
    /// Center tuples the inner exact solver may examine per residual.
    pub exact_budget: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_n: 12,
            max_k: 3,
            max_m: 2,
            max_f: 12,
            exact_budget: DEFAULT_EXACT_BUDGET,
        }
    }
}

impl OracleBudget {
    pub fn admits(&self, instance: &ClusteringInstance) -> Result<(), OracleError> {
        let checks = [
            ("n", instance.n(), self.max_n),
            ("k", instance.k(), self.max_k),
            ("m", instance.m(), self.max_m),
            ("|F|", instance.facilities().len(), self.max_f),
        ];
        for (name, value, max) in checks {
            if value > max {
                return Err(OracleError::OverBudget(format!("{name} = {value} > {max}")));
            }
        }
        Ok(())
    }
}

/// Optimal cost and one optimal solution, removing at most `m` outliers.
///
/// Outlier sets are visited by size, then lexicographically by client
/// position; the first optimum (within [`COST_TOLERANCE`]) wins.
pub fn exact_outlier_opt(instance: &ClusteringInstance, budget: &OracleBudget) -> Result<Solution, OracleError> {
    budget.admits(instance)?;
    let clients = instance.clients();
    let n = clients.len();
    let mut best: Option<Solution> = None;
    for size in 0..=instance.m().min(n) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let outliers: Vec<PointRef> = idx.iter().map(|&i| clients[i]).collect();
            if instance
                .constraint()
                .admits_outliers(&instance.label_histogram(&outliers))
            {
                let rest: Vec<PointRef> = clients
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !idx.contains(i))
                    .map(|(_, &p)| p)
                    .collect();
                match solve_exact(&OutlierFreeProblem::new(instance, &rest), budget.exact_budget) {
                    Ok(c) => {
                        if best.as_ref().is_none_or(|b| c.cost < b.cost - COST_TOLERANCE) {
                            let mut outliers = outliers;
                            outliers.sort();
                            best = Some(Solution {
                                outliers,
                                clusters: c.clusters,
                                centers: c.centers,
                                cost: c.cost,
                            });
                        }
                    }
                    Err(SolveError::Infeasible) => {}
                    Err(e) => return Err(OracleError::Solver(e)),
                }
            }
            let Some(i) = (0..size).rev().find(|&i| idx[i] < n - size + i) else {
                break;
            };
            idx[i] += 1;
            for j in (i + 1)..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    best.ok_or(OracleError::Infeasible)
}

fn check_perm(p: &[u32]) -> Result<(), OracleError> {
    let mut seen = vec![false; p.len()];
    for &v in p {
        let v = v as usize;
        if v == 0 || v > p.len() || seen[v - 1] {
            return Err(OracleError::NotPermutation(p.to_vec()));
        }
        seen[v - 1] = true;
    }
    Ok(())
}

/// Minimum number of single-element moves (remove one entry, reinsert it
/// elsewhere) turning `p` into `q`, by breadth-first search. Permutations
/// are over `1..=len`.
pub fn ulam_bfs(p: &[u32], q: &[u32]) -> Result<usize, OracleError> {
    if p.len() != q.len() {
        return Err(OracleError::LengthMismatch(p.len(), q.len()));
    }
    if p.len() > ULAM_BFS_MAX_LEN {
        return Err(OracleError::TooLong(p.len()));
    }
    check_perm(p)?;
    check_perm(q)?;
    let mut dist: HashMap<Vec<u32>, usize> = HashMap::from([(p.to_vec(), 0)]);
    let mut queue = VecDeque::from([p.to_vec()]);
    while let Some(cur) = queue.pop_front() {
        let d = dist[&cur];
        if cur == q {
            return Ok(d);
        }
        for from in 0..cur.len() {
            let mut rest = cur.clone();
            let v = rest.remove(from);
            for to in 0..cur.len() {
                if to == from {
                    continue;
                }
                let mut next = rest.clone();
                next.insert(to, v);
                if !dist.contains_key(&next) {
                    dist.insert(next.clone(), d + 1);
                    queue.push_back(next);
                }
            }
        }
    }
    unreachable!("every permutation of the same set is reachable by moves")
}
