//! Integral min-cost flow with lower bounds and node balances.
//!
//! Successive shortest paths with Dijkstra on reduced costs. All arc costs
//! must be nonnegative, so the initial potentials can be zero. Ties in
//! Dijkstra are broken by node index and arcs are scanned in insertion
//! order, which makes the returned flow a deterministic function of how the
//! network was built.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Reduced costs above `-COST_EPS` are treated as nonnegative.
const COST_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    residual: i64,
    cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ArcId(usize);

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
    lower: Vec<i64>,
    balance: Vec<i64>,
}

#[derive(PartialEq)]
struct State {
    dist: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        Self {
            arcs: Vec::new(),
            adj: vec![Vec::new(); nodes],
            lower: Vec::new(),
            balance: vec![0; nodes],
        }
    }

    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.balance.push(0);
        self.adj.len() - 1
    }

    /// Arc `u -> v` carrying between `lower` and `upper` units at `cost` each.
    pub fn add_arc(&mut self, u: usize, v: usize, lower: i64, upper: i64, cost: f64) -> ArcId {
        debug_assert!(0 <= lower && lower <= upper);
        debug_assert!(cost >= 0.0 && cost.is_finite(), "arc cost {cost}");
        let id = self.arcs.len();
        self.arcs.push(Arc {
            to: v,
            residual: upper - lower,
            cost,
        });
        self.arcs.push(Arc {
            to: u,
            residual: 0,
            cost: -cost,
        });
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        self.lower.push(lower);
        self.balance[u] -= lower;
        self.balance[v] += lower;
        ArcId(id)
    }

    /// Node `v` must emit `amount` more units than it absorbs (negative: absorb).
    pub fn add_supply(&mut self, v: usize, amount: i64) {
        self.balance[v] += amount;
    }

    /// Units on an arc after [`FlowNetwork::solve`], lower bound included.
    pub fn flow(&self, arc: ArcId) -> i64 {
        self.lower[arc.0 / 2] + self.arcs[arc.0 + 1].residual
    }

    /// Finds a minimum-cost flow meeting every balance and bound.
    /// Returns the total cost, or `None` when no feasible flow exists.
    pub fn solve(&mut self) -> Option<f64> {
        let n = self.adj.len();
        let source = self.add_node();
        let sink = self.add_node();
        let mut required = 0i64;
        for v in 0..n {
            let b = self.balance[v];
            if b > 0 {
                self.push_raw(source, v, b);
                required += b;
            } else if b < 0 {
                self.push_raw(v, sink, -b);
            }
        }

        let total_nodes = self.adj.len();
        let mut potential = vec![0.0f64; total_nodes];
        let mut dist = vec![f64::INFINITY; total_nodes];
        let mut parent = vec![usize::MAX; total_nodes];
        let mut sent = 0i64;
        while sent < required {
            dist.fill(f64::INFINITY);
            parent.fill(usize::MAX);
            dist[source] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(State {
                dist: 0.0,
                node: source,
            });
            while let Some(State { dist: d, node: u }) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &a in &self.adj[u] {
                    let arc = &self.arcs[a];
                    if arc.residual <= 0 {
                        continue;
                    }
                    let reduced = (arc.cost + potential[u] - potential[arc.to]).max(0.0);
                    debug_assert!(arc.cost + potential[u] - potential[arc.to] > -1e-6);
                    let nd = d + reduced;
                    if nd + COST_EPS < dist[arc.to] {
                        dist[arc.to] = nd;
                        parent[arc.to] = a;
                        heap.push(State { dist: nd, node: arc.to });
                    }
                }
            }
            if !dist[sink].is_finite() {
                break;
            }
            let cap_dist = dist[sink];
            for v in 0..total_nodes {
                potential[v] += dist[v].min(cap_dist);
            }
            let mut push = required - sent;
            let mut v = sink;
            while v != source {
                let a = parent[v];
                push = push.min(self.arcs[a].residual);
                v = self.arcs[a ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let a = parent[v];
                self.arcs[a].residual -= push;
                self.arcs[a ^ 1].residual += push;
                v = self.arcs[a ^ 1].to;
            }
            sent += push;
        }
        if sent < required {
            return None;
        }
        let mut total = 0.0;
        for (i, &lo) in self.lower.iter().enumerate() {
            let units = lo + self.arcs[2 * i + 1].residual;
            total += units as f64 * self.arcs[2 * i].cost;
        }
        Some(total)
    }

    fn push_raw(&mut self, u: usize, v: usize, cap: i64) {
        let id = self.arcs.len();
        self.arcs.push(Arc {
            to: v,
            residual: cap,
            cost: 0.0,
        });
        self.arcs.push(Arc {
            to: u,
            residual: 0,
            cost: 0.0,
        });
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        // keep `lower` aligned with arc pairs; helper arcs report zero cost
        self.lower.push(0);
    }
}
