//! Primal network simplex for balanced transportation problems.
//!
//! Nodes are the `m` sources, the `n` sinks and a root. Every node starts
//! attached to the root by an artificial arc priced high enough never to be
//! worth keeping. Entering arcs come from block pricing (the first most
//! negative reduced cost in a block wins), leaving arcs follow the strongly
//! feasible tree rule so degenerate pivots cannot cycle.

use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    /// Optimal cost.
    pub cost: f64,
    /// Dual objective from the final potentials.
    pub dual: f64,
    /// `(source, sink, mass)` for every positive transport flow.
    pub plan: Vec<(usize, usize, f64)>,
    /// Largest violation of reduced-cost optimality over transport arcs.
    pub dual_infeasibility: f64,
    /// Sum of absolute supply/demand residuals of the plan.
    pub primal_residual: f64,
    pub pivots: usize,
}

const TREE: u8 = 0;
const LOWER: u8 = 1;

struct Network {
    m: usize,
    n: usize,
    source: Vec<usize>,
    target: Vec<usize>,
    cost: Vec<f64>,
    flow: Vec<f64>,
    state: Vec<u8>,
    supply: Vec<f64>,
    // spanning tree
    parent: Vec<usize>,
    pred: Vec<usize>,
    depth: Vec<usize>,
    pi: Vec<f64>,
    adjacency: Vec<Vec<usize>>,
}

impl Network {
    fn root(&self) -> usize {
        self.m + self.n
    }

    /// Recomputes parents, depths and potentials from the set of tree arcs.
    fn rebuild_tree(&mut self) {
        let nodes = self.m + self.n + 1;
        for a in &mut self.adjacency {
            a.clear();
        }
        for (e, &s) in self.state.iter().enumerate() {
            if s == TREE {
                self.adjacency[self.source[e]].push(e);
                self.adjacency[self.target[e]].push(e);
            }
        }
        let root = self.root();
        let mut stack = vec![root];
        let mut seen = vec![false; nodes];
        seen[root] = true;
        self.parent[root] = usize::MAX;
        self.depth[root] = 0;
        self.pi[root] = 0.0;
        while let Some(u) = stack.pop() {
            for i in 0..self.adjacency[u].len() {
                let e = self.adjacency[u][i];
                let (s, t) = (self.source[e], self.target[e]);
                let v = if s == u { t } else { s };
                if seen[v] {
                    continue;
                }
                seen[v] = true;
                self.parent[v] = u;
                self.pred[v] = e;
                self.depth[v] = self.depth[u] + 1;
                // reduced cost c + pi[s] - pi[t] vanishes on tree arcs
                self.pi[v] = if s == u { self.pi[u] + self.cost[e] } else { self.pi[u] - self.cost[e] };
                stack.push(v);
            }
        }
    }

    #[inline]
    fn reduced_cost(&self, e: usize) -> f64 {
        self.cost[e] + self.pi[self.source[e]] - self.pi[self.target[e]]
    }

    fn find_entering(&self, cursor: &mut usize, block: usize, eps: f64) -> Option<usize> {
        let arcs = self.cost.len();
        let mut best = None;
        let mut best_rc = -eps;
        let mut scanned_in_block = 0;
        for step in 0..arcs {
            let e = (*cursor + step) % arcs;
            if self.state[e] == LOWER {
                let rc = self.reduced_cost(e);
                if rc < best_rc {
                    best_rc = rc;
                    best = Some(e);
                }
            }
            scanned_in_block += 1;
            if scanned_in_block == block {
                if let Some(b) = best {
                    *cursor = (e + 1) % arcs;
                    return Some(b);
                }
                scanned_in_block = 0;
            }
        }
        if best.is_some() {
            *cursor = 0;
        }
        best
    }

    fn pivot(&mut self, entering: usize) -> Result<()> {
        let first = self.source[entering];
        let second = self.target[entering];
        let (mut a, mut b) = (first, second);
        while a != b {
            if self.depth[a] >= self.depth[b] {
                a = self.parent[a];
            } else {
                b = self.parent[b];
            }
        }
        let join = a;

        // Flow moves first -> second along the entering arc, then from second
        // up to the join and down to first.
        let mut delta = f64::INFINITY;
        let mut leaving_node = usize::MAX;
        let mut u = first;
        while u != join {
            let e = self.pred[u];
            if self.source[e] == u && self.flow[e] < delta {
                delta = self.flow[e];
                leaving_node = u;
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != join {
            let e = self.pred[u];
            if self.target[e] == u && self.flow[e] <= delta {
                delta = self.flow[e];
                leaving_node = u;
            }
            u = self.parent[u];
        }
        if leaving_node == usize::MAX {
            return Err(Error::InvalidParameter("transport problem is unbounded".into()));
        }
        let delta = delta.max(0.0);
        let leaving = self.pred[leaving_node];

        self.flow[entering] += delta;
        let mut u = first;
        while u != join {
            let e = self.pred[u];
            if self.source[e] == u {
                self.flow[e] -= delta;
            } else {
                self.flow[e] += delta;
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != join {
            let e = self.pred[u];
            if self.target[e] == u {
                self.flow[e] -= delta;
            } else {
                self.flow[e] += delta;
            }
            u = self.parent[u];
        }
        self.flow[leaving] = 0.0;
        self.state[leaving] = LOWER;
        self.state[entering] = TREE;
        self.rebuild_tree();
        Ok(())
    }
}

/// Minimizes `sum c_ij f_ij` subject to row sums `supply` and column sums
/// `demand`. `cost` is row-major `m x n`, every entry nonnegative. Supplies
/// and demands must be positive with equal totals (up to rounding).
pub fn solve_transport(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportSolution> {
    let (m, n) = (supply.len(), demand.len());
    if cost.len() != m * n {
        return Err(Error::DimensionMismatch { expected: m * n, found: cost.len() });
    }
    if m == 0 || n == 0 {
        return Ok(TransportSolution {
            cost: 0.0,
            dual: 0.0,
            plan: Vec::new(),
            dual_infeasibility: 0.0,
            primal_residual: 0.0,
            pivots: 0,
        });
    }
    let max_cost = cost.iter().fold(0.0f64, |a, &c| a.max(c));
    let artificial = (max_cost + 1.0) * (m + n) as f64;
    let nodes = m + n + 1;
    let root = m + n;
    let arcs = m * n + m + n;

    let mut net = Network {
        m,
        n,
        source: Vec::with_capacity(arcs),
        target: Vec::with_capacity(arcs),
        cost: Vec::with_capacity(arcs),
        flow: vec![0.0; arcs],
        state: vec![LOWER; arcs],
        supply: Vec::with_capacity(nodes),
        parent: vec![0; nodes],
        pred: vec![0; nodes],
        depth: vec![0; nodes],
        pi: vec![0.0; nodes],
        adjacency: vec![Vec::new(); nodes],
    };
    for i in 0..m {
        for j in 0..n {
            net.source.push(i);
            net.target.push(m + j);
            net.cost.push(cost[i * n + j]);
        }
    }
    net.supply.extend_from_slice(supply);
    net.supply.extend(demand.iter().map(|d| -d));
    for u in 0..m + n {
        let e = m * n + u;
        if net.supply[u] >= 0.0 {
            net.source.push(u);
            net.target.push(root);
        } else {
            net.source.push(root);
            net.target.push(u);
        }
        net.cost.push(artificial);
        net.flow[e] = net.supply[u].abs();
        net.state[e] = TREE;
    }
    net.rebuild_tree();

    let block = ((arcs as f64).sqrt().ceil() as usize).max(10);
    let eps = 1e-11 * max_cost.max(1.0);
    let max_pivots = 1000 * (m + n) + 10_000;
    let mut cursor = 0;
    let mut pivots = 0;
    while let Some(e) = net.find_entering(&mut cursor, block, eps) {
        if pivots == max_pivots {
            return Err(Error::SimplexStalled(pivots));
        }
        net.pivot(e)?;
        pivots += 1;
    }

    let mut total = CompensatedSum::new();
    let mut plan = Vec::new();
    let mut row = vec![0.0; m];
    let mut col = vec![0.0; n];
    for e in 0..m * n {
        let f = net.flow[e];
        if f > 0.0 {
            let (i, j) = (e / n, e % n);
            total.add(f * net.cost[e]);
            plan.push((i, j, f));
            row[i] += f;
            col[j] += f;
        }
    }
    let mut dual = CompensatedSum::new();
    for u in 0..m + n {
        dual.add(-net.supply[u] * net.pi[u]);
    }
    let dual_infeasibility = (0..m * n).map(|e| (-net.reduced_cost(e)).max(0.0)).fold(0.0, f64::max);
    let primal_residual = row.iter().zip(supply).map(|(r, s)| (r - s).abs()).sum::<f64>()
        + col.iter().zip(demand).map(|(c, d)| (c - d).abs()).sum::<f64>();
    Ok(TransportSolution {
        cost: total.value(),
        dual: dual.value(),
        plan,
        dual_infeasibility,
        primal_residual,
        pivots,
    })
}
