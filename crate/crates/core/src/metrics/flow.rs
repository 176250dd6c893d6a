//! Maximum flow (Dinic) on small real-capacity networks.

use std::collections::VecDeque;

use crate::distributions::DiscreteLaw;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: f64,
}

/// Directed network with residual edges stored in pairs.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

const EPS: f64 = 1e-15;

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0.0 });
    }

    fn levels(&self, s: usize) -> Vec<Option<usize>> {
        let mut level = vec![None; self.adj.len()];
        level[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let Edge { to, cap } = self.edges[e];
                if cap > EPS && level[to].is_none() {
                    level[to] = Some(level[u].unwrap() + 1);
                    queue.push_back(to);
                }
            }
        }
        level
    }

    fn push(&mut self, u: usize, t: usize, limit: f64, level: &[Option<usize>], next: &mut [usize]) -> f64 {
        if u == t {
            return limit;
        }
        while next[u] < self.adj[u].len() {
            let e = self.adj[u][next[u]];
            let Edge { to, cap } = self.edges[e];
            if cap > EPS && level[to] == level[u].map(|l| l + 1) {
                let pushed = self.push(to, t, limit.min(cap), level, next);
                if pushed > 0.0 {
                    self.edges[e].cap -= pushed;
                    self.edges[e ^ 1].cap += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0.0
    }

    /// Value of a maximum `s`–`t` flow; consumes the capacities.
    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            let level = self.levels(s);
            if level[t].is_none() {
                return total;
            }
            let mut next = vec![0usize; self.adj.len()];
            loop {
                let pushed = self.push(s, t, f64::INFINITY, &level, &mut next);
                if pushed <= 0.0 {
                    break;
                }
                total += pushed;
            }
        }
    }
}

/// Maximum transportable mass between two laws along edges `|x − y| ≤ ε`.
pub fn band_max_flow(mu: &DiscreteLaw, nu: &DiscreteLaw, eps: f64) -> f64 {
    let (n, m) = (mu.len(), nu.len());
    let (source, sink) = (n + m, n + m + 1);
    let mut g = FlowNetwork::new(n + m + 2);
    for (i, &w) in mu.weights().iter().enumerate() {
        g.add_edge(source, i, w);
    }
    for (j, &w) in nu.weights().iter().enumerate() {
        g.add_edge(n + j, sink, w);
    }
    for (i, &x) in mu.atoms().iter().enumerate() {
        for (j, &y) in nu.atoms().iter().enumerate() {
            if (x - y).abs() <= eps {
                g.add_edge(i, n + j, f64::INFINITY);
            }
        }
    }
    g.max_flow(source, sink)
}
