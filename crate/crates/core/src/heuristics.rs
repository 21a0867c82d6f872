//! Backward shortest-path tree from the goal that supplies hop and cost
//! estimates to the search, grown on demand and repaired on invalidation.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, Key};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("node {0} is not reachable from the goal")]
pub struct Unreachable(pub usize);

/// Estimate attached to a settled node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Heuristic {
    pub n_reach: u32,
    pub c_reach: f64,
    pub version: u64,
}

/// Nodes touched by an invalidation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UpdateReport {
    /// Nodes whose `(n_reach, c_reach)` changed (including ones now unreachable).
    pub changed: Vec<usize>,
    /// Nodes that can no longer reach the goal.
    pub unreachable: Vec<usize>,
}

/// Frontier entry: candidate settle of `node` through the settled `via`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Entry {
    cost: Key,
    hops: u32,
    node: usize,
    via: usize,
    via_version: u64,
}

#[derive(Debug, Clone)]
pub struct HeuristicsTree {
    root: usize,
    succ: Vec<usize>,
    c_reach: Vec<f64>,
    n_reach: Vec<u32>,
    settled: Vec<bool>,
    version: Vec<u64>,
    children: Vec<Vec<usize>>,
    frontier: BinaryHeap<Reverse<Entry>>,
    invalid_nodes: Vec<bool>,
    invalid_edges: HashSet<(usize, usize)>,
    expansions: usize,
}

fn edge_key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

impl HeuristicsTree {
    /// Tree rooted at `goal` with no growth yet.
    pub fn rooted<G: Graph>(graph: &G, goal: usize) -> Self {
        let n = graph.node_count();
        let mut tree = HeuristicsTree {
            root: goal,
            succ: vec![NONE; n],
            c_reach: vec![f64::INFINITY; n],
            n_reach: vec![0; n],
            settled: vec![false; n],
            version: vec![0; n],
            children: vec![Vec::new(); n],
            frontier: BinaryHeap::new(),
            invalid_nodes: vec![false; n],
            invalid_edges: HashSet::new(),
            expansions: 0,
        };
        tree.settle(graph, goal, NONE, 0.0, 0);
        tree
    }

    /// Roots the tree at `goal` and grows it until `start` is settled.
    pub fn init<G: Graph>(graph: &G, goal: usize, start: usize) -> Result<Self, Unreachable> {
        let mut tree = Self::rooted(graph, goal);
        tree.grow_to(graph, start)?;
        Ok(tree)
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Number of nodes settled so far, counting re-settles.
    pub fn expansions(&self) -> usize {
        self.expansions
    }

    pub fn is_settled(&self, v: usize) -> bool {
        self.settled[v]
    }

    pub fn successor(&self, v: usize) -> Option<usize> {
        (self.settled[v] && self.succ[v] != NONE).then_some(self.succ[v])
    }

    pub fn settled_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.settled.len()).filter(|&v| self.settled[v])
    }

    pub fn is_node_invalid(&self, v: usize) -> bool {
        self.invalid_nodes[v]
    }

    pub fn is_edge_invalid(&self, u: usize, v: usize) -> bool {
        self.invalid_edges.contains(&edge_key(u, v))
    }

    pub fn invalid_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.invalid_edges.iter().copied()
    }

    /// Current estimate for a settled node.
    pub fn heuristic_of(&self, v: usize) -> Option<Heuristic> {
        self.settled[v].then(|| Heuristic { n_reach: self.n_reach[v], c_reach: self.c_reach[v], version: self.version[v] })
    }

    pub fn version(&self, v: usize) -> u64 {
        self.version[v]
    }

    fn settle<G: Graph>(&mut self, graph: &G, v: usize, via: usize, cost: f64, hops: u32) {
        self.settled[v] = true;
        self.succ[v] = via;
        self.c_reach[v] = cost;
        self.n_reach[v] = hops;
        if via != NONE {
            self.children[via].push(v);
        }
        self.expansions += 1;
        let version = self.version[v];
        let (invalid_nodes, invalid_edges, settled, frontier) =
            (&self.invalid_nodes, &self.invalid_edges, &self.settled, &mut self.frontier);
        let no_invalid_edges = invalid_edges.is_empty();
        graph.for_each_neighbor(v, |w, c| {
            if !settled[w] && !invalid_nodes[w] && (no_invalid_edges || !invalid_edges.contains(&edge_key(v, w))) {
                frontier.push(Reverse(Entry { cost: Key(cost + c), hops: hops + 1, node: w, via: v, via_version: version }));
            }
        });
    }

    fn entry_live(&self, e: &Entry) -> bool {
        !self.settled[e.node]
            && !self.invalid_nodes[e.node]
            && self.settled[e.via]
            && self.version[e.via] == e.via_version
            && !self.invalid_edges.contains(&edge_key(e.node, e.via))
    }

    /// Resumes the backward search until `v` is settled.
    pub fn grow_to<G: Graph>(&mut self, graph: &G, v: usize) -> Result<Heuristic, Unreachable> {
        while !self.settled[v] {
            if self.invalid_nodes[v] {
                return Err(Unreachable(v));
            }
            let Some(Reverse(e)) = self.frontier.pop() else {
                return Err(Unreachable(v));
            };
            if self.entry_live(&e) {
                self.settle(graph, e.node, e.via, e.cost.0, e.hops);
            }
        }
        Ok(self.heuristic_of(v).expect("settled"))
    }

    /// `heuristic_of`, growing the tree when `v` is not settled yet.
    pub fn lookup<G: Graph>(&mut self, graph: &G, v: usize) -> Result<Heuristic, Unreachable> {
        match self.heuristic_of(v) {
            Some(h) => Ok(h),
            None => self.grow_to(graph, v),
        }
    }

    /// Marks `v` invalid and repairs the tree.
    pub fn invalidate_node<G: Graph>(&mut self, graph: &G, v: usize) -> UpdateReport {
        if self.invalid_nodes[v] {
            return UpdateReport::default();
        }
        self.invalid_nodes[v] = true;
        if !self.settled[v] {
            return UpdateReport::default();
        }
        self.repair(graph, v)
    }

    /// Marks edge `u - v` invalid and repairs the tree if it was a tree edge.
    pub fn invalidate_edge<G: Graph>(&mut self, graph: &G, u: usize, v: usize) -> UpdateReport {
        if !self.invalid_edges.insert(edge_key(u, v)) {
            return UpdateReport::default();
        }
        let child = if self.settled[u] && self.succ[u] == v {
            u
        } else if self.settled[v] && self.succ[v] == u {
            v
        } else {
            return UpdateReport::default();
        };
        self.repair(graph, child)
    }

    /// Unsettles the subtree under `top`, reconnects its nodes to the
    /// remaining tree and regrows them in cost order.
    fn repair<G: Graph>(&mut self, graph: &G, top: usize) -> UpdateReport {
        let parent = self.succ[top];
        if parent != NONE {
            self.children[parent].retain(|&c| c != top);
        }
        let mut removed = Vec::new();
        let mut stack = vec![top];
        while let Some(x) = stack.pop() {
            removed.push(x);
            stack.append(&mut self.children[x]);
        }
        let before: Vec<(u32, f64)> = removed.iter().map(|&x| (self.n_reach[x], self.c_reach[x])).collect();
        for &x in &removed {
            self.settled[x] = false;
            self.succ[x] = NONE;
            self.c_reach[x] = f64::INFINITY;
            self.version[x] += 1;
        }
        // Every surviving settled neighbour offers a route again.
        for &x in &removed {
            if self.invalid_nodes[x] {
                continue;
            }
            let mut offers = Vec::new();
            graph.for_each_neighbor(x, |s, c| {
                if self.settled[s] && !self.invalid_edges.contains(&edge_key(x, s)) {
                    offers.push(Entry {
                        cost: Key(self.c_reach[s] + c),
                        hops: self.n_reach[s] + 1,
                        node: x,
                        via: s,
                        via_version: self.version[s],
                    });
                }
            });
            self.frontier.extend(offers.into_iter().map(Reverse));
        }
        let mut report = UpdateReport::default();
        for (i, &x) in removed.iter().enumerate() {
            match self.grow_to(graph, x) {
                Ok(h) => {
                    if (h.n_reach, h.c_reach) != before[i] {
                        report.changed.push(x);
                    }
                }
                Err(_) => {
                    report.changed.push(x);
                    if !self.invalid_nodes[x] {
                        report.unreachable.push(x);
                    }
                }
            }
        }
        report
    }

    /// Recomputes `(n_reach, c_reach)` of a settled node by walking to the root.
    pub fn walk(&self, graph: &impl Graph, v: usize) -> Option<(u32, f64)> {
        if !self.settled[v] {
            return None;
        }
        let mut chain = vec![v];
        let mut x = v;
        while self.succ[x] != NONE {
            x = self.succ[x];
            chain.push(x);
            if chain.len() > self.settled.len() {
                return None;
            }
        }
        if x != self.root {
            return None;
        }
        let mut cost = 0.0;
        for w in chain.windows(2).rev() {
            cost += graph.edge_cost(w[0], w[1])?;
        }
        Some(((chain.len() - 1) as u32, cost))
    }
}
