//! Graph views used by the planners, and a dense-evaluation shortest-path oracle.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::kinematics::{min_clearance_unchecked, ArmModel, CircleObstacle, JointConfig};
use crate::roadmap::{Roadmap, RoadmapError};
use crate::safezone::check_edge_dense_skipping;

/// Undirected weighted graph with a configuration per node.
pub trait Graph {
    fn node_count(&self) -> usize;
    fn config(&self, v: usize) -> &JointConfig;
    fn for_each_neighbor<F: FnMut(usize, f64)>(&self, v: usize, f: F);

    fn neighbors(&self, v: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        self.for_each_neighbor(v, |w, c| out.push((w, c)));
        out
    }

    fn edge_cost(&self, u: usize, v: usize) -> Option<f64> {
        let mut found = None;
        self.for_each_neighbor(u, |w, c| {
            if w == v && found.is_none() {
                found = Some(c);
            }
        });
        found
    }
}

impl Graph for Roadmap {
    fn node_count(&self) -> usize {
        Roadmap::node_count(self)
    }

    fn config(&self, v: usize) -> &JointConfig {
        self.node(v)
    }

    fn for_each_neighbor<F: FnMut(usize, f64)>(&self, v: usize, mut f: F) {
        for &(w, c) in Roadmap::neighbors(self, v) {
            f(w, c);
        }
    }
}

/// Roadmap plus temporary start and goal nodes for one query.
///
/// The start is node `n` and the goal node `n + 1` (or `n` again when the
/// two coincide), where `n` is the roadmap size. Query nodes never connect
/// to each other directly.
#[derive(Debug, Clone)]
pub struct QueryGraph<'a> {
    roadmap: &'a Roadmap,
    extra: Vec<JointConfig>,
    extra_adj: Vec<Vec<(usize, f64)>>,
    /// `(roadmap node, query node, cost)`, sorted by roadmap node.
    attached: Vec<(usize, usize, f64)>,
    start: usize,
    goal: usize,
}

impl<'a> QueryGraph<'a> {
    /// Attaches `start` and `goal` to their `k` nearest statically valid nodes.
    pub fn new(
        roadmap: &'a Roadmap,
        model: &ArmModel,
        static_obstacles: &[CircleObstacle],
        start: &JointConfig,
        goal: &JointConfig,
        k: usize,
    ) -> Result<Self, RoadmapError> {
        let n = roadmap.node_count();
        let mut graph = QueryGraph {
            roadmap,
            extra: Vec::new(),
            extra_adj: Vec::new(),
            attached: Vec::new(),
            start: n,
            goal: n,
        };
        graph.attach(roadmap.connect_query_node(model, static_obstacles, start, k)?, start.clone());
        if goal != start {
            graph.attach(roadmap.connect_query_node(model, static_obstacles, goal, k)?, goal.clone());
            graph.goal = n + 1;
        }
        Ok(graph)
    }

    fn attach(&mut self, edges: Vec<(usize, f64)>, q: JointConfig) {
        let id = self.roadmap.node_count() + self.extra.len();
        self.attached.extend(edges.iter().map(|&(v, c)| (v, id, c)));
        self.attached.sort_by_key(|&(v, w, _)| (v, w));
        self.extra.push(q);
        self.extra_adj.push(edges);
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn goal(&self) -> usize {
        self.goal
    }

    pub fn roadmap(&self) -> &Roadmap {
        self.roadmap
    }

    /// True for the temporary start/goal nodes.
    pub fn is_query_node(&self, v: usize) -> bool {
        v >= self.roadmap.node_count()
    }

    /// Edge-cost metric of the underlying roadmap.
    pub fn cost(&self, a: &JointConfig, b: &JointConfig) -> f64 {
        self.roadmap.cost(a, b)
    }
}

impl Graph for QueryGraph<'_> {
    fn node_count(&self) -> usize {
        self.roadmap.node_count() + self.extra.len()
    }

    fn config(&self, v: usize) -> &JointConfig {
        let n = self.roadmap.node_count();
        if v < n {
            self.roadmap.node(v)
        } else {
            &self.extra[v - n]
        }
    }

    fn for_each_neighbor<F: FnMut(usize, f64)>(&self, v: usize, mut f: F) {
        let n = self.roadmap.node_count();
        if v >= n {
            for &(w, c) in &self.extra_adj[v - n] {
                f(w, c);
            }
            return;
        }
        for &(w, c) in self.roadmap.neighbors(v) {
            f(w, c);
        }
        let first = self.attached.partition_point(|&(u, _, _)| u < v);
        for &(_, w, c) in self.attached[first..].iter().take_while(|&&(u, _, _)| u == v) {
            f(w, c);
        }
    }
}

/// Ground truth for one scene: nodes are valid when clear of the dynamic
/// obstacles, edges when every sample at `resolution` is clear. Verdicts
/// are evaluated lazily and memoized.
pub struct DenseOracle<'g, G: Graph> {
    graph: &'g G,
    model: &'g ArmModel,
    obstacles: &'g [CircleObstacle],
    resolution: f64,
    nodes: Vec<Option<bool>>,
    edges: HashMap<(usize, usize), bool>,
    checks: usize,
}

impl<'g, G: Graph> DenseOracle<'g, G> {
    pub fn new(graph: &'g G, model: &'g ArmModel, obstacles: &'g [CircleObstacle], resolution: f64) -> Self {
        DenseOracle {
            graph,
            model,
            obstacles,
            resolution,
            nodes: vec![None; graph.node_count()],
            edges: HashMap::new(),
            checks: 0,
        }
    }

    /// Exact point checks spent so far.
    pub fn checks(&self) -> usize {
        self.checks
    }

    pub fn node_valid(&mut self, v: usize) -> bool {
        if let Some(ok) = self.nodes[v] {
            return ok;
        }
        let mut joints = Vec::new();
        self.checks += 1;
        let ok = min_clearance_unchecked(self.model, self.graph.config(v).as_slice(), self.obstacles, &mut joints) > 0.0;
        self.nodes[v] = Some(ok);
        ok
    }

    pub fn edge_valid(&mut self, u: usize, v: usize) -> bool {
        if !self.node_valid(u) || !self.node_valid(v) {
            return false;
        }
        let key = (u.min(v), u.max(v));
        if let Some(&ok) = self.edges.get(&key) {
            return ok;
        }
        let r = check_edge_dense_skipping(self.model, self.graph.config(u), self.graph.config(v), self.obstacles, self.resolution);
        self.checks += r.checks;
        self.edges.insert(key, r.is_valid());
        r.is_valid()
    }

    /// Dijkstra from `source` over valid nodes and edges; settles nodes up
    /// to distance `limit` (inclusive) or until `target` is settled.
    /// Unsettled nodes report `+inf`.
    pub fn distances(&mut self, source: usize, limit: f64, target: Option<usize>) -> OracleDistances {
        let n = self.graph.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        if self.node_valid(source) {
            dist[source] = 0.0;
            heap.push(Reverse((Key(0.0), source)));
        }
        let mut settled_dist = vec![f64::INFINITY; n];
        while let Some(Reverse((Key(d), u))) = heap.pop() {
            if done[u] {
                continue;
            }
            if d > limit {
                break;
            }
            done[u] = true;
            settled_dist[u] = d;
            if Some(u) == target {
                break;
            }
            for (w, c) in self.graph.neighbors(u) {
                if done[w] || d + c >= dist[w] {
                    continue;
                }
                if self.edge_valid(u, w) {
                    dist[w] = d + c;
                    pred[w] = u;
                    heap.push(Reverse((Key(d + c), w)));
                }
            }
        }
        OracleDistances { dist: settled_dist, pred }
    }

    /// Shortest valid path `source -> target` as (cost, node ids).
    pub fn shortest_path(&mut self, source: usize, target: usize) -> Option<(f64, Vec<usize>)> {
        let d = self.distances(source, f64::INFINITY, Some(target));
        d.path_to(target).map(|p| (d.dist[target], p))
    }
}

pub struct OracleDistances {
    /// Exact distance for settled nodes, `+inf` otherwise.
    pub dist: Vec<f64>,
    pred: Vec<usize>,
}

impl OracleDistances {
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut path = vec![target];
        let mut v = target;
        while self.pred[v] != usize::MAX {
            v = self.pred[v];
            path.push(v);
        }
        path.reverse();
        Some(path)
    }
}

/// Total order on non-NaN floats for heap keys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Key(pub f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Plain Dijkstra from `source` over `graph`, ignoring nodes and edges
/// rejected by the filters.
pub fn dijkstra<G: Graph>(
    graph: &G,
    source: usize,
    mut node_ok: impl FnMut(usize) -> bool,
    mut edge_ok: impl FnMut(usize, usize) -> bool,
) -> Vec<f64> {
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    if !node_ok(source) {
        return dist;
    }
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((Key(0.0), source)));
    while let Some(Reverse((Key(d), u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        graph.for_each_neighbor(u, |w, c| {
            if !done[w] && d + c < dist[w] && node_ok(w) && edge_ok(u, w) {
                dist[w] = d + c;
                heap.push(Reverse((Key(d + c), w)));
            }
        });
    }
    dist
}
