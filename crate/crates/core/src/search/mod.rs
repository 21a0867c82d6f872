//! Heuristics-informed lazy search over a query graph.
//!
//! The search grows a tree from the start by popping edge estimates from a
//! priority queue. Each popped edge has its child node checked exactly and
//! the edge certified with safe zones; failures feed back into the
//! heuristics tree, whose repaired estimates re-order the queue through
//! per-node version stamps. A found path is re-validated densely and
//! repaired with bridge configurations where needed.

mod baseline;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, Key, QueryGraph};
use crate::heuristics::HeuristicsTree;
use crate::kinematics::{ArmModel, CircleObstacle, JointConfig};
use crate::roadmap::{Roadmap, RoadmapError};
use crate::safezone::{
    check_edge_fuzzy_with, correct_path, zone_with_scratch, CorrectionOptions, KnownEndpoint, SafeZone, ZoneOptions,
    ZoneScratch,
};

pub use baseline::{plan_full, plan_lazy, BaselineOptions};

const NONE: usize = usize::MAX;

/// Primary key of the edge queue.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueueOrder {
    /// Estimated total cost, then hop estimate.
    #[default]
    CostFirst,
    /// Hop estimate, then estimated total cost.
    HopsFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    pub max_iterations: Option<usize>,
    pub max_time_ms: Option<f64>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_iterations: Some(20_000), max_time_ms: Some(100.0) }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget { max_iterations: None, max_time_ms: None }
    }

    pub(crate) fn exceeded(&self, iterations: usize, started: Instant) -> bool {
        self.max_iterations.is_some_and(|m| iterations > m)
            || self.max_time_ms.is_some_and(|m| started.elapsed().as_secs_f64() * 1e3 > m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerOptions {
    pub zone: ZoneOptions,
    pub correction: CorrectionOptions,
    pub queue_order: QueueOrder,
    pub budget: Budget,
    /// Roadmap nodes each query configuration connects to.
    pub attach_neighbors: usize,
    /// Keep a log of queue events in the result.
    pub record_events: bool,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        PlannerOptions {
            zone: ZoneOptions::default(),
            correction: CorrectionOptions::default(),
            queue_order: QueueOrder::default(),
            budget: Budget::default(),
            attach_neighbors: 10,
            record_events: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    Solved,
    Unreachable,
    BudgetExhausted,
}

/// Counters of one query. Everything except the timings is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub wall_ms: f64,
    pub attach_ms: f64,
    pub iterations: usize,
    pub stale_repushes: usize,
    pub closed_skips: usize,
    pub fuzzy_edge_checks: usize,
    /// Exact point checks made while searching.
    pub exact_point_checks: usize,
    /// Exact point checks made while re-validating the final path.
    pub validation_checks: usize,
    pub heuristic_updates: usize,
    pub heuristic_expansions: usize,
    /// Bridge configurations inserted into the final path.
    pub corrections: usize,
    pub correction_failures: usize,
}

impl SearchStats {
    /// The counters alone, for reproducibility comparisons.
    pub fn counters(&self) -> [usize; 10] {
        [
            self.iterations,
            self.stale_repushes,
            self.closed_skips,
            self.fuzzy_edge_checks,
            self.exact_point_checks,
            self.validation_checks,
            self.heuristic_updates,
            self.heuristic_expansions,
            self.corrections,
            self.correction_failures,
        ]
    }
}

/// Queue activity, recorded when `PlannerOptions::record_events` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SearchEvent {
    Pop { parent: usize, child: usize, pushed_version: u64, current_version: u64 },
    Repush { parent: usize, child: usize, version: u64 },
    SkipClosed { child: usize },
    NodeInvalid { node: usize },
    EdgeInvalid { parent: usize, child: usize },
    Expand { node: usize },
    Restart { failed_edge: (usize, usize) },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub status: PlanStatus,
    /// Configurations from start to goal, bridges included.
    pub path: Vec<JointConfig>,
    /// Query-graph node ids of the path before correction.
    pub node_path: Vec<usize>,
    /// Indices into `path` of bridge configurations.
    pub bridges: Vec<usize>,
    pub cost: Option<f64>,
    pub stats: SearchStats,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<SearchEvent>,
}

impl PlanResult {
    pub fn is_solved(&self) -> bool {
        self.status == PlanStatus::Solved
    }

    pub(crate) fn unsolved(status: PlanStatus, stats: SearchStats) -> Self {
        PlanResult { status, path: Vec::new(), node_path: Vec::new(), bridges: Vec::new(), cost: None, stats, events: Vec::new() }
    }
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("start configuration is in collision")]
    StartInCollision,
    #[error("goal configuration is in collision")]
    GoalInCollision,
    #[error(transparent)]
    Roadmap(#[from] RoadmapError),
}

/// Edge estimate in the queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeEstimate {
    pub parent: usize,
    pub child: usize,
    pub n_reach: u32,
    /// `c_come(parent) + edge cost + c_reach(child)`.
    pub est_cost: f64,
    pub child_version: u64,
}

impl EdgeEstimate {
    pub(crate) fn key(&self, order: QueueOrder) -> (Key, Key, usize, usize) {
        let (a, b) = match order {
            QueueOrder::CostFirst => (self.est_cost, self.n_reach as f64),
            QueueOrder::HopsFirst => (self.n_reach as f64, self.est_cost),
        };
        (Key(a), Key(b), self.parent, self.child)
    }
}

/// Min-queue of edge estimates under a fixed order.
pub struct EdgeQueue {
    order: QueueOrder,
    heap: BinaryHeap<Reverse<((Key, Key, usize, usize), u64, u32)>>,
}

impl EdgeQueue {
    pub fn new(order: QueueOrder) -> Self {
        EdgeQueue { order, heap: BinaryHeap::new() }
    }

    pub fn push(&mut self, e: EdgeEstimate) {
        // The estimated cost is recoverable from the key for either order.
        self.heap.push(Reverse((e.key(self.order), e.child_version, e.n_reach)));
    }

    pub fn pop(&mut self) -> Option<EdgeEstimate> {
        let Reverse(((a, b, parent, child), child_version, n_reach)) = self.heap.pop()?;
        let est_cost = match self.order {
            QueueOrder::CostFirst => a.0,
            QueueOrder::HopsFirst => b.0,
        };
        Some(EdgeEstimate { parent, child, n_reach, est_cost, child_version })
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn clear(&mut self) {
        self.heap.clear();
    }
}

/// Everything a finished query leaves behind.
pub struct SearchOutcome {
    pub result: PlanResult,
    /// Final heuristics tree; absent when the query ended before building it.
    pub tree: Option<HeuristicsTree>,
}

enum NodeState {
    Unknown,
    Valid(SafeZone),
    Invalid,
}

/// Attaches `start` and `goal` to the roadmap and plans between them.
#[allow(clippy::too_many_arguments)]
pub fn plan_query(
    roadmap: &Roadmap,
    model: &ArmModel,
    static_obstacles: &[CircleObstacle],
    dynamic_obstacles: &[CircleObstacle],
    start: &JointConfig,
    goal: &JointConfig,
    opts: &PlannerOptions,
) -> Result<PlanResult, PlanError> {
    let t0 = Instant::now();
    let query = QueryGraph::new(roadmap, model, static_obstacles, start, goal, opts.attach_neighbors)?;
    let attach_ms = t0.elapsed().as_secs_f64() * 1e3;
    let mut result = plan(&query, model, static_obstacles, dynamic_obstacles, opts)?;
    result.stats.attach_ms = attach_ms;
    result.stats.wall_ms += attach_ms;
    Ok(result)
}

/// Plans on an attached query graph. The roadmap is trusted against the
/// static obstacles; those are only used when repairing the final path.
pub fn plan(
    query: &QueryGraph<'_>,
    model: &ArmModel,
    static_obstacles: &[CircleObstacle],
    dynamic_obstacles: &[CircleObstacle],
    opts: &PlannerOptions,
) -> Result<PlanResult, PlanError> {
    plan_with_tree(query, model, static_obstacles, dynamic_obstacles, opts).map(|o| o.result)
}

/// As [`plan`], also returning the final heuristics tree.
pub fn plan_with_tree(
    query: &QueryGraph<'_>,
    model: &ArmModel,
    static_obstacles: &[CircleObstacle],
    dynamic_obstacles: &[CircleObstacle],
    opts: &PlannerOptions,
) -> Result<SearchOutcome, PlanError> {
    Search::new(query, model, static_obstacles, dynamic_obstacles, opts).run()
}

struct Search<'q, 'r> {
    graph: &'q QueryGraph<'r>,
    model: &'q ArmModel,
    static_obstacles: &'q [CircleObstacle],
    obstacles: &'q [CircleObstacle],
    opts: &'q PlannerOptions,
    started: Instant,
    stats: SearchStats,
    events: Vec<SearchEvent>,
    nodes: Vec<NodeState>,
    edges: HashMap<(usize, usize), bool>,
    scratch: ZoneScratch,
    closed: Vec<bool>,
    c_come: Vec<f64>,
    pred: Vec<usize>,
    queue: EdgeQueue,
}

impl<'q, 'r> Search<'q, 'r> {
    fn new(
        graph: &'q QueryGraph<'r>,
        model: &'q ArmModel,
        static_obstacles: &'q [CircleObstacle],
        obstacles: &'q [CircleObstacle],
        opts: &'q PlannerOptions,
    ) -> Self {
        let n = graph.node_count();
        Search {
            graph,
            model,
            static_obstacles,
            obstacles,
            opts,
            started: Instant::now(),
            stats: SearchStats::default(),
            events: Vec::new(),
            nodes: (0..n).map(|_| NodeState::Unknown).collect(),
            edges: HashMap::new(),
            scratch: ZoneScratch::default(),
            closed: vec![false; n],
            c_come: vec![f64::INFINITY; n],
            pred: vec![NONE; n],
            queue: EdgeQueue::new(opts.queue_order),
        }
    }

    fn log(&mut self, e: SearchEvent) {
        if self.opts.record_events {
            self.events.push(e);
        }
    }

    fn node_valid(&mut self, v: usize) -> bool {
        if let NodeState::Unknown = self.nodes[v] {
            self.stats.exact_point_checks += 1;
            let q = self.graph.config(v);
            self.nodes[v] = match zone_with_scratch(self.model, q, self.obstacles, &self.opts.zone, &mut self.scratch) {
                Ok(z) => NodeState::Valid(z),
                Err(_) => NodeState::Invalid,
            };
        }
        matches!(self.nodes[v], NodeState::Valid(_))
    }

    fn edge_valid(&mut self, u: usize, v: usize) -> bool {
        let key = (u.min(v), u.max(v));
        if let Some(&ok) = self.edges.get(&key) {
            return ok;
        }
        let (NodeState::Valid(za), NodeState::Valid(zb)) = (&self.nodes[u], &self.nodes[v]) else {
            unreachable!("edge endpoints are validated first");
        };
        let cert = check_edge_fuzzy_with(
            self.model,
            self.graph.config(u),
            self.graph.config(v),
            self.obstacles,
            &self.opts.zone,
            KnownEndpoint::Zone(za),
            KnownEndpoint::Zone(zb),
        );
        self.stats.fuzzy_edge_checks += 1;
        self.stats.exact_point_checks += cert.exact_checks;
        self.edges.insert(key, cert.is_valid());
        cert.is_valid()
    }

    fn finish(mut self, status: PlanStatus, tree: Option<HeuristicsTree>) -> Result<SearchOutcome, PlanError> {
        if let Some(t) = &tree {
            self.stats.heuristic_expansions = t.expansions();
        }
        self.stats.wall_ms = self.started.elapsed().as_secs_f64() * 1e3;
        let mut result = PlanResult::unsolved(status, self.stats);
        result.events = self.events;
        Ok(SearchOutcome { result, tree })
    }

    fn expand(&mut self, tree: &mut HeuristicsTree, v: usize) {
        self.log(SearchEvent::Expand { node: v });
        for (w, c) in self.graph.neighbors(v) {
            if self.closed[w] || tree.is_edge_invalid(v, w) || self.edges.get(&(v.min(w), v.max(w))) == Some(&false) {
                continue;
            }
            match tree.lookup(self.graph, w) {
                Ok(h) => self.queue.push(EdgeEstimate {
                    parent: v,
                    child: w,
                    n_reach: h.n_reach,
                    est_cost: self.c_come[v] + c + h.c_reach,
                    child_version: h.version,
                }),
                Err(_) => self.closed[w] = true,
            }
        }
    }

    fn reset_tree_search(&mut self, tree: &mut HeuristicsTree, start: usize) {
        self.closed.iter_mut().for_each(|c| *c = false);
        self.c_come.iter_mut().for_each(|c| *c = f64::INFINITY);
        self.pred.iter_mut().for_each(|p| *p = NONE);
        self.queue.clear();
        for v in 0..self.closed.len() {
            if tree.is_node_invalid(v) {
                self.closed[v] = true;
            }
        }
        self.closed[start] = true;
        self.c_come[start] = 0.0;
        self.expand(tree, start);
    }

    fn run(mut self) -> Result<SearchOutcome, PlanError> {
        let (start, goal) = (self.graph.start(), self.graph.goal());
        if !self.node_valid(start) {
            return Err(PlanError::StartInCollision);
        }
        if !self.node_valid(goal) {
            return Err(PlanError::GoalInCollision);
        }
        if start == goal {
            self.stats.wall_ms = self.started.elapsed().as_secs_f64() * 1e3;
            let result = PlanResult {
                status: PlanStatus::Solved,
                path: vec![self.graph.config(start).clone()],
                node_path: vec![start],
                bridges: Vec::new(),
                cost: Some(0.0),
                stats: self.stats,
                events: self.events,
            };
            return Ok(SearchOutcome { result, tree: None });
        }
        let graph = self.graph;
        let mut tree = HeuristicsTree::rooted(graph, goal);
        if tree.grow_to(graph, start).is_err() {
            return self.finish(PlanStatus::Unreachable, Some(tree));
        }
        self.reset_tree_search(&mut tree, start);

        while let Some(e) = self.queue.pop() {
            self.stats.iterations += 1;
            if self.opts.budget.exceeded(self.stats.iterations, self.started) {
                return self.finish(PlanStatus::BudgetExhausted, Some(tree));
            }
            let (parent, child) = (e.parent, e.child);
            let current = tree.version(child);
            self.log(SearchEvent::Pop { parent, child, pushed_version: e.child_version, current_version: current });
            if self.closed[child] {
                self.stats.closed_skips += 1;
                self.log(SearchEvent::SkipClosed { child });
                continue;
            }
            if e.child_version != current || !tree.is_settled(child) {
                self.stats.stale_repushes += 1;
                if tree.is_edge_invalid(parent, child) {
                    continue;
                }
                match tree.lookup(graph, child) {
                    Ok(h) => {
                        let cost = graph.edge_cost(parent, child).expect("edge exists");
                        self.queue.push(EdgeEstimate {
                            parent,
                            child,
                            n_reach: h.n_reach,
                            est_cost: self.c_come[parent] + cost + h.c_reach,
                            child_version: h.version,
                        });
                        self.log(SearchEvent::Repush { parent, child, version: h.version });
                    }
                    Err(_) => self.closed[child] = true,
                }
                continue;
            }
            if !self.node_valid(child) {
                self.closed[child] = true;
                self.log(SearchEvent::NodeInvalid { node: child });
                self.stats.heuristic_updates += 1;
                let report = tree.invalidate_node(graph, child);
                self.close_all(&report.unreachable);
                if !tree.is_settled(start) {
                    return self.finish(PlanStatus::Unreachable, Some(tree));
                }
                continue;
            }
            if tree.is_edge_invalid(parent, child) {
                continue;
            }
            if !self.edge_valid(parent, child) {
                self.log(SearchEvent::EdgeInvalid { parent, child });
                self.stats.heuristic_updates += 1;
                let report = tree.invalidate_edge(graph, parent, child);
                self.close_all(&report.unreachable);
                if !tree.is_settled(start) {
                    return self.finish(PlanStatus::Unreachable, Some(tree));
                }
                continue;
            }
            let cost = graph.edge_cost(parent, child).expect("edge exists");
            self.pred[child] = parent;
            self.c_come[child] = self.c_come[parent] + cost;
            self.closed[child] = true;
            if child != goal {
                self.expand(&mut tree, child);
                continue;
            }
            let mut ids = vec![goal];
            while *ids.last().unwrap() != start {
                ids.push(self.pred[*ids.last().unwrap()]);
            }
            ids.reverse();
            let configs: Vec<JointConfig> = ids.iter().map(|&v| graph.config(v).clone()).collect();
            let all: Vec<CircleObstacle> = self.static_obstacles.iter().chain(self.obstacles).copied().collect();
            match correct_path(self.model, &configs, &all, &self.opts.correction) {
                Ok(fixed) => {
                    self.stats.validation_checks += fixed.checks;
                    self.stats.corrections += fixed.bridges.len();
                    let cost = fixed.path.windows(2).map(|w| graph.cost(&w[0], &w[1])).sum();
                    let mut outcome = self.finish(PlanStatus::Solved, Some(tree))?;
                    let r = &mut outcome.result;
                    r.path = fixed.path;
                    r.bridges = fixed.bridges;
                    r.node_path = ids;
                    r.cost = Some(cost);
                    return Ok(outcome);
                }
                Err(failure) => {
                    self.stats.validation_checks += failure.checks;
                    self.stats.correction_failures += 1;
                    let (u, v) = (ids[failure.edge_index], ids[failure.edge_index + 1]);
                    self.log(SearchEvent::Restart { failed_edge: (u, v) });
                    self.edges.insert((u.min(v), u.max(v)), false);
                    self.stats.heuristic_updates += 1;
                    tree.invalidate_edge(graph, u, v);
                    if !tree.is_settled(start) {
                        return self.finish(PlanStatus::Unreachable, Some(tree));
                    }
                    self.reset_tree_search(&mut tree, start);
                }
            }
        }
        self.finish(PlanStatus::Unreachable, Some(tree))
    }

    fn close_all(&mut self, nodes: &[usize]) {
        for &v in nodes {
            self.closed[v] = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::dijkstra;
    use crate::roadmap::RoadmapParams;
    use crate::safezone::check_edge_dense;

    #[test]
    fn hops_first_pops_fewer_hops_first() {
        let mut q = EdgeQueue::new(QueueOrder::HopsFirst);
        q.push(EdgeEstimate { parent: 0, child: 1, n_reach: 2, est_cost: 0.1, child_version: 0 });
        q.push(EdgeEstimate { parent: 0, child: 2, n_reach: 1, est_cost: 9.0, child_version: 0 });
        let first = q.pop().unwrap();
        assert_eq!((first.n_reach, first.est_cost), (1, 9.0));
        let mut q = EdgeQueue::new(QueueOrder::CostFirst);
        q.push(EdgeEstimate { parent: 0, child: 1, n_reach: 2, est_cost: 0.1, child_version: 0 });
        q.push(EdgeEstimate { parent: 0, child: 2, n_reach: 1, est_cost: 9.0, child_version: 0 });
        assert_eq!(q.pop().unwrap().est_cost, 0.1);
    }

    #[test]
    fn ties_break_by_ids() {
        let mut q = EdgeQueue::new(QueueOrder::CostFirst);
        q.push(EdgeEstimate { parent: 3, child: 1, n_reach: 1, est_cost: 1.0, child_version: 0 });
        q.push(EdgeEstimate { parent: 2, child: 5, n_reach: 1, est_cost: 1.0, child_version: 0 });
        assert_eq!(q.pop().unwrap().parent, 2);
    }

    fn setup() -> (ArmModel, Roadmap) {
        let m = ArmModel::new(vec![0.4, 0.3, 0.2]).unwrap();
        let rm = Roadmap::build(&m, &[], RoadmapParams { node_count: 400, max_neighbors: 8, ..Default::default() }).unwrap();
        (m, rm)
    }

    #[test]
    fn start_equals_goal() {
        let (m, rm) = setup();
        let q = JointConfig::new(vec![0.1, 0.2, 0.3]);
        let r = plan_query(&rm, &m, &[], &[], &q, &q, &PlannerOptions::default()).unwrap();
        assert!(r.is_solved());
        assert_eq!(r.path, vec![q]);
        assert_eq!(r.stats.fuzzy_edge_checks, 0);
    }

    #[test]
    fn empty_scene_is_exact() {
        let (m, rm) = setup();
        let start = JointConfig::new(vec![-2.0, 1.0, 0.5]);
        let goal = JointConfig::new(vec![2.0, -1.0, -0.5]);
        let opts = PlannerOptions { budget: Budget::unlimited(), ..Default::default() };
        let query = QueryGraph::new(&rm, &m, &[], &start, &goal, opts.attach_neighbors).unwrap();
        let r = plan(&query, &m, &[], &[], &opts).unwrap();
        let dist = dijkstra(&query, query.start(), |_| true, |_, _| true);
        assert_eq!(r.cost, Some(dist[query.goal()]));
        assert_eq!(r.stats.fuzzy_edge_checks, r.node_path.len() - 1);
    }

    #[test]
    fn cluttered_scene_gives_dense_valid_path() {
        let (m, rm) = setup();
        let obs = [CircleObstacle::new(0.5, 0.2, 0.12), CircleObstacle::new(-0.2, 0.55, 0.1), CircleObstacle::new(0.1, -0.6, 0.1)];
        let start = JointConfig::new(vec![-2.5, 0.3, 0.2]);
        let goal = JointConfig::new(vec![1.2, 0.4, -0.3]);
        let opts = PlannerOptions { budget: Budget::unlimited(), record_events: true, ..Default::default() };
        let r = plan_query(&rm, &m, &[], &obs, &start, &goal, &opts).unwrap();
        assert!(r.is_solved(), "{:?}", r.status);
        for w in r.path.windows(2) {
            assert!(check_edge_dense(&m, &w[0], &w[1], &obs, 1e-3).is_valid());
        }
        // A stale pop never leads straight to a check or an expansion.
        for (i, ev) in r.events.iter().enumerate() {
            if let SearchEvent::Pop { pushed_version, current_version, .. } = ev {
                if pushed_version != current_version {
                    assert!(!matches!(
                        r.events.get(i + 1),
                        Some(SearchEvent::Expand { .. } | SearchEvent::NodeInvalid { .. } | SearchEvent::EdgeInvalid { .. })
                    ));
                }
            }
        }
    }

    #[test]
    fn start_in_collision_is_an_error() {
        let (m, rm) = setup();
        let start = JointConfig::new(vec![0.0, 0.0, 0.0]);
        let goal = JointConfig::new(vec![1.0, 0.0, 0.0]);
        let obs = [CircleObstacle::new(0.5, 0.0, 0.05)];
        assert!(matches!(plan_query(&rm, &m, &[], &obs, &start, &goal, &PlannerOptions::default()), Err(PlanError::StartInCollision)));
    }
}
