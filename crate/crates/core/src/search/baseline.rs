//! Roadmap baselines sharing the planner's inputs and outputs: a lazy A*
//! that validates whole candidate paths, and an A* that densely checks
//! every edge it expands.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{PlanError, PlanResult, PlanStatus, PlannerOptions, SearchStats, NONE};
use crate::graph::{Graph, Key, QueryGraph};
use crate::kinematics::{min_clearance_unchecked, ArmModel, CircleObstacle, JointConfig};
use crate::safezone::{check_edge_dense, correct_path};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineOptions {
    /// Sampling step of the lazy baseline's edge checks (rad).
    pub lazy_resolution: f64,
    /// Sampling step of the full-evaluation baseline's edge checks (rad).
    pub full_resolution: f64,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        BaselineOptions { lazy_resolution: 0.01, full_resolution: 1e-3 }
    }
}

struct Checker<'a> {
    model: &'a ArmModel,
    obstacles: &'a [CircleObstacle],
    nodes: Vec<Option<bool>>,
    edges: HashMap<(usize, usize), bool>,
    joints: Vec<crate::kinematics::Point2>,
    stats: SearchStats,
}

impl<'a> Checker<'a> {
    fn new(n: usize, model: &'a ArmModel, obstacles: &'a [CircleObstacle]) -> Self {
        Checker { model, obstacles, nodes: vec![None; n], edges: HashMap::new(), joints: Vec::new(), stats: SearchStats::default() }
    }

    fn node(&mut self, q: &JointConfig, v: usize) -> bool {
        if let Some(ok) = self.nodes[v] {
            return ok;
        }
        self.stats.exact_point_checks += 1;
        let ok = min_clearance_unchecked(self.model, q.as_slice(), self.obstacles, &mut self.joints) > 0.0;
        self.nodes[v] = Some(ok);
        ok
    }

    fn edge(&mut self, qa: &JointConfig, qb: &JointConfig, u: usize, v: usize, resolution: f64) -> bool {
        let key = (u.min(v), u.max(v));
        if let Some(&ok) = self.edges.get(&key) {
            return ok;
        }
        let r = check_edge_dense(self.model, qa, qb, self.obstacles, resolution);
        self.stats.exact_point_checks += r.checks;
        self.edges.insert(key, r.is_valid());
        r.is_valid()
    }
}

/// A* over nodes and edges accepted by the filters.
fn astar<G: Graph>(
    graph: &G,
    start: usize,
    goal: usize,
    heuristic: impl Fn(usize) -> f64,
    mut edge_ok: impl FnMut(usize, usize) -> bool,
    iterations: &mut usize,
    budget: &super::Budget,
    started: Instant,
) -> Result<Option<Vec<usize>>, ()> {
    let n = graph.node_count();
    let mut g = vec![f64::INFINITY; n];
    let mut pred = vec![NONE; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    g[start] = 0.0;
    open.push(Reverse((Key(heuristic(start)), start)));
    while let Some(Reverse((_, u))) = open.pop() {
        if closed[u] {
            continue;
        }
        *iterations += 1;
        if budget.exceeded(*iterations, started) {
            return Err(());
        }
        closed[u] = true;
        if u == goal {
            let mut path = vec![goal];
            while pred[*path.last().unwrap()] != NONE {
                path.push(pred[*path.last().unwrap()]);
            }
            path.reverse();
            return Ok(Some(path));
        }
        for (w, c) in graph.neighbors(u) {
            if closed[w] || g[u] + c >= g[w] || !edge_ok(u, w) {
                continue;
            }
            g[w] = g[u] + c;
            pred[w] = u;
            open.push(Reverse((Key(g[w] + heuristic(w)), w)));
        }
    }
    Ok(None)
}

fn finish(
    graph: &QueryGraph<'_>,
    model: &ArmModel,
    static_obstacles: &[CircleObstacle],
    dynamic_obstacles: &[CircleObstacle],
    opts: &PlannerOptions,
    ids: Vec<usize>,
    stats: &mut SearchStats,
) -> Result<PlanResult, usize> {
    let configs: Vec<JointConfig> = ids.iter().map(|&v| graph.config(v).clone()).collect();
    let all: Vec<CircleObstacle> = static_obstacles.iter().chain(dynamic_obstacles).copied().collect();
    match correct_path(model, &configs, &all, &opts.correction) {
        Ok(fixed) => {
            stats.validation_checks += fixed.checks;
            stats.corrections += fixed.bridges.len();
            let cost = fixed.path.windows(2).map(|w| graph.cost(&w[0], &w[1])).sum();
            Ok(PlanResult {
                status: PlanStatus::Solved,
                path: fixed.path,
                node_path: ids,
                bridges: fixed.bridges,
                cost: Some(cost),
                stats: stats.clone(),
                events: Vec::new(),
            })
        }
        Err(f) => {
            stats.validation_checks += f.checks;
            stats.correction_failures += 1;
            Err(f.edge_index)
        }
    }
}

fn check_endpoints(graph: &QueryGraph<'_>, checker: &mut Checker<'_>) -> Result<(), PlanError> {
    let (s, g) = (graph.start(), graph.goal());
    if !checker.node(graph.config(s), s) {
        return Err(PlanError::StartInCollision);
    }
    if !checker.node(graph.config(g), g) {
        return Err(PlanError::GoalInCollision);
    }
    Ok(())
}

/// Lazy A*: search assuming every unchecked element is valid, validate the
/// candidate path (nodes, then edges from the start), drop what fails and
/// search again.
pub fn plan_lazy(
    graph: &QueryGraph<'_>,
    model: &ArmModel,
    static_obstacles: &[CircleObstacle],
    dynamic_obstacles: &[CircleObstacle],
    opts: &PlannerOptions,
    base: &BaselineOptions,
) -> Result<PlanResult, PlanError> {
    let started = Instant::now();
    let mut checker = Checker::new(graph.node_count(), model, dynamic_obstacles);
    check_endpoints(graph, &mut checker)?;
    let goal_q = graph.config(graph.goal()).clone();
    let heuristic = |v: usize| graph.cost(graph.config(v), &goal_q);
    let mut iterations = 0;
    loop {
        let nodes = &checker.nodes;
        let edges = &checker.edges;
        let found = astar(
            graph,
            graph.start(),
            graph.goal(),
            heuristic,
            |u, w| nodes[w] != Some(false) && edges.get(&(u.min(w), u.max(w))) != Some(&false),
            &mut iterations,
            &opts.budget,
            started,
        );
        checker.stats.iterations = iterations;
        let ids = match found {
            Err(()) => return Ok(unsolved(PlanStatus::BudgetExhausted, checker.stats, started)),
            Ok(None) => return Ok(unsolved(PlanStatus::Unreachable, checker.stats, started)),
            Ok(Some(ids)) => ids,
        };
        let nodes_ok = ids.iter().fold(true, |acc, &v| checker.node(graph.config(v), v) && acc);
        if !nodes_ok {
            continue;
        }
        let edges_ok = ids
            .windows(2)
            .all(|w| checker.edge(graph.config(w[0]), graph.config(w[1]), w[0], w[1], base.lazy_resolution));
        if !edges_ok {
            continue;
        }
        match finish(graph, model, static_obstacles, dynamic_obstacles, opts, ids.clone(), &mut checker.stats) {
            Ok(mut r) => {
                r.stats.wall_ms = started.elapsed().as_secs_f64() * 1e3;
                return Ok(r);
            }
            Err(i) => {
                checker.edges.insert((ids[i].min(ids[i + 1]), ids[i].max(ids[i + 1])), false);
            }
        }
    }
}

/// A* that checks every node and edge it relaxes at the fine resolution.
pub fn plan_full(
    graph: &QueryGraph<'_>,
    model: &ArmModel,
    static_obstacles: &[CircleObstacle],
    dynamic_obstacles: &[CircleObstacle],
    opts: &PlannerOptions,
    base: &BaselineOptions,
) -> Result<PlanResult, PlanError> {
    let started = Instant::now();
    let mut checker = Checker::new(graph.node_count(), model, dynamic_obstacles);
    check_endpoints(graph, &mut checker)?;
    let goal_q = graph.config(graph.goal()).clone();
    let heuristic = |v: usize| graph.cost(graph.config(v), &goal_q);
    let mut iterations = 0;
    loop {
        let found = astar(
            graph,
            graph.start(),
            graph.goal(),
            heuristic,
            |u, w| checker.node(graph.config(w), w) && checker.edge(graph.config(u), graph.config(w), u, w, base.full_resolution),
            &mut iterations,
            &opts.budget,
            started,
        );
        checker.stats.iterations = iterations;
        let ids = match found {
            Err(()) => return Ok(unsolved(PlanStatus::BudgetExhausted, checker.stats, started)),
            Ok(None) => return Ok(unsolved(PlanStatus::Unreachable, checker.stats, started)),
            Ok(Some(ids)) => ids,
        };
        match finish(graph, model, static_obstacles, dynamic_obstacles, opts, ids.clone(), &mut checker.stats) {
            Ok(mut r) => {
                r.stats.wall_ms = started.elapsed().as_secs_f64() * 1e3;
                return Ok(r);
            }
            Err(i) => {
                checker.edges.insert((ids[i].min(ids[i + 1]), ids[i].max(ids[i + 1])), false);
            }
        }
    }
}

fn unsolved(status: PlanStatus, mut stats: SearchStats, started: Instant) -> PlanResult {
    stats.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    PlanResult::unsolved(status, stats)
}
