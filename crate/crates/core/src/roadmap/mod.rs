//! Deterministic Halton roadmap over the static scene.

mod halton;
mod io;

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{min_clearance_unchecked, ArmModel, CircleObstacle, JointConfig, KinematicsError};
use crate::safezone::subdivisions;

pub use halton::{first_primes, halton_point, radical_inverse};
pub use io::{load_roadmap, load_roadmap_checked, model_digest, save_roadmap, scene_digest, sha256_hex};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RoadmapError {
    #[error("invalid roadmap parameters: {0}")]
    InvalidParams(String),
    #[error("every sampled node collides with the static scene")]
    Empty,
    #[error("configuration outside the joint limits")]
    OutOfLimits,
    #[error("query configuration collides with the static scene")]
    QueryInCollision,
    #[error("no statically valid connection from the query configuration")]
    NoConnection,
    #[error("{what} digest mismatch: roadmap has {stored}, scene has {actual}")]
    DigestMismatch { what: &'static str, stored: String, actual: String },
    #[error("malformed roadmap: {0}")]
    Malformed(String),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("roadmap parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoadmapParams {
    pub node_count: usize,
    pub max_neighbors: usize,
    /// Largest edge length in joint space (rad).
    pub connection_radius: f64,
    /// Sampling step for static edge validation (rad).
    pub edge_resolution: f64,
    /// Optional per-joint weights of the edge-cost metric.
    pub joint_weights: Option<Vec<f64>>,
}

impl Default for RoadmapParams {
    fn default() -> Self {
        RoadmapParams {
            node_count: 2000,
            max_neighbors: 10,
            connection_radius: FRAC_PI_2,
            edge_resolution: 0.01,
            joint_weights: None,
        }
    }
}

impl RoadmapParams {
    pub fn validate(&self, dof: usize) -> Result<(), RoadmapError> {
        let bad = |m: &str| Err(RoadmapError::InvalidParams(m.to_string()));
        if self.node_count == 0 || self.max_neighbors == 0 {
            return bad("node_count and max_neighbors must be positive");
        }
        if !(self.connection_radius > 0.0) || !(self.edge_resolution > 0.0) {
            return bad("connection_radius and edge_resolution must be positive");
        }
        if let Some(w) = &self.joint_weights {
            if w.len() != dof || w.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return bad("joint_weights must hold one positive weight per joint");
            }
        }
        Ok(())
    }
}

/// Undirected roadmap with symmetric adjacency sorted by neighbour id.
#[derive(Debug, Clone, PartialEq)]
pub struct Roadmap {
    nodes: Vec<JointConfig>,
    adjacency: Vec<Vec<(usize, f64)>>,
    params: RoadmapParams,
    model_digest: String,
    static_scene_digest: String,
}

/// Weighted L2 distance between configurations.
pub fn weighted_distance(a: &[f64], b: &[f64], weights: Option<&[f64]>) -> f64 {
    match weights {
        None => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        Some(w) => a.iter().zip(b).zip(w).map(|((x, y), w)| w * (x - y) * (x - y)).sum::<f64>().sqrt(),
    }
}

/// Static edge check that is sound at every resolution: samples must clear
/// the obstacles by the largest workspace motion possible between samples.
pub fn static_edge_valid(
    model: &ArmModel,
    q_a: &JointConfig,
    q_b: &JointConfig,
    obstacles: &[CircleObstacle],
    resolution: f64,
) -> bool {
    if obstacles.is_empty() {
        return true;
    }
    let length = q_a.distance(q_b);
    let n = subdivisions(length / resolution);
    let margin = model.reach() * (model.dof() as f64).sqrt() * 0.5 * length / n as f64;
    let mut joints = Vec::with_capacity(model.dof() + 1);
    (0..=n).all(|i| {
        let q = q_a.lerp(q_b, i as f64 / n as f64);
        min_clearance_unchecked(model, q.as_slice(), obstacles, &mut joints) > margin
    })
}

impl Roadmap {
    /// Samples, filters and connects the roadmap.
    pub fn build(model: &ArmModel, static_obstacles: &[CircleObstacle], params: RoadmapParams) -> Result<Self, RoadmapError> {
        let dof = model.dof();
        params.validate(dof)?;
        let primes = first_primes(dof);
        let mut joints = Vec::with_capacity(dof + 1);
        let nodes: Vec<JointConfig> = (1..=params.node_count as u64)
            .map(|i| {
                let q = primes
                    .iter()
                    .zip(model.joint_limits())
                    .map(|(&b, [lo, hi])| lo + radical_inverse(i, b) * (hi - lo))
                    .collect();
                JointConfig::new(q)
            })
            .filter(|q| min_clearance_unchecked(model, q.as_slice(), static_obstacles, &mut joints) > 0.0)
            .collect();
        if nodes.is_empty() {
            return Err(RoadmapError::Empty);
        }
        let weights = params.joint_weights.clone();
        let mut candidates = BTreeSet::new();
        for (u, q) in nodes.iter().enumerate() {
            for (v, _) in k_nearest(&nodes, q, params.max_neighbors, params.connection_radius, weights.as_deref(), Some(u)) {
                candidates.insert((u.min(v), u.max(v)));
            }
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (u, v) in candidates {
            if static_edge_valid(model, &nodes[u], &nodes[v], static_obstacles, params.edge_resolution) {
                let cost = weighted_distance(nodes[u].as_slice(), nodes[v].as_slice(), weights.as_deref());
                adjacency[u].push((v, cost));
                adjacency[v].push((u, cost));
            }
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(v, _)| v);
        }
        Ok(Roadmap {
            nodes,
            adjacency,
            params,
            model_digest: model_digest(model),
            static_scene_digest: scene_digest(static_obstacles),
        })
    }

    /// Roadmap from explicit nodes and undirected edges `(u, v, cost)`.
    /// Digests are left empty.
    pub fn from_edges(
        nodes: Vec<JointConfig>,
        edges: &[(usize, usize, f64)],
        params: RoadmapParams,
    ) -> Result<Self, RoadmapError> {
        Self::assemble(nodes, edges, params, String::new(), String::new())
    }

    pub(crate) fn assemble(
        nodes: Vec<JointConfig>,
        edges: &[(usize, usize, f64)],
        params: RoadmapParams,
        model_digest: String,
        static_scene_digest: String,
    ) -> Result<Self, RoadmapError> {
        let bad = |m: String| Err(RoadmapError::Malformed(m));
        if nodes.is_empty() {
            return Err(RoadmapError::Empty);
        }
        let dof = nodes[0].dof();
        if nodes.iter().any(|q| q.dof() != dof) {
            return bad("nodes have inconsistent dimensions".into());
        }
        let mut seen = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &(u, v, cost) in edges {
            if u >= nodes.len() || v >= nodes.len() || u == v {
                return bad(format!("bad edge ({u}, {v})"));
            }
            if !(cost > 0.0) || !cost.is_finite() {
                return bad(format!("edge ({u}, {v}) has non-positive cost"));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return bad(format!("duplicate edge ({u}, {v})"));
            }
            adjacency[u].push((v, cost));
            adjacency[v].push((u, cost));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(v, _)| v);
        }
        Ok(Roadmap { nodes, adjacency, params, model_digest, static_scene_digest })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: usize) -> &JointConfig {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[JointConfig] {
        &self.nodes
    }

    pub fn neighbors(&self, id: usize) -> &[(usize, f64)] {
        &self.adjacency[id]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Undirected edges `(u, v, cost)` with `u < v`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |(v, _)| *v > u).map(move |&(v, c)| (u, v, c)))
    }

    pub fn params(&self) -> &RoadmapParams {
        &self.params
    }

    pub fn model_digest(&self) -> &str {
        &self.model_digest
    }

    pub fn static_scene_digest(&self) -> &str {
        &self.static_scene_digest
    }

    /// Edge-cost metric between two configurations.
    pub fn cost(&self, a: &JointConfig, b: &JointConfig) -> f64 {
        weighted_distance(a.as_slice(), b.as_slice(), self.params.joint_weights.as_deref())
    }

    /// Up to `k` nodes within the connection radius, nearest first, ties by id.
    pub fn nearest(&self, q: &JointConfig, k: usize) -> Vec<(usize, f64)> {
        k_nearest(&self.nodes, q, k, self.params.connection_radius, self.params.joint_weights.as_deref(), None)
    }

    /// Statically valid edges from `q` to its `k` nearest nodes. `q` itself
    /// is not added to the roadmap.
    pub fn connect_query_node(
        &self,
        model: &ArmModel,
        static_obstacles: &[CircleObstacle],
        q: &JointConfig,
        k: usize,
    ) -> Result<Vec<(usize, f64)>, RoadmapError> {
        model.check_dimension(q)?;
        if !model.within_limits(q) {
            return Err(RoadmapError::OutOfLimits);
        }
        let mut joints = Vec::new();
        if min_clearance_unchecked(model, q.as_slice(), static_obstacles, &mut joints) <= 0.0 {
            return Err(RoadmapError::QueryInCollision);
        }
        let out: Vec<_> = self
            .nearest(q, k)
            .into_iter()
            .filter(|&(v, _)| static_edge_valid(model, q, &self.nodes[v], static_obstacles, self.params.edge_resolution))
            .collect();
        if out.is_empty() {
            return Err(RoadmapError::NoConnection);
        }
        Ok(out)
    }

    /// Confirms the roadmap was built for this arm and static scene.
    pub fn verify_scene(&self, model: &ArmModel, static_obstacles: &[CircleObstacle]) -> Result<(), RoadmapError> {
        let checks = [
            ("model", &self.model_digest, model_digest(model)),
            ("static scene", &self.static_scene_digest, scene_digest(static_obstacles)),
        ];
        for (what, stored, actual) in checks {
            if *stored != actual {
                return Err(RoadmapError::DigestMismatch { what, stored: stored.clone(), actual });
            }
        }
        Ok(())
    }
}

fn k_nearest(
    nodes: &[JointConfig],
    q: &JointConfig,
    k: usize,
    radius: f64,
    weights: Option<&[f64]>,
    skip: Option<usize>,
) -> Vec<(usize, f64)> {
    let mut found: Vec<(usize, f64)> = nodes
        .iter()
        .enumerate()
        .filter(|(v, _)| Some(*v) != skip)
        .map(|(v, p)| (v, weighted_distance(q.as_slice(), p.as_slice(), weights)))
        .filter(|(_, d)| *d <= radius)
        .collect();
    let order = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    if found.len() > k {
        found.select_nth_unstable_by(k, order);
        found.truncate(k);
    }
    found.sort_by(order);
    found
}
