//! Random planning scenes with oracle-certified feasibility.
//!
//! Each scene draws from its own ChaCha8 stream seeded with the first eight
//! bytes (little endian) of `SHA-256("{dataset_seed}:{index}")`, so any
//! scene can be regenerated alone and results do not depend on the platform.

use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{DenseOracle, Graph, QueryGraph};
use crate::kinematics::{min_clearance, ArmModel, CircleObstacle, JointConfig};
use crate::roadmap::{model_digest, Roadmap, RoadmapError};
use crate::safezone::check_edge_dense_skipping;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene {index}: no feasible scene after {attempts} attempts")]
    RetriesExhausted { index: usize, attempts: usize },
    #[error("invalid scene parameters: {0}")]
    InvalidParams(String),
    #[error("{what} digest mismatch")]
    DigestMismatch { what: &'static str },
    #[error("scene {index} failed re-validation: {reason}")]
    Revalidation { index: usize, reason: String },
    #[error(transparent)]
    Roadmap(#[from] RoadmapError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("dataset parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneParams {
    pub obstacle_count: usize,
    /// Obstacle radii are uniform in this range (m).
    pub radius_range: [f64; 2],
    /// Obstacle centres are area-uniform in this annulus around the arm base (m).
    pub annulus: [f64; 2],
    /// Smallest joint-space distance between start and goal (rad).
    pub min_separation: f64,
    pub max_attempts: usize,
    /// Roadmap nodes each query configuration connects to.
    pub attach_neighbors: usize,
    /// Sampling step of the feasibility oracle (rad).
    pub oracle_resolution: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            obstacle_count: 4,
            radius_range: [0.03, 0.06],
            annulus: [0.45, 1.25],
            min_separation: 1.0,
            max_attempts: 200,
            attach_neighbors: 10,
            oracle_resolution: 1e-3,
        }
    }
}

impl SceneParams {
    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |m: &str| Err(SceneError::InvalidParams(m.to_string()));
        let [r0, r1] = self.radius_range;
        let [a0, a1] = self.annulus;
        if !(0.0 < r0 && r0 <= r1) {
            return bad("radius_range must satisfy 0 < min <= max");
        }
        if !(0.0 <= a0 && a0 <= a1) {
            return bad("annulus must satisfy 0 <= inner <= outer");
        }
        if self.max_attempts == 0 || self.attach_neighbors == 0 || !(self.oracle_resolution > 0.0) {
            return bad("max_attempts, attach_neighbors and oracle_resolution must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningScene {
    pub seed: u64,
    pub obstacles: Vec<CircleObstacle>,
    pub start: JointConfig,
    pub goal: JointConfig,
    pub feasible: bool,
    /// Oracle path as query-graph node ids (start is the roadmap size, goal one more).
    pub witness: Vec<usize>,
    pub witness_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDataset {
    pub model_digest: String,
    pub roadmap_digest: String,
    pub obstacle_count: usize,
    pub dataset_seed: u64,
    pub params: SceneParams,
    pub scenes: Vec<PlanningScene>,
}

/// Seed of scene `index` in a dataset.
pub fn scene_seed(dataset_seed: u64, index: usize) -> u64 {
    let digest = Sha256::digest(format!("{dataset_seed}:{index}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

fn random_config(model: &ArmModel, rng: &mut ChaCha8Rng) -> JointConfig {
    JointConfig::new(model.joint_limits().iter().map(|[lo, hi]| rng.gen_range(*lo..*hi)).collect())
}

fn sample_obstacles(model: &ArmModel, params: &SceneParams, rng: &mut ChaCha8Rng) -> Vec<CircleObstacle> {
    let base = model.base();
    let [a0, a1] = params.annulus;
    let [r0, r1] = params.radius_range;
    (0..params.obstacle_count)
        .map(|_| {
            let rho = rng.gen_range(a0 * a0..=a1 * a1).sqrt();
            let theta = rng.gen_range(0.0..TAU);
            let r = rng.gen_range(r0..=r1);
            CircleObstacle::new(base.x + rho * theta.cos(), base.y + rho * theta.sin(), r)
        })
        .collect()
}

/// Samples obstacles, start and goal until the oracle finds a path.
pub fn generate_scene(
    model: &ArmModel,
    static_obstacles: &[CircleObstacle],
    roadmap: &Roadmap,
    params: &SceneParams,
    seed: u64,
    index: usize,
) -> Result<PlanningScene, SceneError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all_clear = |q: &JointConfig, obstacles: &[CircleObstacle]| {
        min_clearance(model, q, static_obstacles).is_ok_and(|c| c > 0.0)
            && min_clearance(model, q, obstacles).is_ok_and(|c| c > 0.0)
    };
    for _ in 0..params.max_attempts {
        let obstacles = sample_obstacles(model, params, &mut rng);
        let mut pick = || {
            (0..100).map(|_| random_config(model, &mut rng)).find(|q| {
                all_clear(q, &obstacles)
                    && roadmap.connect_query_node(model, static_obstacles, q, params.attach_neighbors).is_ok()
            })
        };
        let (Some(start), Some(goal)) = (pick(), pick()) else { continue };
        if start.distance(&goal) < params.min_separation {
            continue;
        }
        let query = QueryGraph::new(roadmap, model, static_obstacles, &start, &goal, params.attach_neighbors)?;
        let mut oracle = DenseOracle::new(&query, model, &obstacles, params.oracle_resolution);
        if let Some((cost, witness)) = oracle.shortest_path(query.start(), query.goal()) {
            return Ok(PlanningScene { seed, obstacles, start, goal, feasible: true, witness, witness_cost: cost });
        }
    }
    Err(SceneError::RetriesExhausted { index, attempts: params.max_attempts })
}

pub fn generate_dataset(
    model: &ArmModel,
    static_obstacles: &[CircleObstacle],
    roadmap: &Roadmap,
    params: &SceneParams,
    dataset_seed: u64,
    n_scenes: usize,
) -> Result<SceneDataset, SceneError> {
    let scenes = (0..n_scenes)
        .map(|i| generate_scene(model, static_obstacles, roadmap, params, scene_seed(dataset_seed, i), i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SceneDataset {
        model_digest: model_digest(model),
        roadmap_digest: roadmap.digest(),
        obstacle_count: params.obstacle_count,
        dataset_seed,
        params: params.clone(),
        scenes,
    })
}

impl SceneDataset {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("dataset serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks the digests, and in strict mode re-validates every scene:
    /// start and goal are clear and the stored witness is densely valid.
    pub fn verify(
        &self,
        model: &ArmModel,
        static_obstacles: &[CircleObstacle],
        roadmap: &Roadmap,
        strict: bool,
    ) -> Result<(), SceneError> {
        if self.model_digest != model_digest(model) {
            return Err(SceneError::DigestMismatch { what: "model" });
        }
        if self.roadmap_digest != roadmap.digest() {
            return Err(SceneError::DigestMismatch { what: "roadmap" });
        }
        if !strict {
            return Ok(());
        }
        for (index, scene) in self.scenes.iter().enumerate() {
            let fail = |reason: &str| Err(SceneError::Revalidation { index, reason: reason.to_string() });
            if scene.obstacles.len() != self.obstacle_count {
                return fail("obstacle count differs from the dataset's");
            }
            let query = QueryGraph::new(roadmap, model, static_obstacles, &scene.start, &scene.goal, self.params.attach_neighbors)?;
            for q in [&scene.start, &scene.goal] {
                if !min_clearance(model, q, &scene.obstacles).is_ok_and(|c| c > 0.0) {
                    return fail("start or goal collides");
                }
            }
            let w = &scene.witness;
            if w.first() != Some(&query.start()) || w.last() != Some(&query.goal()) {
                return fail("witness does not join start and goal");
            }
            for pair in w.windows(2) {
                if query.edge_cost(pair[0], pair[1]).is_none() {
                    return fail("witness uses a missing edge");
                }
                let r = check_edge_dense_skipping(
                    model,
                    query.config(pair[0]),
                    query.config(pair[1]),
                    &scene.obstacles,
                    self.params.oracle_resolution,
                );
                if !r.is_valid() {
                    return fail("witness edge collides");
                }
            }
        }
        Ok(())
    }
}

pub fn save_dataset(dataset: &SceneDataset, path: impl AsRef<Path>) -> Result<(), SceneError> {
    std::fs::write(path, dataset.to_json())?;
    Ok(())
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<SceneDataset, SceneError> {
    SceneDataset::from_json(&std::fs::read_to_string(path)?)
}

/// Fraction of roadmap edges made invalid by `obstacles` at `resolution`.
pub fn edge_invalidation_rate(model: &ArmModel, roadmap: &Roadmap, obstacles: &[CircleObstacle], resolution: f64) -> f64 {
    let mut total = 0usize;
    let mut invalid = 0usize;
    for (u, v, _) in roadmap.edges() {
        total += 1;
        if !check_edge_dense_skipping(model, roadmap.node(u), roadmap.node(v), obstacles, resolution).is_valid() {
            invalid += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        invalid as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roadmap::RoadmapParams;

    fn setup() -> (ArmModel, Roadmap) {
        let m = ArmModel::new(vec![0.4, 0.3, 0.2]).unwrap();
        let rm = Roadmap::build(&m, &[], RoadmapParams { node_count: 300, max_neighbors: 8, ..Default::default() }).unwrap();
        (m, rm)
    }

    #[test]
    fn seeds_are_stable() {
        assert_eq!(scene_seed(7, 3), scene_seed(7, 3));
        assert_ne!(scene_seed(7, 3), scene_seed(7, 4));
        assert_ne!(scene_seed(7, 3), scene_seed(8, 3));
    }

    #[test]
    fn empty_scene_is_feasible() {
        let (m, rm) = setup();
        let params = SceneParams { obstacle_count: 0, ..Default::default() };
        let s = generate_scene(&m, &[], &rm, &params, 1, 0).unwrap();
        assert!(s.feasible && s.obstacles.is_empty());
        assert_eq!(s.witness.first(), Some(&rm.node_count()));
    }

    #[test]
    fn generation_is_deterministic_and_round_trips() {
        let (m, rm) = setup();
        let params = SceneParams { obstacle_count: 6, ..Default::default() };
        let a = generate_dataset(&m, &[], &rm, &params, 42, 3).unwrap();
        let b = generate_dataset(&m, &[], &rm, &params, 42, 3).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let back = SceneDataset::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
        back.verify(&m, &[], &rm, true).unwrap();
        for s in &a.scenes {
            assert_eq!(s.obstacles.len(), 6);
            for o in &s.obstacles {
                let rho = o.center().norm();
                assert!((0.45..=1.25).contains(&rho) && (0.03..=0.06).contains(&o.r));
            }
        }
    }

    #[test]
    fn tampered_scene_fails_strict_check() {
        let (m, rm) = setup();
        let params = SceneParams { obstacle_count: 2, ..Default::default() };
        let mut d = generate_dataset(&m, &[], &rm, &params, 5, 1).unwrap();
        let s = &mut d.scenes[0];
        let q = s.start.clone();
        // An obstacle on the start pose's elbow.
        let p = crate::kinematics::forward_kinematics(&m, &q).unwrap()[1];
        s.obstacles[0] = CircleObstacle::new(p.x, p.y, 0.05);
        assert!(matches!(d.verify(&m, &[], &rm, true), Err(SceneError::Revalidation { .. })));
        assert!(d.verify(&m, &[], &rm, false).is_ok());
    }
}
