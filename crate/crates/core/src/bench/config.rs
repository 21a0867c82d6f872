use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::kinematics::{ArmModel, CircleObstacle};
use crate::roadmap::RoadmapParams;
use crate::scenes::SceneParams;
use crate::search::{BaselineOptions, Budget, PlannerOptions};

/// Dataset suite: one dataset per obstacle count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub obstacle_counts: Vec<usize>,
    pub scenes_per_dataset: usize,
    pub seed: u64,
    /// Sampling parameters; `obstacle_count` is set per dataset.
    pub scene: SceneParams,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig { obstacle_counts: vec![4, 8, 12, 16], scenes_per_dataset: 50, seed: 1, scene: SceneParams::default() }
    }
}

/// Whole-pipeline configuration, read from JSON. Missing sections take
/// the desk-scale defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HiroConfig {
    pub arm: ArmModel,
    pub static_obstacles: Vec<CircleObstacle>,
    pub roadmap: RoadmapParams,
    pub planner: PlannerOptions,
    pub baselines: BaselineOptions,
    pub dataset: DatasetConfig,
    /// Repetitions per scene and method in benchmarks (median taken).
    pub reps: usize,
}

impl Default for HiroConfig {
    fn default() -> Self {
        HiroConfig {
            arm: ArmModel::new(vec![0.4, 0.3, 0.2])
                .and_then(|m| m.with_link_radius(0.02))
                .expect("valid default arm"),
            static_obstacles: vec![CircleObstacle::new(0.0, -0.75, 0.08), CircleObstacle::new(-0.7, 0.3, 0.06)],
            roadmap: RoadmapParams::default(),
            // Iteration budget only, so that counters are reproducible.
            planner: PlannerOptions {
                budget: Budget { max_iterations: Some(100_000), max_time_ms: None },
                ..PlannerOptions::default()
            },
            baselines: BaselineOptions::default(),
            dataset: DatasetConfig::default(),
            reps: 10,
        }
    }
}

impl HiroConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let config: HiroConfig = serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let cfg = |e: String| BenchError::Config(e);
        self.roadmap.validate(self.arm.dof()).map_err(|e| cfg(e.to_string()))?;
        self.planner.zone.validate().map_err(|e| cfg(e.to_string()))?;
        self.dataset.scene.validate().map_err(|e| cfg(e.to_string()))?;
        if self.reps == 0 {
            return Err(cfg("reps must be positive".into()));
        }
        Ok(())
    }

    /// Scene parameters for one dataset of the suite.
    pub fn scene_params(&self, obstacle_count: usize) -> SceneParams {
        SceneParams { obstacle_count, ..self.dataset.scene.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = HiroConfig::default();
        assert_eq!(HiroConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c = HiroConfig::from_json(r#"{"arm": {"link_lengths": [1.0, 1.0]}, "reps": 3}"#).unwrap();
        assert_eq!(c.arm.dof(), 2);
        assert_eq!(c.reps, 3);
        assert_eq!(c.roadmap, RoadmapParams::default());
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(HiroConfig::from_json(r#"{"reps": 0}"#).is_err());
        assert!(HiroConfig::from_json(r#"{"arm": {"link_lengths": []}}"#).is_err());
        assert!(HiroConfig::from_json(r#"{"planner": {"zone": {"fallback_bound": 4.0}}}"#).is_err());
    }
}
