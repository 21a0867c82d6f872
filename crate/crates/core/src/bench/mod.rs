//! Benchmark orchestration: configuration, suite runs, statistics,
//! SVG rendering and the command-line front end.

mod cli;
mod config;
mod render;
mod report;

use thiserror::Error;

use crate::roadmap::RoadmapError;
use crate::scenes::SceneError;
use crate::search::PlanError;

pub use cli::{run_cli, Cli, Command};
pub use config::{DatasetConfig, HiroConfig};
pub use render::{render_config_space, render_workspace, RenderOptions};
pub use report::{
    mean_std, run_bench, run_method, summarize, summarize_metric, BenchReport, Histogram, Improvement, Method,
    MethodSummary, Metric, SceneRecord,
};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("planning failed: {0}")]
    Planning(String),
    #[error("render error: {0}")]
    Render(String),
    #[error(transparent)]
    Roadmap(#[from] RoadmapError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl BenchError {
    /// Process exit code: 2 for validation failures, 3 for planning failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Planning(_) | BenchError::Plan(_) => 3,
            _ => 2,
        }
    }
}
