// Renders a 2-link arm's workspace and configuration space, with safe
// zones along the planned path, as SVG files.

use std::error::Error;

use hiro::bench::{render_config_space, render_workspace, RenderOptions};
use hiro::kinematics::{ArmModel, CircleObstacle, JointConfig};
use hiro::roadmap::{Roadmap, RoadmapParams};
use hiro::search::{plan_query, PlannerOptions};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let arm = ArmModel::new(vec![1.0, 1.0])?.with_link_radius(0.02)?;
    let obstacles = vec![CircleObstacle::new(1.2, 0.9, 0.25), CircleObstacle::new(-1.0, -1.2, 0.3)];
    let roadmap = Roadmap::build(&arm, &[], RoadmapParams { node_count: 400, ..Default::default() })?;
    let start = JointConfig::new(vec![-0.5, 0.3]);
    let goal = JointConfig::new(vec![1.6, 0.2]);
    let result = plan_query(&roadmap, &arm, &[], &obstacles, &start, &goal, &PlannerOptions::default())?;
    println!("status {:?}, {} waypoints", result.status, result.path.len());

    let opts = RenderOptions::default();
    let dir = std::env::temp_dir();
    let workspace = render_workspace(&arm, &[], &obstacles, &result.path, &opts)?;
    let cspace = render_config_space(&arm, &obstacles, &result.path, &result.path, &opts)?;
    for (name, svg) in [("workspace", &workspace), ("config_space", &cspace)] {
        let path = dir.join(format!("hiro_{name}.svg"));
        std::fs::write(&path, svg)?;
        println!("wrote {} ({} bytes)", path.display(), svg.len());
    }
    assert_eq!(cspace.matches("class=\"zone\"").count(), result.path.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
