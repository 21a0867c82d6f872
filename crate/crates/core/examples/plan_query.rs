// Plans one query for the desk arm among scene obstacles and re-checks
// the returned path densely.

use std::error::Error;

use hiro::bench::HiroConfig;
use hiro::kinematics::{CircleObstacle, JointConfig};
use hiro::roadmap::Roadmap;
use hiro::safezone::check_edge_dense;
use hiro::search::plan_query;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = HiroConfig::default();
    let roadmap = Roadmap::build(&config.arm, &config.static_obstacles, config.roadmap.clone())?;
    let obstacles = vec![
        CircleObstacle::new(0.55, 0.35, 0.05),
        CircleObstacle::new(-0.2, 0.7, 0.06),
        CircleObstacle::new(0.75, -0.4, 0.04),
        CircleObstacle::new(-0.6, -0.5, 0.05),
    ];
    let start = JointConfig::new(vec![-0.4, 0.8, 0.5]);
    let goal = JointConfig::new(vec![2.0, 0.5, 0.3]);

    let result = plan_query(&roadmap, &config.arm, &config.static_obstacles, &obstacles, &start, &goal, &config.planner)?;
    let s = &result.stats;
    println!("status {:?}, cost {:?}, {} waypoints", result.status, result.cost, result.path.len());
    println!(
        "{} iterations, {} exact point checks, {} fuzzy edges, {} heuristic updates, {:.2} ms",
        s.iterations, s.exact_point_checks, s.fuzzy_edge_checks, s.heuristic_updates, s.wall_ms
    );

    let all: Vec<CircleObstacle> = config.static_obstacles.iter().chain(&obstacles).copied().collect();
    for pair in result.path.windows(2) {
        assert!(check_edge_dense(&config.arm, &pair[0], &pair[1], &all, 1e-3).is_valid());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
