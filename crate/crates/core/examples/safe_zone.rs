// Safe zones around a configuration and fuzzy edge certification against
// dense sampling.

use std::error::Error;

use hiro::kinematics::{min_clearance, ArmModel, CircleObstacle, JointConfig};
use hiro::safezone::{check_edge_dense, check_edge_fuzzy, compute_safe_zone, ZoneOptions};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let arm = ArmModel::new(vec![1.0, 1.0])?;
    let obstacles = [CircleObstacle::new(1.2, 0.9, 0.25), CircleObstacle::new(-1.0, -1.2, 0.3)];
    let opts = ZoneOptions::default();

    let q = JointConfig::new(vec![0.0, 0.0]);
    let zone = compute_safe_zone(&arm, &q, &obstacles, &opts)?;
    println!("zone at {q:?}: dq_min {:.4?} dq_max {:.4?}", zone.dq_min(), zone.dq_max());

    // Every point inside the zone is collision-free.
    let mut inside = 0;
    for i in 0..40 {
        for j in 0..40 {
            let p = JointConfig::new(vec![-1.6 + 0.08 * i as f64, -1.6 + 0.08 * j as f64]);
            if zone.contains(&p) {
                inside += 1;
                assert!(min_clearance(&arm, &p, &obstacles)? > 0.0);
            }
        }
    }
    println!("{inside} grid points inside the zone, all clear");

    for goal in [vec![-0.5, -0.5], vec![1.2, -0.2], vec![0.4, 1.6]] {
        let goal = JointConfig::new(goal);
        let fuzzy = check_edge_fuzzy(&arm, &q, &goal, &obstacles, &opts);
        let dense = check_edge_dense(&arm, &q, &goal, &obstacles, 1e-3);
        println!(
            "edge to {goal:?}: fuzzy {:?} with {} checks, dense {:?} with {} checks",
            fuzzy.verdict, fuzzy.exact_checks, dense.verdict, dense.checks
        );
        if fuzzy.is_valid() {
            assert!(dense.is_valid());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
