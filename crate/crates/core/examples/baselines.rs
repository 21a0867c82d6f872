// Compares the planner with the lazy and fully evaluated roadmap
// baselines on generated scenes.

use std::error::Error;

use hiro::bench::{run_method, HiroConfig, Method};
use hiro::roadmap::Roadmap;
use hiro::scenes::generate_dataset;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = HiroConfig::default();
    let roadmap = Roadmap::build(&config.arm, &config.static_obstacles, config.roadmap.clone())?;
    let dataset = generate_dataset(&config.arm, &config.static_obstacles, &roadmap, &config.scene_params(8), 7, 3)?;

    println!("{:<6} {:<6} {:>10} {:>12} {:>10}", "scene", "method", "cost", "exact checks", "ms");
    for scene in 0..dataset.scenes.len() {
        let mut costs = Vec::new();
        for method in [Method::Hiro, Method::Lazy, Method::Full] {
            let r = run_method(&config, &roadmap, &dataset, scene, method)?;
            let cost = r.cost.ok_or("scene unsolved")?;
            println!("{scene:<6} {:<6} {cost:>10.4} {:>12} {:>10.3}", method.name(), r.stats.exact_point_checks, r.stats.wall_ms);
            costs.push(cost);
        }
        // Every method finds a path no shorter than the oracle's.
        for c in costs {
            assert!(c >= dataset.scenes[scene].witness_cost - 1e-9);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
