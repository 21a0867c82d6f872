// Builds a Halton roadmap for the desk arm, saves it and reloads it with
// digest checks.

use std::error::Error;

use hiro::bench::HiroConfig;
use hiro::roadmap::{halton_point, load_roadmap_checked, save_roadmap, Roadmap, RoadmapParams};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for i in 1..=4 {
        println!("halton[{i}] = {:?}", halton_point(i, 3));
    }

    let config = HiroConfig::default();
    let params = RoadmapParams { node_count: 500, ..config.roadmap.clone() };
    let roadmap = Roadmap::build(&config.arm, &config.static_obstacles, params)?;
    let isolated = (0..roadmap.node_count()).filter(|&v| roadmap.neighbors(v).is_empty()).count();
    println!("{} nodes, {} edges, {isolated} isolated", roadmap.node_count(), roadmap.edge_count());

    let path = std::env::temp_dir().join(format!("hiro_roadmap_{}.json", std::process::id()));
    save_roadmap(&roadmap, &path)?;
    let loaded = load_roadmap_checked(&path, &config.arm, &config.static_obstacles)?;
    std::fs::remove_file(&path)?;
    assert_eq!(loaded.digest(), roadmap.digest());
    println!("reloaded, digest {}", &roadmap.digest()[..16]);

    // A roadmap built for another static scene is rejected.
    let other = Roadmap::build(&config.arm, &[], RoadmapParams { node_count: 50, ..RoadmapParams::default() })?;
    assert!(other.verify_scene(&config.arm, &config.static_obstacles).is_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
