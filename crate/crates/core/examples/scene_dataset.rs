// Generates a reproducible scene dataset, writes it as JSON and
// re-validates it.

use std::error::Error;

use hiro::bench::HiroConfig;
use hiro::roadmap::Roadmap;
use hiro::scenes::{edge_invalidation_rate, generate_dataset, load_dataset, save_dataset, scene_seed};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = HiroConfig::default();
    let roadmap = Roadmap::build(&config.arm, &config.static_obstacles, config.roadmap.clone())?;
    let params = config.scene_params(12);
    let dataset = generate_dataset(&config.arm, &config.static_obstacles, &roadmap, &params, 42, 4)?;

    for (i, s) in dataset.scenes.iter().enumerate() {
        let rate = edge_invalidation_rate(&config.arm, &roadmap, &s.obstacles, 0.01);
        println!(
            "scene {i}: seed {:016x}, witness cost {:.3} over {} nodes, {:.1}% of edges blocked",
            s.seed,
            s.witness_cost,
            s.witness.len(),
            100.0 * rate
        );
        assert_eq!(s.seed, scene_seed(42, i));
    }

    let path = std::env::temp_dir().join(format!("hiro_dataset_{}.json", std::process::id()));
    save_dataset(&dataset, &path)?;
    let loaded = load_dataset(&path)?;
    std::fs::remove_file(&path)?;
    loaded.verify(&config.arm, &config.static_obstacles, &roadmap, true)?;
    assert_eq!(loaded, dataset);

    // The same seed gives the same dataset.
    let again = generate_dataset(&config.arm, &config.static_obstacles, &roadmap, &params, 42, 4)?;
    assert_eq!(again.to_json(), dataset.to_json());
    println!("dataset verified and reproducible");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
