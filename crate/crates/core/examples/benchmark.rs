// Runs a small benchmark suite and prints the summary tables and
// improvement histograms.

use std::error::Error;

use hiro::bench::{run_bench, summarize, HiroConfig, Method};
use hiro::roadmap::Roadmap;
use hiro::scenes::generate_dataset;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = HiroConfig::default();
    let roadmap = Roadmap::build(&config.arm, &config.static_obstacles, config.roadmap.clone())?;
    let datasets = [4, 16]
        .iter()
        .map(|&k| generate_dataset(&config.arm, &config.static_obstacles, &roadmap, &config.scene_params(k), 1, 5))
        .collect::<Result<Vec<_>, _>>()?;

    let report = run_bench(&config, &roadmap, &datasets, &[Method::Hiro, Method::Lazy, Method::Full], 3)?;
    print!("{}", summarize(&report));
    for r in &report.records {
        assert!(r.counters_repeatable, "counters changed between repetitions");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
