// Backward shortest-path tree from the goal, repaired incrementally as
// nodes and edges are invalidated.

use std::error::Error;

use hiro::graph::dijkstra;
use hiro::heuristics::HeuristicsTree;
use hiro::kinematics::JointConfig;
use hiro::roadmap::{Roadmap, RoadmapParams};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // 4x4 grid graph with unit edges; node 15 is the goal.
    let nodes = (0..16).map(|i| JointConfig::new(vec![(i % 4) as f64, (i / 4) as f64])).collect();
    let mut edges = Vec::new();
    for i in 0..16usize {
        if i % 4 < 3 {
            edges.push((i, i + 1, 1.0));
        }
        if i < 12 {
            edges.push((i, i + 4, 1.0));
        }
    }
    let graph = Roadmap::from_edges(nodes, &edges, RoadmapParams::default())?;
    let mut tree = HeuristicsTree::init(&graph, 15, 0)?;
    println!("start estimate {:?}, {} expansions", tree.heuristic_of(0), tree.expansions());

    let report = tree.invalidate_node(&graph, 10);
    println!("node 10 invalid: {} estimates changed", report.changed.len());
    let report = tree.invalidate_edge(&graph, 11, 15);
    println!("edge 11-15 invalid: {} estimates changed", report.changed.len());
    let h = tree.lookup(&graph, 0)?;
    println!("start estimate now {h:?}");

    // The repaired estimates equal a fresh search on the residual graph.
    let dist = dijkstra(&graph, 15, |v| v != 10, |u, v| (u.min(v), u.max(v)) != (11, 15));
    for v in tree.settled_nodes().collect::<Vec<_>>() {
        assert_eq!(tree.heuristic_of(v).map(|h| h.c_reach), Some(dist[v]));
    }
    assert_eq!(h.c_reach, 6.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
