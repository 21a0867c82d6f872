//! Heuristics-informed lazy search on a Halton roadmap for planar arms,
//! with safe-zone fuzzy collision checking.

pub mod kinematics;
pub mod safezone;
pub mod roadmap;
pub mod graph;
pub mod heuristics;
pub mod search;
pub mod scenes;
pub mod bench;
