//! Canonical JSON persistence and content digests.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{Roadmap, RoadmapError, RoadmapParams, FORMAT_VERSION};
use crate::kinematics::{ArmModel, CircleObstacle, JointConfig};

/// Fixed-width decimal with 17 significant digits, exact on re-parse.
pub(crate) fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn num_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| num(*x)).collect();
    format!("[{}]", parts.join(","))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn model_digest(model: &ArmModel) -> String {
    let limits: Vec<f64> = model.joint_limits().iter().flatten().copied().collect();
    let base = model.base();
    let text = format!(
        "arm;links={};base={};limits={};link_radius={}",
        num_list(model.link_lengths()),
        num_list(&[base.x, base.y]),
        num_list(&limits),
        num(model.link_radius())
    );
    sha256_hex(text.as_bytes())
}

pub fn scene_digest(obstacles: &[CircleObstacle]) -> String {
    let mut text = String::from("circles");
    for o in obstacles {
        let _ = write!(text, ";{}", num_list(&[o.cx, o.cy, o.r]));
    }
    sha256_hex(text.as_bytes())
}

impl Roadmap {
    /// Canonical serialization; identical inputs give identical bytes.
    pub fn to_json(&self) -> String {
        let p = &self.params;
        let weights = p.joint_weights.as_deref().map_or("null".to_string(), num_list);
        let mut out = String::new();
        let _ = write!(
            out,
            "{{\"version\":{FORMAT_VERSION},\"params\":{{\"node_count\":{},\"max_neighbors\":{},\"connection_radius\":{},\"edge_resolution\":{},\"joint_weights\":{}}},",
            p.node_count,
            p.max_neighbors,
            num(p.connection_radius),
            num(p.edge_resolution),
            weights
        );
        let _ = write!(
            out,
            "\"model_digest\":\"{}\",\"static_scene_digest\":\"{}\",\"nodes\":[",
            self.model_digest, self.static_scene_digest
        );
        for (i, q) in self.nodes.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&num_list(q.as_slice()));
        }
        out.push_str("],\"edges\":[");
        for (i, (u, v, c)) in self.edges().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "[{u},{v},{}]", num(c));
        }
        out.push_str("]}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self, RoadmapError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct RoadmapFile {
            version: u32,
            params: RoadmapParams,
            model_digest: String,
            static_scene_digest: String,
            nodes: Vec<Vec<f64>>,
            edges: Vec<(usize, usize, f64)>,
        }
        let file: RoadmapFile = serde_json::from_str(text)?;
        if file.version != FORMAT_VERSION {
            return Err(RoadmapError::Malformed(format!("unsupported version {}", file.version)));
        }
        let nodes = file.nodes.into_iter().map(JointConfig::new).collect();
        Roadmap::assemble(nodes, &file.edges, file.params, file.model_digest, file.static_scene_digest)
    }

    /// SHA-256 of the canonical serialization.
    pub fn digest(&self) -> String {
        sha256_hex(self.to_json().as_bytes())
    }
}

pub fn save_roadmap(roadmap: &Roadmap, path: impl AsRef<Path>) -> Result<(), RoadmapError> {
    std::fs::write(path, roadmap.to_json())?;
    Ok(())
}

pub fn load_roadmap(path: impl AsRef<Path>) -> Result<Roadmap, RoadmapError> {
    Roadmap::from_json(&std::fs::read_to_string(path)?)
}

/// Loads and checks that the roadmap matches this arm and static scene.
pub fn load_roadmap_checked(
    path: impl AsRef<Path>,
    model: &ArmModel,
    static_obstacles: &[CircleObstacle],
) -> Result<Roadmap, RoadmapError> {
    let roadmap = load_roadmap(path)?;
    roadmap.verify_scene(model, static_obstacles)?;
    Ok(roadmap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (ArmModel, Vec<CircleObstacle>, Roadmap) {
        let model = ArmModel::new(vec![0.4, 0.3, 0.2]).unwrap();
        let obs = vec![CircleObstacle::new(0.5, 0.2, 0.1)];
        let params = RoadmapParams { node_count: 150, max_neighbors: 5, ..Default::default() };
        let rm = Roadmap::build(&model, &obs, params).unwrap();
        (model, obs, rm)
    }

    #[test]
    fn numbers_round_trip_exactly() {
        for x in [0.1, -1.0 / 3.0, std::f64::consts::PI, 1e-300, 123456.789, -0.0, 5e-324] {
            let back: f64 = serde_json::from_str(&num(x)).unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn save_load_round_trip() {
        let (model, obs, rm) = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rm.json");
        save_roadmap(&rm, &path).unwrap();
        let back = load_roadmap_checked(&path, &model, &obs).unwrap();
        assert_eq!(back, rm);
        assert_eq!(back.to_json(), rm.to_json());
    }

    #[test]
    fn builds_are_byte_identical() {
        let (_, _, a) = sample();
        let (_, _, b) = sample();
        assert_eq!(a.digest(), b.digest());
    }

    #[test]
    fn scene_mismatch_is_reported() {
        let (model, _, rm) = sample();
        let other = [CircleObstacle::new(0.5, 0.2, 0.11)];
        let err = rm.verify_scene(&model, &other).unwrap_err();
        assert!(matches!(err, RoadmapError::DigestMismatch { what: "static scene", .. }));
        let longer = ArmModel::new(vec![0.4, 0.3, 0.25]).unwrap();
        assert!(matches!(rm.verify_scene(&longer, &[CircleObstacle::new(0.5, 0.2, 0.1)]), Err(RoadmapError::DigestMismatch { what: "model", .. })));
    }

    #[test]
    fn truncated_file_fails_to_parse() {
        let (_, _, rm) = sample();
        let text = rm.to_json();
        let cut = &text[..text.len() / 2];
        assert!(matches!(Roadmap::from_json(cut), Err(RoadmapError::Parse(_))));
    }
}
