//! Backtracking repair of a fuzzily certified path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{all_closest, min_clearance_unchecked, ArmModel, CircleObstacle, JointConfig, Point2};

use super::edge::{check_edge_dense_skipping, subdivisions, DenseVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrectionOptions {
    /// Clearance a pushed configuration must reach (m).
    pub margin: f64,
    /// Largest joint-space step per push iteration (rad).
    pub step: f64,
    pub max_iters: usize,
    /// Sampling step used to re-validate edges (rad).
    pub resolution: f64,
}

impl Default for CorrectionOptions {
    fn default() -> Self {
        CorrectionOptions { margin: 0.02, step: 0.1, max_iters: 50, resolution: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedPath {
    pub path: Vec<JointConfig>,
    /// Indices into `path` of the inserted bridge configurations.
    pub bridges: Vec<usize>,
    /// Exact point checks spent on re-validation.
    pub checks: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("edge {edge_index} of the path could not be repaired")]
pub struct CorrectionFailure {
    /// Index `i` of the failed edge `path[i] -> path[i + 1]`.
    pub edge_index: usize,
    pub checks: usize,
}

/// Pushes `q` away from every contact until all clearances reach
/// `opts.margin`. Returns `None` after `opts.max_iters` unsuccessful steps.
pub fn push_out(
    model: &ArmModel,
    q: &JointConfig,
    obstacles: &[CircleObstacle],
    opts: &CorrectionOptions,
) -> Option<JointConfig> {
    let target = 1.25 * opts.margin;
    let mut q = q.clone();
    let dof = model.dof();
    for _ in 0..=opts.max_iters {
        let contacts = all_closest(model, &q, obstacles).ok()?;
        if contacts.iter().all(|(_, c)| c.distance >= opts.margin) {
            return Some(q);
        }
        let joints = crate::kinematics::forward_kinematics(model, &q).ok()?;
        let mut delta = vec![0.0; dof];
        for (_, c) in contacts.iter().filter(|(_, c)| c.distance < target) {
            let away = if c.direction == Point2::zeros() {
                let link = joints[c.link + 1] - joints[c.link];
                -Point2::new(-link.y, link.x).normalize()
            } else {
                -c.direction
            };
            // Gradient of the clearance: joint k moves the contact along perp(C - p_k).
            let grad: Vec<f64> = (0..dof)
                .map(|k| {
                    if k > c.link {
                        return 0.0;
                    }
                    let r = c.point - joints[k];
                    away.dot(&Point2::new(-r.y, r.x))
                })
                .collect();
            let norm2: f64 = grad.iter().map(|g| g * g).sum();
            if norm2 < 1e-12 {
                continue;
            }
            let scale = (target - c.distance) / norm2;
            for (d, g) in delta.iter_mut().zip(&grad) {
                *d += scale * g;
            }
        }
        let len = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
        if len < 1e-12 {
            return None;
        }
        let shrink = (opts.step / len).min(1.0);
        for (x, d) in q.as_mut_slice().iter_mut().zip(&delta) {
            *x += shrink * d;
        }
        model.clamp(&mut q);
    }
    None
}

/// Re-validates every edge densely (with clearance-based skipping, which
/// gives the same verdict as plain sampling). A violating edge is bridged through the
/// pushed-out midpoint of its colliding run; each half is repaired the same
/// way up to `MAX_BRIDGES_PER_EDGE` bridges, else the edge fails.
pub fn correct_path(
    model: &ArmModel,
    path: &[JointConfig],
    obstacles: &[CircleObstacle],
    opts: &CorrectionOptions,
) -> Result<CorrectedPath, CorrectionFailure> {
    let mut out = Vec::with_capacity(path.len());
    let mut checks = 0;
    let mut bridges = Vec::new();
    if let Some(first) = path.first() {
        out.push(first.clone());
    }
    for (i, w) in path.windows(2).enumerate() {
        let mut budget = MAX_BRIDGES_PER_EDGE;
        let mut inner = Vec::new();
        if !repair(model, &w[0], &w[1], obstacles, opts, &mut budget, &mut checks, &mut inner) {
            return Err(CorrectionFailure { edge_index: i, checks });
        }
        bridges.extend(out.len()..out.len() + inner.len());
        out.extend(inner);
        out.push(w[1].clone());
    }
    Ok(CorrectedPath { path: out, bridges, checks })
}

const MAX_BRIDGES_PER_EDGE: usize = 8;

#[allow(clippy::too_many_arguments)]
fn repair(
    model: &ArmModel,
    qa: &JointConfig,
    qb: &JointConfig,
    obstacles: &[CircleObstacle],
    opts: &CorrectionOptions,
    budget: &mut usize,
    checks: &mut usize,
    inner: &mut Vec<JointConfig>,
) -> bool {
    let res = check_edge_dense_skipping(model, qa, qb, obstacles, opts.resolution);
    *checks += res.checks;
    let DenseVerdict::Colliding { t } = res.verdict else {
        return true;
    };
    if t == 0.0 || t == 1.0 || *budget == 0 {
        return false;
    }
    *budget -= 1;
    // Walk to the end of the colliding run and push from its middle.
    let n = subdivisions(qa.distance(qb) / opts.resolution);
    let mut joints = Vec::with_capacity(model.dof() + 1);
    let mut i_out = (t * n as f64).round() as usize;
    while i_out < n {
        i_out += 1;
        *checks += 1;
        let q = qa.lerp(qb, i_out as f64 / n as f64);
        if min_clearance_unchecked(model, q.as_slice(), obstacles, &mut joints) > 0.0 {
            break;
        }
    }
    let t_mid = 0.5 * (t + i_out as f64 / n as f64);
    let Some(bridge) = push_out(model, &qa.lerp(qb, t_mid), obstacles, opts) else {
        return false;
    };
    if !repair(model, qa, &bridge, obstacles, opts, budget, checks, inner) {
        return false;
    }
    inner.push(bridge.clone());
    repair(model, &bridge, qb, obstacles, opts, budget, checks, inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::min_clearance;
    use crate::safezone::check_edge_dense;

    #[test]
    fn valid_path_is_unchanged() {
        let m = ArmModel::new(vec![1.0, 1.0]).unwrap();
        let path = vec![
            JointConfig::new(vec![0.0, 0.0]),
            JointConfig::new(vec![0.2, 0.1]),
            JointConfig::new(vec![0.4, 0.3]),
        ];
        let r = correct_path(&m, &path, &[CircleObstacle::new(-3.0, 0.0, 0.2)], &CorrectionOptions::default()).unwrap();
        assert_eq!(r.path, path);
        assert!(r.bridges.is_empty());
    }

    #[test]
    fn shallow_penetration_is_pushed_to_margin() {
        let m = ArmModel::new(vec![1.0, 1.0]).unwrap();
        // Link 1 runs along the x axis from 1 to 2; this circle overlaps it by 0.05.
        let obs = [CircleObstacle::new(1.5, 0.25, 0.3)];
        let q = JointConfig::new(vec![0.0, 0.0]);
        assert!((min_clearance(&m, &q, &obs).unwrap() + 0.05).abs() < 1e-12);
        let opts = CorrectionOptions { margin: 0.1, ..Default::default() };
        let pushed = push_out(&m, &q, &obs, &opts).expect("push succeeds");
        assert!(min_clearance(&m, &pushed, &obs).unwrap() >= 0.1);
    }

    #[test]
    fn grazing_edge_gets_bridged() {
        let m = ArmModel::new(vec![1.0, 1.0]).unwrap();
        // The tip sweeps through x = 2 at the middle of the edge, 0.01 into the circle.
        let obs = [CircleObstacle::new(2.19, 0.0, 0.2)];
        let path = vec![JointConfig::new(vec![0.0, -0.4]), JointConfig::new(vec![0.0, 0.4])];
        assert!(!check_edge_dense(&m, &path[0], &path[1], &obs, 1e-3).is_valid());
        let r = correct_path(&m, &path, &obs, &CorrectionOptions::default()).unwrap();
        assert!(!r.bridges.is_empty());
        assert_eq!(r.path.len(), 2 + r.bridges.len());
        for &i in &r.bridges {
            assert!(min_clearance(&m, &r.path[i], &obs).unwrap() >= CorrectionOptions::default().margin);
        }
        assert_eq!(r.path.first(), path.first());
        assert_eq!(r.path.last(), path.last());
        for w in r.path.windows(2) {
            assert!(check_edge_dense(&m, &w[0], &w[1], &obs, 1e-3).is_valid());
        }
    }

    #[test]
    fn one_dof_wall_cannot_be_bridged() {
        let m = ArmModel::new(vec![1.0]).unwrap();
        let obs = [CircleObstacle::new(1.0, 0.0, 0.3)];
        let path = vec![
            JointConfig::new(vec![-2.0]),
            JointConfig::new(vec![-1.0]),
            JointConfig::new(vec![1.0]),
        ];
        let err = correct_path(&m, &path, &obs, &CorrectionOptions::default()).unwrap_err();
        assert_eq!(err.edge_index, 1);
    }
}
