//! Jacobian safe zones around a single configuration.
//!
//! For every (link, obstacle) pair with clearance `d` and unit direction `n`
//! toward the obstacle, every point of the link sits in the half-plane
//! `(x - C) . n <= 0` while the inflated obstacle lies in `(x - C) . n >= d`.
//! A joint displacement is therefore safe for that pair as long as the
//! component of every link point's motion along `n` stays below `d`. That
//! component is affine along the straight link, so only the two link
//! endpoints need bounding.
//!
//! Each endpoint's motion along `n` is bounded by its rotated Jacobian row
//! (linear term) plus a per-link curvature term. The bound is convex in the
//! joint displacement, so it is enough to enforce it at the vertices of the
//! zone polytope `sum_k |dq_k| / bound_k(sign dq_k) < 1`. The vertex
//! intercept for joint `k` reduces to `d / (J_max + eps)` whenever the
//! curvature term vanishes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{
    segment_closest, ArmModel, CircleObstacle, JointConfig, KinematicsError, Point2,
};

/// Tunables for zone construction and fuzzy edge certification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZoneOptions {
    /// Singularity guard added to the rotated Jacobian bound.
    pub epsilon: f64,
    /// Largest displacement any zone allows per joint (rad), at most pi.
    pub fallback_bound: f64,
    /// Smallest coverage step in edge parameter `t` before the checker
    /// falls back to exact grid checks.
    pub min_progress: f64,
    /// Iteration cap for edge certification; `None` uses `10 * ceil(len / min_progress)`.
    pub max_iterations: Option<usize>,
}

impl Default for ZoneOptions {
    fn default() -> Self {
        ZoneOptions {
            epsilon: 1e-6,
            fallback_bound: PI / 2.0,
            min_progress: 1e-3,
            max_iterations: None,
        }
    }
}

impl ZoneOptions {
    pub fn validate(&self) -> Result<(), ZoneError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(ZoneError::InvalidOptions(format!("epsilon {} must be positive", self.epsilon)));
        }
        if !(self.fallback_bound > 0.0 && self.fallback_bound <= PI) {
            return Err(ZoneError::InvalidOptions(format!(
                "fallback bound {} must lie in (0, pi]",
                self.fallback_bound
            )));
        }
        if !(self.min_progress > 0.0 && self.min_progress < 1.0) {
            return Err(ZoneError::InvalidOptions(format!(
                "min_progress {} must lie in (0, 1)",
                self.min_progress
            )));
        }
        Ok(())
    }
}

/// The offending pair when a configuration is not collision-free.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("link {link} penetrates obstacle {obstacle} by {penetration:e} m")]
pub struct InCollision {
    pub link: usize,
    pub obstacle: usize,
    /// Non-negative penetration depth (`-clearance`).
    pub penetration: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZoneError {
    #[error(transparent)]
    InCollision(#[from] InCollision),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("invalid zone options: {0}")]
    InvalidOptions(String),
}

/// `sum_j a_j dq_j + b < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub a: Vec<f64>,
    pub b: f64,
}

impl Hyperplane {
    pub fn value(&self, dq: &[f64]) -> f64 {
        self.a.iter().zip(dq).map(|(a, d)| a * d).sum::<f64>() + self.b
    }
}

/// Certified collision-free region around an anchor configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SafeZone {
    anchor: JointConfig,
    dq_min: Vec<f64>,
    dq_max: Vec<f64>,
}

impl SafeZone {
    pub fn anchor(&self) -> &JointConfig {
        &self.anchor
    }

    /// Per-joint negative intercepts (all `< 0`).
    pub fn dq_min(&self) -> &[f64] {
        &self.dq_min
    }

    /// Per-joint positive intercepts (all `> 0`).
    pub fn dq_max(&self) -> &[f64] {
        &self.dq_max
    }

    /// Plane through the positive intercepts.
    pub fn plane_max(&self) -> Hyperplane {
        Hyperplane { a: self.dq_max.iter().map(|v| 1.0 / v).collect(), b: -1.0 }
    }

    /// Plane through the negative intercepts.
    pub fn plane_min(&self) -> Hyperplane {
        Hyperplane { a: self.dq_min.iter().map(|v| 1.0 / v).collect(), b: -1.0 }
    }

    /// Zone gauge of a displacement: `< 1` inside, `1` on the boundary.
    ///
    /// Each orthant is bounded by the facet through that orthant's intercepts;
    /// the positive and negative orthant facets are `plane_max` and `plane_min`.
    pub fn gauge(&self, dq: &[f64]) -> f64 {
        dq.iter()
            .enumerate()
            .map(|(k, v)| if *v >= 0.0 { v / self.dq_max[k] } else { v / self.dq_min[k] })
            .sum()
    }

    pub fn contains(&self, q_test: &JointConfig) -> bool {
        if q_test.dof() != self.anchor.dof() {
            return false;
        }
        let dq = q_test.delta_from(&self.anchor);
        self.gauge(&dq) < 1.0
    }

    /// Parameter interval of segment `q_a -> q_b` covered by this zone,
    /// given that the anchor sits at parameter `t_anchor` on the segment.
    pub fn coverage_at(&self, q_a: &JointConfig, q_b: &JointConfig, t_anchor: f64) -> (f64, f64) {
        let dir = q_b.delta_from(q_a);
        let (mut fwd, mut back) = (0.0, 0.0);
        for (k, d) in dir.iter().enumerate() {
            if *d > 0.0 {
                fwd += d / self.dq_max[k];
                back += -d / self.dq_min[k];
            } else if *d < 0.0 {
                fwd += d / self.dq_min[k];
                back += -d / self.dq_max[k];
            }
        }
        let hi = if fwd > 0.0 { (t_anchor + 1.0 / fwd).min(1.0) } else { 1.0 };
        let lo = if back > 0.0 { (t_anchor - 1.0 / back).max(0.0) } else { 0.0 };
        (lo.min(t_anchor), hi.max(t_anchor))
    }

    /// Covered parameter interval of `q_a -> q_b`; the anchor is projected
    /// onto the segment first.
    pub fn segment_coverage(&self, q_a: &JointConfig, q_b: &JointConfig) -> (f64, f64) {
        let dir = q_b.delta_from(q_a);
        let len2: f64 = dir.iter().map(|v| v * v).sum();
        if len2 == 0.0 {
            return (0.0, 0.0);
        }
        let rel = self.anchor.delta_from(q_a);
        let t = (rel.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>() / len2).clamp(0.0, 1.0);
        self.coverage_at(q_a, q_b, t)
    }
}

/// Smallest positive root `delta` of `g delta + k2 delta^2 / 2 = d`, shrunk
/// so that `1/delta = 1/root + eps/d`.
fn intercept(d: f64, g: f64, k2: f64, eps: f64) -> f64 {
    let disc = (g * g + 2.0 * k2 * d).sqrt();
    let root = if g >= 0.0 {
        let den = g + disc;
        if den > 0.0 { 2.0 * d / den } else { f64::INFINITY }
    } else if k2 > 0.0 {
        (disc - g) / k2
    } else {
        f64::INFINITY
    };
    1.0 / (1.0 / root + eps / d)
}

/// Reusable scratch space for zone construction.
#[derive(Debug, Default)]
pub(crate) struct ZoneScratch {
    joints: Vec<Point2>,
    headings: Vec<Point2>,
    s: Vec<f64>,
    kp: Vec<f64>,
    km: Vec<f64>,
}

/// Curvature slack constants for displacements up to `span` rad.
fn curvature_constants(span: f64) -> (f64, f64) {
    let a = (span - span.sin()) / (span * span);
    let b = (1.0 - span.cos()) / (span * span);
    (a, b)
}

/// Computes per-joint intercepts, or the deepest penetration.
pub(crate) fn zone_bounds(
    model: &ArmModel,
    q: &[f64],
    obstacles: &[CircleObstacle],
    opts: &ZoneOptions,
    scratch: &mut ZoneScratch,
) -> Result<(Vec<f64>, Vec<f64>), InCollision> {
    let n = model.dof();
    let span = opts.fallback_bound;
    let (ca, cb) = curvature_constants(span);
    let mut up = vec![span; n];
    let mut down = vec![span; n];
    let mut worst: Option<InCollision> = None;

    model.joint_positions_into(q, &mut scratch.joints);
    scratch.headings.clear();
    scratch.headings.extend(scratch.joints.windows(2).zip(model.link_lengths()).map(|(w, l)| (w[1] - w[0]) / *l));
    let lengths = model.link_lengths();

    for (i, obs) in obstacles.iter().enumerate() {
        for j in 0..n {
            let cp = segment_closest(j, scratch.joints[j], scratch.joints[j + 1], obs, model.link_radius());
            if cp.distance <= 0.0 {
                let pen = -cp.distance;
                if worst.is_none_or(|w| pen > w.penetration) {
                    worst = Some(InCollision { link: j, obstacle: i, penetration: pen });
                }
                continue;
            }
            if worst.is_some() {
                continue;
            }
            let dir = cp.direction;
            let d = cp.distance;
            scratch.s.clear();
            scratch.kp.clear();
            scratch.km.clear();
            for m in 0..=j {
                let u = scratch.headings[m];
                // s = n . perp(u), c = n . u
                let s = -dir.x * u.y + dir.y * u.x;
                let c = dir.dot(&u);
                let cos_term = if c < 0.0 { -c } else { -2.0 * c * cb };
                let kp = (if s < 0.0 { -2.0 * s * ca } else { 0.0 } + cos_term).max(0.0);
                let km = (if s > 0.0 { 2.0 * s * ca } else { 0.0 } + cos_term).max(0.0);
                scratch.s.push(lengths[m] * s);
                scratch.kp.push(lengths[m] * kp);
                scratch.km.push(lengths[m] * km);
            }
            // Suffix sums over links k..=j move the distal endpoint, links k..j the proximal one.
            let (mut g_end, mut kp_end, mut km_end) = (0.0, 0.0, 0.0);
            let (mut g_start, mut kp_start, mut km_start) = (0.0, 0.0, 0.0);
            for k in (0..=j).rev() {
                g_end += scratch.s[k];
                kp_end += scratch.kp[k];
                km_end += scratch.km[k];
                let mut hi = intercept(d, g_end, kp_end, opts.epsilon);
                let mut lo = intercept(d, -g_end, km_end, opts.epsilon);
                if k < j {
                    g_start += scratch.s[k];
                    kp_start += scratch.kp[k];
                    km_start += scratch.km[k];
                    hi = hi.min(intercept(d, g_start, kp_start, opts.epsilon));
                    lo = lo.min(intercept(d, -g_start, km_start, opts.epsilon));
                }
                up[k] = up[k].min(hi);
                down[k] = down[k].min(lo);
            }
        }
    }
    match worst {
        Some(w) => Err(w),
        None => Ok((down.into_iter().map(|v| -v).collect(), up)),
    }
}

/// Builds the safe zone at `q`, or reports the deepest penetrating pair.
pub fn compute_safe_zone(
    model: &ArmModel,
    q: &JointConfig,
    obstacles: &[CircleObstacle],
    opts: &ZoneOptions,
) -> Result<SafeZone, ZoneError> {
    model.check_dimension(q)?;
    opts.validate()?;
    let mut scratch = ZoneScratch::default();
    let (dq_min, dq_max) = zone_bounds(model, q.as_slice(), obstacles, opts, &mut scratch)?;
    Ok(SafeZone { anchor: q.clone(), dq_min, dq_max })
}

pub(crate) fn zone_with_scratch(
    model: &ArmModel,
    q: &JointConfig,
    obstacles: &[CircleObstacle],
    opts: &ZoneOptions,
    scratch: &mut ZoneScratch,
) -> Result<SafeZone, InCollision> {
    let (dq_min, dq_max) = zone_bounds(model, q.as_slice(), obstacles, opts, scratch)?;
    Ok(SafeZone { anchor: q.clone(), dq_min, dq_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::min_clearance;

    fn unit2() -> ArmModel {
        ArmModel::new(vec![1.0, 1.0]).unwrap()
    }

    fn zone(obs: &[CircleObstacle]) -> SafeZone {
        compute_safe_zone(&unit2(), &JointConfig::new(vec![0.0, 0.0]), obs, &ZoneOptions::default()).unwrap()
    }

    #[test]
    fn single_circle_intercepts() {
        let z = zone(&[CircleObstacle::new(2.0, 2.0, 0.5)]);
        // link 1: d = 1.5, J_max = [2, 1]; link 0's 1.7361 / 0.8944 is looser.
        assert!((z.dq_max()[0] - 1.5 / (2.0 + 1e-6)).abs() < 1e-12);
        assert!((z.dq_max()[1] - 1.5 / (1.0 + 1e-6)).abs() < 1e-12);
        assert!((z.dq_max()[0] - 0.75).abs() < 1e-6);
        assert!((z.dq_max()[1] - 1.5).abs() < 2e-6);
        assert_eq!(z.dq_min(), &[-PI / 2.0, -PI / 2.0]);
    }

    #[test]
    fn single_circle_claims_hold_under_sampling() {
        let model = unit2();
        let obs = [CircleObstacle::new(2.0, 2.0, 0.5)];
        let z = zone(&obs);
        let steps = 200;
        for a in 0..=steps {
            for b in 0..=steps {
                let dq = [
                    z.dq_min()[0] + (z.dq_max()[0] - z.dq_min()[0]) * a as f64 / steps as f64,
                    z.dq_min()[1] + (z.dq_max()[1] - z.dq_min()[1]) * b as f64 / steps as f64,
                ];
                if z.gauge(&dq) < 1.0 {
                    let q = JointConfig::new(dq.to_vec());
                    assert!(min_clearance(&model, &q, &obs).unwrap() > 0.0, "{dq:?}");
                }
            }
        }
    }

    #[test]
    fn proximal_endpoint_is_bounded_by_inner_links() {
        // Link 2 sits 5 mm from the obstacle; moving joints 0 and 1 pushes its
        // proximal end into it even though the distal end swings away.
        let model = ArmModel::new(vec![0.16542649223992778, 0.2547400210231372, 0.7127933345396569])
            .unwrap()
            .with_link_radius(0.007920526233082148)
            .unwrap();
        let q = JointConfig::new(vec![-0.7693744332857508, -0.5541149247785753, -2.1675520644148105]);
        let obs = [CircleObstacle::new(0.049356605635974236, -0.21196554362389525, 0.08248651852922996)];
        let z = compute_safe_zone(&model, &q, &obs, &ZoneOptions::default()).unwrap();
        let bad = JointConfig::new(vec![q[0] + 0.096, q[1] + 0.043, q[2] + 0.0017]);
        assert!(min_clearance(&model, &bad, &obs).unwrap() < 0.0);
        assert!(!z.contains(&bad));
        for s in 1..=100 {
            let t = s as f64 / 100.0;
            let p = JointConfig::new(vec![q[0] + t * z.dq_max()[0] * 0.999, q[1], q[2]]);
            assert!(min_clearance(&model, &p, &obs).unwrap() > 0.0);
        }
    }

    #[test]
    fn no_obstacles_gives_fallback_box() {
        let z = zone(&[]);
        assert_eq!(z.dq_max(), &[PI / 2.0, PI / 2.0]);
        assert_eq!(z.dq_min(), &[-PI / 2.0, -PI / 2.0]);
        assert_eq!(z.plane_max().a, vec![2.0 / PI, 2.0 / PI]);
        assert_eq!(z.plane_max().b, -1.0);
        assert_eq!(z.plane_min().a, vec![-2.0 / PI, -2.0 / PI]);
    }

    #[test]
    fn touching_obstacle_is_in_collision() {
        let err = compute_safe_zone(
            &unit2(),
            &JointConfig::new(vec![0.0, 0.0]),
            &[CircleObstacle::new(1.5, 0.5, 0.5)],
            &ZoneOptions::default(),
        )
        .unwrap_err();
        match err {
            ZoneError::InCollision(c) => {
                assert_eq!(c.obstacle, 0);
                assert!(c.penetration >= 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn contains_examples() {
        let z = zone(&[CircleObstacle::new(2.0, 2.0, 0.5)]);
        assert!(z.contains(&JointConfig::new(vec![0.0, 0.0])));
        // 0.2/0.75 + 0.2/1.5 = 0.4
        let dq = [0.2, 0.2];
        assert!((z.gauge(&dq) - 0.4).abs() < 1e-5);
        assert!(z.contains(&JointConfig::new(dq.to_vec())));
        assert!(z.plane_max().value(&dq) < 0.0 && z.plane_min().value(&dq) < 0.0);
        for delta in [1e-9, 1e-3, 0.5] {
            assert!(!z.contains(&JointConfig::new(vec![z.dq_max()[0] + delta, 0.0])));
        }
        assert!(!z.contains(&JointConfig::new(vec![0.0])));
    }

    #[test]
    fn containment_implies_planes_and_box() {
        let z = compute_safe_zone(
            &ArmModel::new(vec![0.6, 0.4, 0.3]).unwrap(),
            &JointConfig::new(vec![0.3, -0.4, 0.9]),
            &[CircleObstacle::new(0.5, 0.6, 0.1), CircleObstacle::new(-0.4, -0.2, 0.2)],
            &ZoneOptions::default(),
        )
        .unwrap();
        let pts = [-1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0];
        for a in pts {
            for b in pts {
                for c in pts {
                    let dq = [a * 0.3, b * 0.3, c * 0.3];
                    let q = JointConfig::new(z.anchor().as_slice().iter().zip(&dq).map(|(x, d)| x + d).collect());
                    if z.contains(&q) {
                        assert!(z.plane_max().value(&dq) < 0.0);
                        assert!(z.plane_min().value(&dq) < 0.0);
                        for k in 0..3 {
                            assert!(dq[k] >= z.dq_min()[k] && dq[k] <= z.dq_max()[k]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn coverage_examples() {
        let z = zone(&[]);
        let qa = JointConfig::new(vec![0.0, 0.0]);
        assert_eq!(z.segment_coverage(&qa, &JointConfig::new(vec![0.1, 0.1])), (0.0, 1.0));
        assert_eq!(z.segment_coverage(&qa, &qa), (0.0, 0.0));

        // Anchor at t = 0, edge along joint 0 of length 2.5 * dq_max: boundary at t = 0.4.
        let z = zone(&[CircleObstacle::new(2.0, 2.0, 0.5)]);
        let qb = JointConfig::new(vec![2.5 * z.dq_max()[0], 0.0]);
        let (lo, hi) = z.segment_coverage(&qa, &qb);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.4).abs() < 1e-12);
        // Bisection on membership agrees with the closed form.
        let (mut a, mut b) = (0.0, 1.0);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if z.contains(&qa.lerp(&qb, m)) { a = m } else { b = m }
        }
        assert!((a - 0.4).abs() < 1e-9);
    }

    #[test]
    fn intercept_reduces_to_linear_form() {
        assert!((intercept(1.5, 2.0, 0.0, 1e-6) - 1.5 / (2.0 + 1e-6)).abs() < 1e-15);
        assert!((intercept(1.0, 0.0, 0.0, 1e-6) - 1e6).abs() < 1e-3);
        // Moving away with curvature: root of -g x + k x^2 / 2 = d.
        let x = intercept(0.5, -1.0, 2.0, 0.0);
        assert!((-x + x * x - 0.5).abs() < 1e-12);
    }

    #[test]
    fn curvature_constants_bound_the_remainders() {
        // The slack constants must dominate the exact remainders on (0, span].
        for span in [0.3, 1.0, PI / 2.0, 2.5, PI] {
            let (a, b) = curvature_constants(span);
            for i in 1..=2000 {
                let x = span * i as f64 / 2000.0;
                assert!((x - x.sin()) / (x * x) <= a + 1e-15);
                assert!((1.0 - x.cos()) / (x * x) >= b - 1e-15);
                assert!((1.0 - x.cos()) / (x * x) <= 0.5 + 1e-15);
            }
        }
    }

    #[test]
    fn options_are_validated() {
        let bad = ZoneOptions { fallback_bound: 4.0, ..ZoneOptions::default() };
        assert!(bad.validate().is_err());
        let bad = ZoneOptions { epsilon: 0.0, ..ZoneOptions::default() };
        assert!(bad.validate().is_err());
    }
}
