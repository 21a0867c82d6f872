//! Planar revolute-chain geometry.
//!
//! An [`ArmModel`] is a serial chain of straight links rotating in the plane.
//! Joint `k` sits at the proximal end of link `k`; the absolute heading of
//! link `k` is the sum of joint angles `0..=k`. Obstacles are circles, and a
//! link is treated as a segment inflated by `link_radius`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix2xX, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A 2D point or vector in the workspace plane (metres).
pub type Point2 = Vector2<f64>;

/// Tolerance for "this point lies on the link" checks.
pub const ON_LINK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("configuration has {got} joints, model has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("link index {index} out of range for a {dof}-link arm")]
    LinkIndex { index: usize, dof: usize },
    #[error("point is {distance:e} m away from link {link}")]
    PointNotOnLink { link: usize, distance: f64 },
    #[error("invalid arm model: {0}")]
    InvalidModel(String),
}

/// Vector of joint angles (rad).
#[derive(Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct JointConfig(Vec<f64>);

impl JointConfig {
    pub fn new(q: Vec<f64>) -> Self {
        JointConfig(q)
    }

    pub fn zeros(dof: usize) -> Self {
        JointConfig(vec![0.0; dof])
    }

    pub fn dof(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Point at parameter `t` on the straight segment `self -> other`.
    pub fn lerp(&self, other: &JointConfig, t: f64) -> JointConfig {
        JointConfig(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        )
    }

    /// Euclidean distance in configuration space.
    pub fn distance(&self, other: &JointConfig) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `self - other`, component-wise.
    pub fn delta_from(&self, other: &JointConfig) -> Vec<f64> {
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }
}

impl fmt::Debug for JointConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{:?}", self.0)
    }
}

impl From<Vec<f64>> for JointConfig {
    fn from(q: Vec<f64>) -> Self {
        JointConfig(q)
    }
}

impl std::ops::Index<usize> for JointConfig {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

/// Circular obstacle in the workspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleObstacle {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl CircleObstacle {
    pub fn new(cx: f64, cy: f64, r: f64) -> Self {
        CircleObstacle { cx, cy, r }
    }

    pub fn center(&self) -> Point2 {
        Point2::new(self.cx, self.cy)
    }
}

/// Closest point between one link and one obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPoint {
    pub link: usize,
    /// Point on the link centre-line.
    pub point: Point2,
    /// Surface-to-surface clearance; negative when penetrating.
    pub distance: f64,
    /// Unit vector from `point` toward the obstacle centre. Zero when the
    /// centre lies exactly on the link.
    pub direction: Point2,
}

#[derive(Debug, Clone, Deserialize)]
struct ArmModelRepr {
    link_lengths: Vec<f64>,
    #[serde(default)]
    base: [f64; 2],
    #[serde(default)]
    joint_limits: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    link_radius: f64,
}

/// Planar N-link revolute arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArmModelRepr")]
pub struct ArmModel {
    link_lengths: Vec<f64>,
    base: [f64; 2],
    joint_limits: Vec<[f64; 2]>,
    link_radius: f64,
}

impl TryFrom<ArmModelRepr> for ArmModel {
    type Error = KinematicsError;

    fn try_from(r: ArmModelRepr) -> Result<Self, Self::Error> {
        let limits = r
            .joint_limits
            .unwrap_or_else(|| vec![[-PI, PI]; r.link_lengths.len()]);
        ArmModel::with_limits(r.link_lengths, limits)?
            .with_base(Point2::new(r.base[0], r.base[1]))
            .with_link_radius(r.link_radius)
    }
}

impl ArmModel {
    /// Arm based at the origin with joint limits `[-pi, pi]` and zero link radius.
    pub fn new(link_lengths: Vec<f64>) -> Result<Self, KinematicsError> {
        let n = link_lengths.len();
        Self::with_limits(link_lengths, vec![[-PI, PI]; n])
    }

    pub fn with_limits(
        link_lengths: Vec<f64>,
        joint_limits: Vec<[f64; 2]>,
    ) -> Result<Self, KinematicsError> {
        if link_lengths.is_empty() {
            return Err(KinematicsError::InvalidModel("arm needs at least one link".into()));
        }
        if let Some(l) = link_lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(KinematicsError::InvalidModel(format!("link length {l} is not positive")));
        }
        if joint_limits.len() != link_lengths.len() {
            return Err(KinematicsError::DimensionMismatch {
                expected: link_lengths.len(),
                got: joint_limits.len(),
            });
        }
        if let Some([lo, hi]) = joint_limits.iter().find(|[lo, hi]| !(lo < hi)) {
            return Err(KinematicsError::InvalidModel(format!("joint limit [{lo}, {hi}] is empty")));
        }
        Ok(ArmModel { link_lengths, base: [0.0, 0.0], joint_limits, link_radius: 0.0 })
    }

    pub fn with_base(mut self, base: Point2) -> Self {
        self.base = [base.x, base.y];
        self
    }

    pub fn with_link_radius(mut self, radius: f64) -> Result<Self, KinematicsError> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(KinematicsError::InvalidModel(format!("link radius {radius} is negative")));
        }
        self.link_radius = radius;
        Ok(self)
    }

    pub fn dof(&self) -> usize {
        self.link_lengths.len()
    }

    pub fn link_lengths(&self) -> &[f64] {
        &self.link_lengths
    }

    pub fn base(&self) -> Point2 {
        Point2::new(self.base[0], self.base[1])
    }

    pub fn joint_limits(&self) -> &[[f64; 2]] {
        &self.joint_limits
    }

    pub fn link_radius(&self) -> f64 {
        self.link_radius
    }

    /// Sum of all link lengths.
    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    pub fn check_dimension(&self, q: &JointConfig) -> Result<(), KinematicsError> {
        if q.dof() != self.dof() {
            return Err(KinematicsError::DimensionMismatch { expected: self.dof(), got: q.dof() });
        }
        Ok(())
    }

    pub fn within_limits(&self, q: &JointConfig) -> bool {
        q.dof() == self.dof()
            && q.as_slice()
                .iter()
                .zip(&self.joint_limits)
                .all(|(v, [lo, hi])| *v >= *lo && *v <= *hi)
    }

    /// Clamp every joint into its limits.
    pub fn clamp(&self, q: &mut JointConfig) {
        for (v, [lo, hi]) in q.as_mut_slice().iter_mut().zip(&self.joint_limits) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// Joint positions without the dimension check. `out` receives N+1 points.
    pub(crate) fn joint_positions_into(&self, q: &[f64], out: &mut Vec<Point2>) {
        out.clear();
        let mut p = self.base();
        let mut heading = 0.0;
        out.push(p);
        for (len, angle) in self.link_lengths.iter().zip(q) {
            heading += angle;
            p += Point2::new(heading.cos(), heading.sin()) * *len;
            out.push(p);
        }
    }
}

/// Positions of the base and every link tip (N+1 points).
pub fn forward_kinematics(model: &ArmModel, q: &JointConfig) -> Result<Vec<Point2>, KinematicsError> {
    model.check_dimension(q)?;
    let mut out = Vec::with_capacity(model.dof() + 1);
    model.joint_positions_into(q.as_slice(), &mut out);
    Ok(out)
}

/// Closest point on segment `a-b` to `c` and the distance between them.
pub(crate) fn closest_on_segment(a: Point2, b: Point2, c: Point2) -> (Point2, f64) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((c - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let p = a + ab * t;
    (p, (c - p).norm())
}

pub(crate) fn segment_closest(
    link: usize,
    a: Point2,
    b: Point2,
    obs: &CircleObstacle,
    link_radius: f64,
) -> ClosestPoint {
    let c = obs.center();
    let (point, center_dist) = closest_on_segment(a, b, c);
    let direction = if center_dist > 0.0 { (c - point) / center_dist } else { Point2::zeros() };
    ClosestPoint { link, point, distance: center_dist - obs.r - link_radius, direction }
}

/// Clearance between link `link` and `obs` at configuration `q`.
pub fn link_obstacle_closest(
    model: &ArmModel,
    q: &JointConfig,
    link: usize,
    obs: &CircleObstacle,
) -> Result<ClosestPoint, KinematicsError> {
    check_link(model, link)?;
    let joints = forward_kinematics(model, q)?;
    Ok(segment_closest(link, joints[link], joints[link + 1], obs, model.link_radius))
}

fn check_link(model: &ArmModel, link: usize) -> Result<(), KinematicsError> {
    if link >= model.dof() {
        return Err(KinematicsError::LinkIndex { index: link, dof: model.dof() });
    }
    Ok(())
}

#[inline]
fn perp(v: Point2) -> Point2 {
    Point2::new(-v.y, v.x)
}

/// Positional Jacobian (2 x N) of a point attached to link `link`.
///
/// Column `k` is the velocity of `point` per unit rate of joint `k`.
pub fn point_jacobian(
    model: &ArmModel,
    q: &JointConfig,
    link: usize,
    point: Point2,
) -> Result<Matrix2xX<f64>, KinematicsError> {
    check_link(model, link)?;
    let joints = forward_kinematics(model, q)?;
    let (_, off) = closest_on_segment(joints[link], joints[link + 1], point);
    if off > ON_LINK_TOLERANCE {
        return Err(KinematicsError::PointNotOnLink { link, distance: off });
    }
    Ok(jacobian_from_joints(&joints, link, point, model.dof()))
}

pub(crate) fn jacobian_from_joints(joints: &[Point2], link: usize, point: Point2, dof: usize) -> Matrix2xX<f64> {
    let mut jac = Matrix2xX::zeros(dof);
    for k in 0..=link {
        jac.set_column(k, &perp(point - joints[k]));
    }
    jac
}

/// Per-joint bound on `|direction . J(C)|` over every point `C` of link `link`.
///
/// The projected Jacobian is affine along a straight link, so its magnitude
/// peaks at one of the two link endpoints.
pub fn max_rotated_jacobian(
    model: &ArmModel,
    q: &JointConfig,
    link: usize,
    direction: Point2,
) -> Result<Vec<f64>, KinematicsError> {
    check_link(model, link)?;
    let joints = forward_kinematics(model, q)?;
    let mut out = vec![0.0; model.dof()];
    for (k, bound) in out.iter_mut().enumerate().take(link + 1) {
        let at_start = direction.dot(&perp(joints[link] - joints[k])).abs();
        let at_end = direction.dot(&perp(joints[link + 1] - joints[k])).abs();
        *bound = at_start.max(at_end);
    }
    Ok(out)
}

/// Smallest clearance over every link/obstacle pair (`+inf` with no obstacles).
pub fn min_clearance(model: &ArmModel, q: &JointConfig, obstacles: &[CircleObstacle]) -> Result<f64, KinematicsError> {
    model.check_dimension(q)?;
    let mut joints = Vec::with_capacity(model.dof() + 1);
    Ok(min_clearance_unchecked(model, q.as_slice(), obstacles, &mut joints))
}

pub(crate) fn min_clearance_unchecked(
    model: &ArmModel,
    q: &[f64],
    obstacles: &[CircleObstacle],
    joints: &mut Vec<Point2>,
) -> f64 {
    model.joint_positions_into(q, joints);
    let mut best = f64::INFINITY;
    for obs in obstacles {
        let c = obs.center();
        for w in joints.windows(2) {
            let (_, dist) = closest_on_segment(w[0], w[1], c);
            best = best.min(dist - obs.r - model.link_radius);
        }
    }
    best
}

/// Exact point check: every link clears every obstacle.
pub fn is_collision_free(model: &ArmModel, q: &JointConfig, obstacles: &[CircleObstacle]) -> Result<bool, KinematicsError> {
    Ok(min_clearance(model, q, obstacles)? > 0.0)
}

/// All link/obstacle closest points at `q`, ordered by (obstacle, link).
pub fn all_closest(
    model: &ArmModel,
    q: &JointConfig,
    obstacles: &[CircleObstacle],
) -> Result<Vec<(usize, ClosestPoint)>, KinematicsError> {
    let joints = forward_kinematics(model, q)?;
    let mut out = Vec::with_capacity(obstacles.len() * model.dof());
    for (i, obs) in obstacles.iter().enumerate() {
        for j in 0..model.dof() {
            out.push((i, segment_closest(j, joints[j], joints[j + 1], obs, model.link_radius)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit2() -> ArmModel {
        ArmModel::new(vec![1.0, 1.0]).unwrap()
    }

    fn close(a: Point2, b: Point2) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn fk_straight_and_rotated() {
        let m = unit2();
        let p = forward_kinematics(&m, &JointConfig::new(vec![0.0, 0.0])).unwrap();
        assert!(close(p[0], Point2::new(0.0, 0.0)));
        assert!(close(p[1], Point2::new(1.0, 0.0)));
        assert!(close(p[2], Point2::new(2.0, 0.0)));

        let p = forward_kinematics(&m, &JointConfig::new(vec![PI / 2.0, 0.0])).unwrap();
        assert!(close(p[1], Point2::new(0.0, 1.0)));
        assert!(close(p[2], Point2::new(0.0, 2.0)));
    }

    #[test]
    fn fk_composed_rotations() {
        let m = ArmModel::new(vec![1.0, 1.0, 0.5]).unwrap();
        let p = forward_kinematics(&m, &JointConfig::new(vec![0.0, PI / 2.0, 0.0])).unwrap();
        let want = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (1.0, 1.5)];
        for (got, (x, y)) in p.iter().zip(want) {
            assert!(close(*got, Point2::new(x, y)), "{got:?} vs ({x},{y})");
        }
    }

    #[test]
    fn fk_dimension_mismatch() {
        let err = forward_kinematics(&unit2(), &JointConfig::new(vec![0.0])).unwrap_err();
        assert_eq!(err, KinematicsError::DimensionMismatch { expected: 2, got: 1 });
    }

    #[test]
    fn model_rejects_bad_input() {
        assert!(ArmModel::new(vec![]).is_err());
        assert!(ArmModel::new(vec![1.0, -0.1]).is_err());
        assert!(ArmModel::with_limits(vec![1.0], vec![[0.5, 0.5]]).is_err());
        assert!(ArmModel::with_limits(vec![1.0], vec![[0.0, 1.0], [0.0, 1.0]]).is_err());
    }

    #[test]
    fn closest_point_examples() {
        let m = unit2();
        let q = JointConfig::new(vec![0.0, 0.0]);
        let obs = CircleObstacle::new(2.0, 2.0, 0.5);

        let c1 = link_obstacle_closest(&m, &q, 1, &obs).unwrap();
        assert!(close(c1.point, Point2::new(2.0, 0.0)));
        assert!((c1.distance - 1.5).abs() < 1e-12);
        assert!(close(c1.direction, Point2::new(0.0, 1.0)));

        let c0 = link_obstacle_closest(&m, &q, 0, &obs).unwrap();
        assert!(close(c0.point, Point2::new(1.0, 0.0)));
        assert!((c0.distance - (5f64.sqrt() - 0.5)).abs() < 1e-12);
        assert!(close(c0.direction, Point2::new(1.0, 2.0) / 5f64.sqrt()));

        let pen = link_obstacle_closest(&m, &q, 1, &CircleObstacle::new(1.5, 0.2, 0.5)).unwrap();
        assert!((pen.distance + 0.3).abs() < 1e-12);
    }

    #[test]
    fn link_radius_reduces_clearance() {
        let m = unit2().with_link_radius(0.05).unwrap();
        let q = JointConfig::new(vec![0.0, 0.0]);
        let c = link_obstacle_closest(&m, &q, 1, &CircleObstacle::new(2.0, 2.0, 0.5)).unwrap();
        assert!((c.distance - 1.45).abs() < 1e-12);
    }

    #[test]
    fn jacobian_examples() {
        let m = unit2();
        let q = JointConfig::new(vec![0.0, 0.0]);
        let j = point_jacobian(&m, &q, 1, Point2::new(2.0, 0.0)).unwrap();
        assert_eq!(j[(0, 0)], 0.0);
        assert_eq!(j[(0, 1)], 0.0);
        assert_eq!(j[(1, 0)], 2.0);
        assert_eq!(j[(1, 1)], 1.0);

        let j = point_jacobian(&m, &q, 0, Point2::new(1.0, 0.0)).unwrap();
        assert_eq!(j.column(0), Point2::new(0.0, 1.0));
        assert_eq!(j.column(1), Point2::new(0.0, 0.0));

        let err = point_jacobian(&m, &q, 0, Point2::new(1.5, 0.0)).unwrap_err();
        assert!(matches!(err, KinematicsError::PointNotOnLink { link: 0, .. }));
    }

    #[test]
    fn max_rotated_jacobian_examples() {
        let m = unit2();
        let q = JointConfig::new(vec![0.0, 0.0]);
        let b = max_rotated_jacobian(&m, &q, 1, Point2::new(0.0, 1.0)).unwrap();
        assert_eq!(b, vec![2.0, 1.0]);

        // Oracle: dense sampling of |dir . J(C)| along link 0.
        let dir = Point2::new(1.0, 2.0) / 5f64.sqrt();
        let b = max_rotated_jacobian(&m, &q, 0, dir).unwrap();
        let joints = forward_kinematics(&m, &q).unwrap();
        let mut sampled = [0.0f64; 2];
        for i in 0..=10_000 {
            let c = joints[0].lerp(&joints[1], i as f64 / 10_000.0);
            let jac = point_jacobian(&m, &q, 0, c).unwrap();
            for (k, s) in sampled.iter_mut().enumerate() {
                *s = s.max(dir.dot(&jac.column(k).into_owned()).abs());
            }
        }
        assert!((b[0] - 2.0 / 5f64.sqrt()).abs() < 1e-12);
        assert_eq!(b[1], 0.0);
        for k in 0..2 {
            assert!((b[k] - sampled[k]).abs() < 1e-9);
        }
    }

    fn random_arm(rng: &mut ChaCha8Rng) -> (ArmModel, JointConfig) {
        let n = rng.gen_range(1..=6);
        let lengths = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let q = (0..n).map(|_| rng.gen_range(-PI..PI)).collect();
        (ArmModel::new(lengths).unwrap(), JointConfig::new(q))
    }

    #[test]
    fn endpoint_maximum_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let (m, q) = random_arm(&mut rng);
            let link = rng.gen_range(0..m.dof());
            let a: f64 = rng.gen_range(-PI..PI);
            let dir = Point2::new(a.cos(), a.sin());
            let bound = max_rotated_jacobian(&m, &q, link, dir).unwrap();
            let joints = forward_kinematics(&m, &q).unwrap();
            for _ in 0..100 {
                let c = joints[link].lerp(&joints[link + 1], rng.gen::<f64>());
                let jac = jacobian_from_joints(&joints, link, c, m.dof());
                for (k, b) in bound.iter().enumerate() {
                    let v = dir.dot(&jac.column(k).into_owned()).abs();
                    assert!(*b >= v - 1e-12, "bound {b} < sampled {v}");
                }
            }
        }
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let eps = 1e-6;
        for _ in 0..500 {
            let (m, q) = random_arm(&mut rng);
            let link = rng.gen_range(0..m.dof());
            let lambda: f64 = rng.gen();
            let at = |q: &JointConfig| {
                let p = forward_kinematics(&m, q).unwrap();
                p[link].lerp(&p[link + 1], lambda)
            };
            let c = at(&q);
            let jac = point_jacobian(&m, &q, link, c).unwrap();
            let dq: Vec<f64> = (0..m.dof()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let plus = JointConfig::new(q.as_slice().iter().zip(&dq).map(|(a, d)| a + eps * d).collect());
            let minus = JointConfig::new(q.as_slice().iter().zip(&dq).map(|(a, d)| a - eps * d).collect());
            let fd = (at(&plus) - at(&minus)) / (2.0 * eps);
            let lin = &jac * nalgebra::DVector::from_vec(dq);
            assert!((lin - fd).norm() <= 1e-5);
        }
    }

    #[test]
    fn distance_matches_sampled_segment() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let (m, q) = random_arm(&mut rng);
            let link = rng.gen_range(0..m.dof());
            let obs = CircleObstacle::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.01..0.5));
            let got = link_obstacle_closest(&m, &q, link, &obs).unwrap();
            let joints = forward_kinematics(&m, &q).unwrap();
            let at = |t: f64| (joints[link].lerp(&joints[link + 1], t) - obs.center()).norm();
            // 10^3 samples, then ternary refinement around the best one.
            let best = (0..=1000).min_by(|a, b| at(*a as f64 / 1e3).total_cmp(&at(*b as f64 / 1e3))).unwrap();
            let (mut lo, mut hi) = (((best as f64 - 1.0) / 1e3).max(0.0), ((best as f64 + 1.0) / 1e3).min(1.0));
            for _ in 0..200 {
                let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
                if at(m1) < at(m2) { hi = m2 } else { lo = m1 }
            }
            let brute = at(0.5 * (lo + hi)).min(at(best as f64 / 1e3)) - obs.r;
            assert!(got.distance <= brute + 1e-12);
            assert!((got.distance - brute).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn direction_is_unit_when_clear(cx in -3.0..3.0f64, cy in -3.0..3.0f64, r in 0.01..0.3f64, a in -3.1..3.1f64) {
            let m = unit2();
            let q = JointConfig::new(vec![a, -a / 2.0]);
            for link in 0..2 {
                let c = link_obstacle_closest(&m, &q, link, &CircleObstacle::new(cx, cy, r)).unwrap();
                if c.distance > 0.0 {
                    prop_assert!((c.direction.norm() - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
