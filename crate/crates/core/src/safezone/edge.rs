//! Edge certification: fuzzy (safe-zone covering) and dense (sampled) checks.

use serde::{Deserialize, Serialize};

use crate::kinematics::{min_clearance_unchecked, ArmModel, CircleObstacle, JointConfig, Point2};

use super::zone::{zone_with_scratch, SafeZone, ZoneOptions, ZoneScratch};

/// Sorted, disjoint closed sub-intervals of `[0, 1]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    spans: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new() -> Self {
        IntervalSet::default()
    }

    pub fn spans(&self) -> &[(f64, f64)] {
        &self.spans
    }

    pub fn measure(&self) -> f64 {
        self.spans.iter().map(|(a, b)| b - a).sum()
    }

    /// Inserts `[lo, hi]` (clamped to `[0, 1]`) and returns the newly covered length.
    pub fn insert(&mut self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = (lo.max(0.0), hi.min(1.0));
        if hi < lo {
            return 0.0;
        }
        let before = self.measure();
        let mut merged = (lo, hi);
        let mut out = Vec::with_capacity(self.spans.len() + 1);
        let mut placed = false;
        for &(a, b) in &self.spans {
            if b < merged.0 {
                out.push((a, b));
            } else if a > merged.1 {
                if !placed {
                    out.push(merged);
                    placed = true;
                }
                out.push((a, b));
            } else {
                merged = (merged.0.min(a), merged.1.max(b));
            }
        }
        if !placed {
            out.push(merged);
        }
        self.spans = out;
        (self.measure() - before).max(0.0)
    }

    pub fn covers_unit(&self) -> bool {
        self.spans.len() == 1 && self.spans[0].0 <= 0.0 && self.spans[0].1 >= 1.0
    }

    pub fn contains(&self, t: f64) -> bool {
        self.spans.iter().any(|(a, b)| *a <= t && t <= *b)
    }

    /// Widest uncovered open gap in `[0, 1]`, leftmost on ties.
    pub fn largest_gap(&self) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        let mut cursor = 0.0;
        let mut consider = |a: f64, b: f64| {
            if b > a && best.is_none_or(|(x, y)| b - a > y - x) {
                best = Some((a, b));
            }
        };
        for &(a, b) in &self.spans {
            consider(cursor, a);
            cursor = cursor.max(b);
        }
        consider(cursor, 1.0);
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum EdgeVerdict {
    Valid,
    Colliding { t: f64 },
    Exhausted,
}

/// Outcome of fuzzy certification of one edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCertificate {
    pub covered: IntervalSet,
    pub exact_checks: usize,
    pub verdict: EdgeVerdict,
}

impl EdgeCertificate {
    pub fn is_valid(&self) -> bool {
        self.verdict == EdgeVerdict::Valid
    }
}

/// Number of steps for a sampled edge: the smallest power of two with
/// `ratio / steps <= 1`. Powers of two keep finer grids nested in coarser ones.
pub(crate) fn subdivisions(ratio: f64) -> usize {
    if !(ratio > 1.0) {
        return 1;
    }
    let exp = (ratio.log2() - 1e-9).ceil().max(0.0) as u32;
    1usize << exp.min(40)
}

/// Endpoint zone supplied by a caller that already evaluated the endpoint.
#[derive(Debug, Clone, Copy)]
pub enum KnownEndpoint<'a> {
    Unknown,
    Zone(&'a SafeZone),
}

/// Covers `q_a -> q_b` with safe zones at midpoints of the widest uncovered gap.
pub fn check_edge_fuzzy(
    model: &ArmModel,
    q_a: &JointConfig,
    q_b: &JointConfig,
    obstacles: &[CircleObstacle],
    opts: &ZoneOptions,
) -> EdgeCertificate {
    check_edge_fuzzy_with(model, q_a, q_b, obstacles, opts, KnownEndpoint::Unknown, KnownEndpoint::Unknown)
}

/// As [`check_edge_fuzzy`], reusing endpoint zones the caller already holds.
/// Reused zones do not count toward `exact_checks`.
pub fn check_edge_fuzzy_with(
    model: &ArmModel,
    q_a: &JointConfig,
    q_b: &JointConfig,
    obstacles: &[CircleObstacle],
    opts: &ZoneOptions,
    known_a: KnownEndpoint<'_>,
    known_b: KnownEndpoint<'_>,
) -> EdgeCertificate {
    let mut scratch = ZoneScratch::default();
    let mut covered = IntervalSet::new();
    let mut exact_checks = 0usize;
    let finish = |covered, exact_checks, verdict| EdgeCertificate { covered, exact_checks, verdict };

    let length = q_a.distance(q_b);
    let mut endpoint = |known: KnownEndpoint<'_>, q: &JointConfig, checks: &mut usize| match known {
        KnownEndpoint::Zone(z) => Some(z.clone()),
        KnownEndpoint::Unknown => {
            *checks += 1;
            zone_with_scratch(model, q, obstacles, opts, &mut scratch).ok()
        }
    };
    let Some(zone_a) = endpoint(known_a, q_a, &mut exact_checks) else {
        return finish(covered, exact_checks, EdgeVerdict::Colliding { t: 0.0 });
    };
    if length == 0.0 {
        covered.insert(0.0, 1.0);
        return finish(covered, exact_checks, EdgeVerdict::Valid);
    }
    let Some(zone_b) = endpoint(known_b, q_b, &mut exact_checks) else {
        return finish(covered, exact_checks, EdgeVerdict::Colliding { t: 1.0 });
    };
    let (lo, hi) = zone_a.coverage_at(q_a, q_b, 0.0);
    covered.insert(lo, hi);
    let (lo, hi) = zone_b.coverage_at(q_a, q_b, 1.0);
    covered.insert(lo, hi);

    let progress = opts.min_progress;
    let grid = subdivisions(1.0 / progress);
    let cap = opts
        .max_iterations
        .unwrap_or_else(|| 10 * ((length / progress).ceil() as usize).max(1));
    let mut joints: Vec<Point2> = Vec::new();

    for _ in 0..cap {
        let Some((a, b)) = covered.largest_gap() else {
            return finish(covered, exact_checks, EdgeVerdict::Valid);
        };
        let t_mid = 0.5 * (a + b);
        let q_mid = q_a.lerp(q_b, t_mid);
        exact_checks += 1;
        let gained = match zone_with_scratch(model, &q_mid, obstacles, opts, &mut scratch) {
            Err(_) => return finish(covered, exact_checks, EdgeVerdict::Colliding { t: t_mid }),
            Ok(zone) => {
                let (lo, hi) = zone.coverage_at(q_a, q_b, t_mid);
                covered.insert(lo, hi)
            }
        };
        if gained < progress {
            // Zones have collapsed near an obstacle: settle this window with
            // exact checks on the sampling grid instead.
            let (w_lo, w_hi) = ((t_mid - 0.5 * progress).max(0.0), (t_mid + 0.5 * progress).min(1.0));
            let first = (w_lo * grid as f64).ceil() as usize;
            let last = ((w_hi * grid as f64).floor() as usize).min(grid);
            for i in first..=last {
                let t = i as f64 / grid as f64;
                if covered.contains(t) {
                    continue;
                }
                exact_checks += 1;
                let q = q_a.lerp(q_b, t);
                if min_clearance_unchecked(model, q.as_slice(), obstacles, &mut joints) <= 0.0 {
                    return finish(covered, exact_checks, EdgeVerdict::Colliding { t });
                }
            }
            covered.insert(w_lo, w_hi);
        }
    }
    if covered.covers_unit() {
        return finish(covered, exact_checks, EdgeVerdict::Valid);
    }
    finish(covered, exact_checks, EdgeVerdict::Exhausted)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DenseVerdict {
    Valid,
    Colliding { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseResult {
    pub verdict: DenseVerdict,
    pub checks: usize,
}

impl DenseResult {
    pub fn is_valid(&self) -> bool {
        self.verdict == DenseVerdict::Valid
    }
}

/// Exact point checks at `t = i / n`, `n` the smallest power of two giving a
/// step of at most `resolution` rad. Reports the first violation in `t`.
pub fn check_edge_dense(
    model: &ArmModel,
    q_a: &JointConfig,
    q_b: &JointConfig,
    obstacles: &[CircleObstacle],
    resolution: f64,
) -> DenseResult {
    assert!(resolution > 0.0, "resolution must be positive");
    let n = subdivisions(q_a.distance(q_b) / resolution);
    let mut joints = Vec::with_capacity(model.dof() + 1);
    let mut q = q_a.clone();
    for i in 0..=n {
        let t = i as f64 / n as f64;
        lerp_into(q_a, q_b, t, &mut q);
        if min_clearance_unchecked(model, q.as_slice(), obstacles, &mut joints) <= 0.0 {
            return DenseResult { verdict: DenseVerdict::Colliding { t }, checks: i + 1 };
        }
    }
    DenseResult { verdict: DenseVerdict::Valid, checks: n + 1 }
}

/// Same sample set as [`check_edge_dense`], visited coarse-to-fine
/// (endpoints, then midpoints of ever finer halvings). The verdict matches;
/// a reported collision is some violating sample, not necessarily the first.
pub fn check_edge_dense_bisect(
    model: &ArmModel,
    q_a: &JointConfig,
    q_b: &JointConfig,
    obstacles: &[CircleObstacle],
    resolution: f64,
) -> DenseResult {
    assert!(resolution > 0.0, "resolution must be positive");
    let n = subdivisions(q_a.distance(q_b) / resolution);
    let mut joints = Vec::with_capacity(model.dof() + 1);
    let mut q = q_a.clone();
    let mut checks = 0;
    let mut probe = |i: usize, checks: &mut usize| {
        let t = i as f64 / n as f64;
        lerp_into(q_a, q_b, t, &mut q);
        *checks += 1;
        (min_clearance_unchecked(model, q.as_slice(), obstacles, &mut joints) <= 0.0).then_some(t)
    };
    for i in [0, n] {
        if let Some(t) = probe(i, &mut checks) {
            return DenseResult { verdict: DenseVerdict::Colliding { t }, checks };
        }
        if n == 0 {
            break;
        }
    }
    let mut stride = n;
    while stride > 1 {
        let half = stride / 2;
        let mut i = half;
        while i < n {
            if let Some(t) = probe(i, &mut checks) {
                return DenseResult { verdict: DenseVerdict::Colliding { t }, checks };
            }
            i += stride;
        }
        stride = half;
    }
    DenseResult { verdict: DenseVerdict::Valid, checks }
}

/// Same verdict as [`check_edge_dense`] with fewer evaluations: a sample
/// with clearance `c` certifies every sample closer than `c / L` in `t`,
/// where `L` bounds the workspace speed of the arm along the edge.
pub fn check_edge_dense_skipping(
    model: &ArmModel,
    q_a: &JointConfig,
    q_b: &JointConfig,
    obstacles: &[CircleObstacle],
    resolution: f64,
) -> DenseResult {
    assert!(resolution > 0.0, "resolution must be positive");
    let n = subdivisions(q_a.distance(q_b) / resolution);
    let speed = edge_speed_bound(model, q_a, q_b);
    let mut joints = Vec::with_capacity(model.dof() + 1);
    let mut q = q_a.clone();
    let mut checks = 0;
    let mut i = 0;
    while i <= n {
        let t = i as f64 / n as f64;
        lerp_into(q_a, q_b, t, &mut q);
        checks += 1;
        let c = min_clearance_unchecked(model, q.as_slice(), obstacles, &mut joints);
        if c <= 0.0 {
            return DenseResult { verdict: DenseVerdict::Colliding { t }, checks };
        }
        // Samples j with (j - i) / n < c / speed are certified; keep a
        // relative safety factor against rounding.
        let reach = if speed > 0.0 { c / speed * (1.0 - 1e-9) * n as f64 } else { f64::INFINITY };
        let skip = if reach.is_finite() { (reach.ceil() as usize).max(1) } else { n + 1 };
        i = i.saturating_add(skip);
    }
    DenseResult { verdict: DenseVerdict::Valid, checks }
}

/// Bound on how fast any arm point moves per unit of edge parameter `t`.
pub(crate) fn edge_speed_bound(model: &ArmModel, q_a: &JointConfig, q_b: &JointConfig) -> f64 {
    // Joint k moves every point beyond it by at most (sum of outer links) per rad.
    let mut outer = model.reach();
    let mut speed = 0.0;
    for (k, (a, b)) in q_a.as_slice().iter().zip(q_b.as_slice()).enumerate() {
        speed += outer * (b - a).abs();
        outer -= model.link_lengths()[k];
    }
    speed
}

fn lerp_into(q_a: &JointConfig, q_b: &JointConfig, t: f64, out: &mut JointConfig) {
    for ((o, a), b) in out.as_mut_slice().iter_mut().zip(q_a.as_slice()).zip(q_b.as_slice()) {
        *o = a + t * (b - a);
    }
}
