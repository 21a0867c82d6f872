use std::fmt::Write as _;

use super::BenchError;
use crate::kinematics::{forward_kinematics, min_clearance, ArmModel, CircleObstacle, JointConfig, Point2};
use crate::safezone::{compute_safe_zone, SafeZone, ZoneOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    /// Image side length in pixels.
    pub size: f64,
    /// Arm poses drawn along the path in the workspace view.
    pub poses: usize,
    /// Raster cells per joint axis in the configuration-space view.
    pub raster: usize,
    pub zone: ZoneOptions,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { size: 600.0, poses: 8, raster: 120, zone: ZoneOptions::default() }
    }
}

/// Affine map from a rectangle in model units to the square image,
/// with the y axis pointing up.
#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    y0: f64,
    scale: f64,
    size: f64,
}

impl Frame {
    fn new(x: [f64; 2], y: [f64; 2], size: f64) -> Self {
        let span = (x[1] - x[0]).max(y[1] - y[0]);
        Frame { x0: x[0], y0: y[0], scale: size / span, size }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) * self.scale, self.size - (y - self.y0) * self.scale)
    }

    #[cfg(test)]
    fn unpx(&self, u: f64, v: f64) -> (f64, f64) {
        (u / self.scale + self.x0, (self.size - v) / self.scale + self.y0)
    }
}

fn header(size: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn path_samples(path: &[JointConfig], n: usize) -> Vec<JointConfig> {
    if path.len() < 2 {
        return path.to_vec();
    }
    let n = n.max(2);
    let lengths: Vec<f64> = path.windows(2).map(|w| w[0].distance(&w[1])).collect();
    let total: f64 = lengths.iter().sum();
    (0..n)
        .map(|i| {
            let mut s = total * i as f64 / (n - 1) as f64;
            for (k, len) in lengths.iter().enumerate() {
                if s <= *len || k + 1 == lengths.len() {
                    let t = if *len > 0.0 { (s / len).min(1.0) } else { 0.0 };
                    return path[k].lerp(&path[k + 1], t);
                }
                s -= len;
            }
            path[path.len() - 1].clone()
        })
        .collect()
}

/// Workspace view: static obstacles in gray, scene obstacles in red, arm
/// poses along the path and the traced tip.
pub fn render_workspace(
    model: &ArmModel,
    static_obstacles: &[CircleObstacle],
    obstacles: &[CircleObstacle],
    path: &[JointConfig],
    opts: &RenderOptions,
) -> Result<String, BenchError> {
    let reach = model.reach() * 1.1;
    let b = model.base();
    let frame = Frame::new([b.x - reach, b.x + reach], [b.y - reach, b.y + reach], opts.size);
    let mut svg = header(opts.size);
    for (class, fill, list) in [("static", "#9e9e9e", static_obstacles), ("dynamic", "#d32f2f", obstacles)] {
        for o in list {
            let (u, v) = frame.px(o.cx, o.cy);
            let _ = writeln!(svg, "<circle class=\"{class}\" cx=\"{u:.3}\" cy=\"{v:.3}\" r=\"{:.3}\" fill=\"{fill}\"/>", o.r * frame.scale);
        }
    }
    let fk = |q: &JointConfig| forward_kinematics(model, q).map_err(|e| BenchError::Render(e.to_string()));
    let stroke = (model.link_radius() * 2.0 * frame.scale).max(1.5);
    let poses = path_samples(path, opts.poses);
    for (i, q) in poses.iter().enumerate() {
        let opacity = 0.25 + 0.75 * i as f64 / poses.len().max(2).saturating_sub(1) as f64;
        let points = polyline(&frame, &fk(q)?);
        let _ = writeln!(
            svg,
            "<polyline class=\"arm\" points=\"{points}\" fill=\"none\" stroke=\"#1565c0\" stroke-opacity=\"{opacity:.2}\" stroke-width=\"{stroke:.2}\" stroke-linecap=\"round\"/>"
        );
    }
    let tips: Vec<Point2> =
        path_samples(path, 200).iter().map(|q| fk(q).map(|p| p[p.len() - 1])).collect::<Result<_, _>>()?;
    if tips.len() > 1 {
        let _ = writeln!(svg, "<polyline class=\"tip\" points=\"{}\" fill=\"none\" stroke=\"#2e7d32\" stroke-width=\"1.5\"/>", polyline(&frame, &tips));
    }
    let (u, v) = frame.px(b.x, b.y);
    let _ = writeln!(svg, "<circle class=\"base\" cx=\"{u:.3}\" cy=\"{v:.3}\" r=\"4\" fill=\"black\"/>");
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn polyline(frame: &Frame, points: &[Point2]) -> String {
    let mut s = String::new();
    for p in points {
        let (u, v) = frame.px(p.x, p.y);
        let _ = write!(s, "{u:.3},{v:.3} ");
    }
    s.trim_end().to_string()
}

fn zone_vertices(z: &SafeZone) -> [(f64, f64); 4] {
    let a = z.anchor().as_slice();
    let (lo, hi) = (z.dq_min(), z.dq_max());
    [(a[0] + hi[0], a[1]), (a[0], a[1] + hi[1]), (a[0] + lo[0], a[1]), (a[0], a[1] + lo[1])]
}

/// Configuration-space view of a 2-DOF arm: colliding cells shaded, the
/// safe zone of every anchor drawn as a quadrilateral and the path on top.
pub fn render_config_space(
    model: &ArmModel,
    obstacles: &[CircleObstacle],
    anchors: &[JointConfig],
    path: &[JointConfig],
    opts: &RenderOptions,
) -> Result<String, BenchError> {
    if model.dof() != 2 {
        return Err(BenchError::Render(format!("configuration-space view needs 2 joints, model has {}", model.dof())));
    }
    let lim = model.joint_limits();
    let frame = Frame::new(lim[0], lim[1], opts.size);
    let mut svg = header(opts.size);
    let n = opts.raster.max(2);
    let (dx, dy) = ((lim[0][1] - lim[0][0]) / n as f64, (lim[1][1] - lim[1][0]) / n as f64);
    let cell = |v: f64, d: f64| v * d * frame.scale;
    svg.push_str("<g class=\"obstacles\" fill=\"#424242\">\n");
    for j in 0..n {
        let y = lim[1][0] + (j as f64 + 0.5) * dy;
        let mut run: Option<usize> = None;
        for i in 0..=n {
            let hit = i < n && {
                let q = JointConfig::new(vec![lim[0][0] + (i as f64 + 0.5) * dx, y]);
                !min_clearance(model, &q, obstacles).map_err(|e| BenchError::Render(e.to_string()))?.gt(&0.0)
            };
            match (hit, run) {
                (true, None) => run = Some(i),
                (false, Some(start)) => {
                    let (u, v) = frame.px(lim[0][0] + start as f64 * dx, lim[1][0] + (j + 1) as f64 * dy);
                    let _ = writeln!(svg, "<rect x=\"{u:.3}\" y=\"{v:.3}\" width=\"{:.3}\" height=\"{:.3}\"/>", cell((i - start) as f64, dx), cell(1.0, dy));
                    run = None;
                }
                _ => {}
            }
        }
    }
    svg.push_str("</g>\n");
    for q in anchors {
        let zone = compute_safe_zone(model, q, obstacles, &opts.zone).map_err(|e| BenchError::Render(e.to_string()))?;
        let mut points = String::new();
        for (x, y) in zone_vertices(&zone) {
            let (u, v) = frame.px(x, y);
            let _ = write!(points, "{u:.6},{v:.6} ");
        }
        let _ = writeln!(
            svg,
            "<polygon class=\"zone\" points=\"{}\" fill=\"#66bb6a\" fill-opacity=\"0.45\" stroke=\"#2e7d32\" stroke-width=\"1\"/>",
            points.trim_end()
        );
    }
    if path.len() > 1 {
        let mut points = String::new();
        for q in path {
            let (u, v) = frame.px(q[0], q[1]);
            let _ = write!(points, "{u:.3},{v:.3} ");
        }
        let _ = writeln!(svg, "<polyline class=\"path\" points=\"{}\" fill=\"none\" stroke=\"#1565c0\" stroke-width=\"2\"/>", points.trim_end());
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_link() -> (ArmModel, Vec<CircleObstacle>) {
        (ArmModel::new(vec![1.0, 1.0]).unwrap(), vec![CircleObstacle::new(1.2, 0.9, 0.25), CircleObstacle::new(-1.0, -1.2, 0.3)])
    }

    fn polygons(svg: &str) -> Vec<Vec<(f64, f64)>> {
        svg.lines()
            .filter(|l| l.contains("class=\"zone\""))
            .map(|l| {
                let start = l.find("points=\"").unwrap() + 8;
                let end = start + l[start..].find('"').unwrap();
                l[start..end]
                    .split_whitespace()
                    .map(|p| {
                        let (u, v) = p.split_once(',').unwrap();
                        (u.parse().unwrap(), v.parse().unwrap())
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn zone_polygons_lie_on_the_zone_boundary() {
        let (model, obs) = two_link();
        let anchors = [JointConfig::new(vec![0.0, 0.0]), JointConfig::new(vec![1.5, -0.5]), JointConfig::new(vec![-2.0, 1.0])];
        let opts = RenderOptions { raster: 40, ..Default::default() };
        let svg = render_config_space(&model, &obs, &anchors, &[], &opts).unwrap();
        let polys = polygons(&svg);
        assert_eq!(polys.len(), anchors.len());
        let lim = model.joint_limits();
        let frame = Frame::new(lim[0], lim[1], opts.size);
        for (poly, q) in polys.iter().zip(&anchors) {
            let zone = compute_safe_zone(&model, q, &obs, &opts.zone).unwrap();
            assert_eq!(poly.len(), 4);
            for &(u, v) in poly {
                let (x, y) = frame.unpx(u, v);
                let dq = [x - q[0], y - q[1]];
                assert!((zone.gauge(&dq) - 1.0).abs() < 1e-4, "vertex gauge {}", zone.gauge(&dq));
            }
            // Points pulled toward the anchor are inside and collision-free.
            for &(u, v) in poly {
                let (x, y) = frame.unpx(u, v);
                let p = JointConfig::new(vec![q[0] + 0.99 * (x - q[0]), q[1] + 0.99 * (y - q[1])]);
                assert!(zone.contains(&p));
                assert!(min_clearance(&model, &p, &obs).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn raster_marks_colliding_cells() {
        let (model, obs) = two_link();
        let svg = render_config_space(&model, &obs, &[], &[], &RenderOptions { raster: 30, ..Default::default() }).unwrap();
        assert!(svg.contains("<rect x="));
        let free = render_config_space(&model, &[], &[], &[], &RenderOptions { raster: 30, ..Default::default() }).unwrap();
        assert!(!free.contains("<rect x="));
    }

    #[test]
    fn config_space_needs_two_joints() {
        let model = ArmModel::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(render_config_space(&model, &[], &[], &[], &RenderOptions::default()).is_err());
    }

    #[test]
    fn workspace_draws_every_element() {
        let (model, obs) = two_link();
        let path = vec![JointConfig::new(vec![0.0, 0.0]), JointConfig::new(vec![1.0, 0.5])];
        let svg = render_workspace(&model, &obs[..1], &obs[1..], &path, &RenderOptions::default()).unwrap();
        assert_eq!(svg.matches("class=\"static\"").count(), 1);
        assert_eq!(svg.matches("class=\"dynamic\"").count(), 1);
        assert_eq!(svg.matches("class=\"arm\"").count(), 8);
        assert!(svg.contains("class=\"tip\""));
    }

    #[test]
    fn path_samples_hit_both_ends() {
        let path = vec![JointConfig::new(vec![0.0]), JointConfig::new(vec![1.0]), JointConfig::new(vec![3.0])];
        let s = path_samples(&path, 4);
        let v: Vec<f64> = s.iter().map(|q| q[0]).collect();
        for (a, b) in v.iter().zip([0.0, 1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
