use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BenchError, HiroConfig};
use crate::graph::QueryGraph;
use crate::roadmap::Roadmap;
use crate::scenes::SceneDataset;
use crate::search::{plan, plan_full, plan_lazy, PlanResult, PlanStatus, SearchStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Hiro,
    Lazy,
    Full,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Hiro => "hiro",
            Method::Lazy => "lazy",
            Method::Full => "full",
        }
    }

    /// Parses a comma-separated list such as `hiro,lazy,full`.
    pub fn parse_list(text: &str) -> Result<Vec<Method>, BenchError> {
        let mut out: Vec<Method> = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let m = part.parse()?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        if out.is_empty() {
            return Err(BenchError::Config("no methods given".into()));
        }
        Ok(out)
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hiro" => Ok(Method::Hiro),
            "lazy" => Ok(Method::Lazy),
            "full" => Ok(Method::Full),
            other => Err(BenchError::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// Runs one method on one scene of a dataset.
pub fn run_method(
    config: &HiroConfig,
    roadmap: &Roadmap,
    dataset: &SceneDataset,
    scene: usize,
    method: Method,
) -> Result<PlanResult, BenchError> {
    let s = dataset.scenes.get(scene).ok_or_else(|| BenchError::Config(format!("no scene {scene}")))?;
    let started = std::time::Instant::now();
    let query = QueryGraph::new(roadmap, &config.arm, &config.static_obstacles, &s.start, &s.goal, dataset.params.attach_neighbors)
        .map_err(crate::search::PlanError::from)?;
    let attach_ms = started.elapsed().as_secs_f64() * 1e3;
    let (arm, stat, dynamic) = (&config.arm, &config.static_obstacles, &s.obstacles);
    let mut result = match method {
        Method::Hiro => plan(&query, arm, stat, dynamic, &config.planner)?,
        Method::Lazy => plan_lazy(&query, arm, stat, dynamic, &config.planner, &config.baselines)?,
        Method::Full => plan_full(&query, arm, stat, dynamic, &config.planner, &config.baselines)?,
    };
    result.stats.attach_ms = attach_ms;
    result.stats.wall_ms += attach_ms;
    Ok(result)
}

/// One method on one scene, summarized over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub obstacle_count: usize,
    pub scene: usize,
    pub method: Method,
    pub status: PlanStatus,
    pub cost: Option<f64>,
    /// Median wall time over the repetitions (ms).
    pub median_ms: f64,
    /// Counters of the first repetition.
    pub stats: SearchStats,
    /// All repetitions produced identical counters.
    pub counters_repeatable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub obstacle_count: usize,
    pub solved: usize,
    pub scenes: usize,
    /// Mean and population std of per-scene median times (ms).
    pub mean_ms: f64,
    pub std_ms: f64,
    /// Mean and population std of search-phase exact point checks.
    pub mean_checks: f64,
    pub std_checks: f64,
}

/// Counts over `[0, 50]` in bins of 5, plus ratios above 50.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub overflow: usize,
}

impl Histogram {
    pub fn of(values: &[f64]) -> Self {
        let edges: Vec<f64> = (0..=10).map(|i| i as f64 * 5.0).collect();
        let mut counts = vec![0; 10];
        let mut overflow = 0;
        for &v in values {
            if v > 50.0 {
                overflow += 1;
            } else {
                counts[((v / 5.0).floor() as usize).min(9)] += 1;
            }
        }
        Histogram { edges, counts, overflow }
    }
}

/// Per-scene improvement of HIRO over one baseline on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub baseline: Method,
    pub obstacle_count: usize,
    /// `baseline_time / hiro_time` on scenes both solved.
    pub time_ratios: Vec<f64>,
    /// `baseline_checks / hiro_checks` on scenes both solved.
    pub check_ratios: Vec<f64>,
    pub time_histogram: Histogram,
    pub check_histogram: Histogram,
    /// Scenes where HIRO used fewer exact point checks.
    pub fewer_checks: usize,
    pub compared: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub methods: Vec<Method>,
    pub obstacle_counts: Vec<usize>,
    pub reps: usize,
    pub records: Vec<SceneRecord>,
    pub summaries: Vec<MethodSummary>,
    pub improvements: Vec<Improvement>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs every method `reps` times on every scene of every dataset.
pub fn run_bench(
    config: &HiroConfig,
    roadmap: &Roadmap,
    datasets: &[SceneDataset],
    methods: &[Method],
    reps: usize,
) -> Result<BenchReport, BenchError> {
    let reps = reps.max(1);
    let mut records = Vec::new();
    for d in datasets {
        for scene in 0..d.scenes.len() {
            for &method in methods {
                let mut times = Vec::with_capacity(reps);
                let mut first: Option<PlanResult> = None;
                let mut repeatable = true;
                for _ in 0..reps {
                    let r = run_method(config, roadmap, d, scene, method)?;
                    times.push(r.stats.wall_ms);
                    match &first {
                        None => first = Some(r),
                        Some(f) => repeatable &= f.stats.counters() == r.stats.counters(),
                    }
                }
                let first = first.expect("at least one repetition");
                records.push(SceneRecord {
                    obstacle_count: d.obstacle_count,
                    scene,
                    method,
                    status: first.status,
                    cost: first.cost,
                    median_ms: median(&mut times),
                    stats: first.stats,
                    counters_repeatable: repeatable,
                });
            }
        }
    }
    Ok(BenchReport::from_records(methods.to_vec(), datasets.iter().map(|d| d.obstacle_count).collect(), reps, records))
}

impl BenchReport {
    /// Derives summaries and improvement ratios from per-scene records.
    pub fn from_records(methods: Vec<Method>, obstacle_counts: Vec<usize>, reps: usize, records: Vec<SceneRecord>) -> Self {
        let mut summaries = Vec::new();
        let mut improvements = Vec::new();
        for &count in &obstacle_counts {
            let of = |m: Method| records.iter().filter(move |r| r.method == m && r.obstacle_count == count);
            for &method in &methods {
                let times: Vec<f64> = of(method).map(|r| r.median_ms).collect();
                let checks: Vec<f64> = of(method).map(|r| r.stats.exact_point_checks as f64).collect();
                let (mean_ms, std_ms) = mean_std(&times);
                let (mean_checks, std_checks) = mean_std(&checks);
                summaries.push(MethodSummary {
                    method,
                    obstacle_count: count,
                    solved: of(method).filter(|r| r.status == PlanStatus::Solved).count(),
                    scenes: times.len(),
                    mean_ms,
                    std_ms,
                    mean_checks,
                    std_checks,
                });
            }
            if !methods.contains(&Method::Hiro) {
                continue;
            }
            for &baseline in methods.iter().filter(|m| **m != Method::Hiro) {
                let mut time_ratios = Vec::new();
                let mut check_ratios = Vec::new();
                let mut fewer_checks = 0;
                for h in of(Method::Hiro).filter(|r| r.status == PlanStatus::Solved) {
                    let Some(b) = of(baseline).find(|b| b.scene == h.scene && b.status == PlanStatus::Solved) else {
                        continue;
                    };
                    time_ratios.push(b.median_ms / h.median_ms);
                    check_ratios.push(b.stats.exact_point_checks as f64 / h.stats.exact_point_checks.max(1) as f64);
                    fewer_checks += (h.stats.exact_point_checks < b.stats.exact_point_checks) as usize;
                }
                improvements.push(Improvement {
                    baseline,
                    obstacle_count: count,
                    time_histogram: Histogram::of(&time_ratios),
                    check_histogram: Histogram::of(&check_ratios),
                    compared: time_ratios.len(),
                    time_ratios,
                    check_ratios,
                    fewer_checks,
                });
            }
        }
        BenchReport { methods, obstacle_counts, reps, records, summaries, improvements }
    }

    pub fn summary(&self, method: Method, obstacle_count: usize) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method && s.obstacle_count == obstacle_count)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Which per-scene quantity a table shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    TimeMs,
    ExactChecks,
}

/// Table with one row per method and a (mean, std) column pair per dataset.
pub fn summarize_metric(report: &BenchReport, metric: Metric) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<8}", "method");
    for c in &report.obstacle_counts {
        let label = format!("{c} obstacles");
        let _ = write!(out, " | {label:^23}");
    }
    out.push('\n');
    let _ = write!(out, "{:<8}", "");
    for _ in &report.obstacle_counts {
        let _ = write!(out, " | {:>11} {:>11}", "mean", "std");
    }
    out.push('\n');
    for &m in &report.methods {
        let _ = write!(out, "{:<8}", m.name());
        for &c in &report.obstacle_counts {
            let (mean, std) = report
                .summary(m, c)
                .map(|s| match metric {
                    Metric::TimeMs => (s.mean_ms, s.std_ms),
                    Metric::ExactChecks => (s.mean_checks, s.std_checks),
                })
                .unwrap_or((f64::NAN, f64::NAN));
            let _ = write!(out, " | {mean:>11.3} {std:>11.3}");
        }
        out.push('\n');
    }
    out
}

/// Planning time and exact-check tables, then success counts and the
/// improvement histograms.
pub fn summarize(report: &BenchReport) -> String {
    let mut out = String::from("Planning time per query (ms, mean and std of per-scene medians)\n");
    out.push_str(&summarize_metric(report, Metric::TimeMs));
    out.push_str("\nExact point checks per query (search phase)\n");
    out.push_str(&summarize_metric(report, Metric::ExactChecks));
    out.push_str("\nSolved scenes\n");
    for s in &report.summaries {
        let _ = writeln!(out, "  {:<5} {:>3} obstacles: {}/{}", s.method.name(), s.obstacle_count, s.solved, s.scenes);
    }
    for imp in &report.improvements {
        let _ = writeln!(
            out,
            "\nImprovement over {} with {} obstacles ({} scenes, fewer checks on {}):",
            imp.baseline.name(),
            imp.obstacle_count,
            imp.compared,
            imp.fewer_checks
        );
        for (label, h) in [("time", &imp.time_histogram), ("checks", &imp.check_histogram)] {
            let _ = write!(out, "  {label:<6}");
            for (i, c) in h.counts.iter().enumerate() {
                let _ = write!(out, " [{:>2},{:>2}):{c:<3}", h.edges[i], h.edges[i + 1]);
            }
            let _ = writeln!(out, " >50:{}", h.overflow);
        }
    }
    out
}
