use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::{render_config_space, render_workspace, run_bench, run_method, summarize, BenchError, HiroConfig, Method, RenderOptions};
use crate::kinematics::CircleObstacle;
use crate::roadmap::{load_roadmap_checked, save_roadmap, Roadmap};
use crate::scenes::{generate_dataset, load_dataset, save_dataset, SceneDataset};

#[derive(Debug, Parser)]
#[command(name = "hiro", about = "Roadmap planning benchmarks for planar arms")]
pub struct Cli {
    /// JSON configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or inspect a roadmap file.
    #[command(subcommand)]
    Roadmap(RoadmapCommand),
    /// Generate scene datasets.
    #[command(subcommand)]
    Scene(SceneCommand),
    /// Plan single queries.
    #[command(subcommand)]
    Plan(PlanCommand),
    /// Run the benchmark suite.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Draw a scene and its planned path as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Subcommand)]
pub enum RoadmapCommand {
    Build {
        #[arg(long)]
        out: PathBuf,
    },
    Info {
        #[arg(long)]
        roadmap: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum SceneCommand {
    /// Writes one `dataset_<count>.json` per obstacle count into `--out`.
    Gen {
        #[arg(long)]
        roadmap: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Restrict to these obstacle counts (comma separated).
        #[arg(long, value_delimiter = ',')]
        obstacles: Vec<usize>,
        #[arg(long)]
        scenes: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct SceneSelect {
    #[arg(long)]
    pub roadmap: Option<PathBuf>,
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub scene: usize,
}

#[derive(Debug, Subcommand)]
pub enum PlanCommand {
    Run {
        #[command(flatten)]
        select: SceneSelect,
        #[arg(long, default_value = "hiro")]
        methods: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    Run {
        #[arg(long)]
        roadmap: Option<PathBuf>,
        /// Dataset files; generated from the configuration when omitted.
        #[arg(long)]
        dataset: Vec<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "hiro,lazy,full")]
        methods: String,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub select: SceneSelect,
    #[arg(long, default_value = "hiro")]
    pub method: String,
    /// Draw the configuration space with safe zones (2-joint arms only).
    #[arg(long)]
    pub config_space: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn load_config(path: &Option<PathBuf>) -> Result<HiroConfig, BenchError> {
    match path {
        Some(p) => HiroConfig::load(p),
        None => Ok(HiroConfig::default()),
    }
}

fn obtain_roadmap(config: &HiroConfig, path: &Option<PathBuf>) -> Result<Roadmap, BenchError> {
    Ok(match path {
        Some(p) => load_roadmap_checked(p, &config.arm, &config.static_obstacles)?,
        None => Roadmap::build(&config.arm, &config.static_obstacles, config.roadmap.clone())?,
    })
}

fn checked_dataset(config: &HiroConfig, roadmap: &Roadmap, path: &Path) -> Result<SceneDataset, BenchError> {
    let dataset = load_dataset(path)?;
    dataset.verify(&config.arm, &config.static_obstacles, roadmap, false)?;
    Ok(dataset)
}

fn generate_suite(
    config: &HiroConfig,
    roadmap: &Roadmap,
    seed: Option<u64>,
    counts: &[usize],
    scenes: Option<usize>,
) -> Result<Vec<SceneDataset>, BenchError> {
    let counts = if counts.is_empty() { &config.dataset.obstacle_counts[..] } else { counts };
    let seed = seed.unwrap_or(config.dataset.seed);
    let n = scenes.unwrap_or(config.dataset.scenes_per_dataset);
    counts
        .iter()
        .map(|&k| {
            let params = config.scene_params(k);
            Ok(generate_dataset(&config.arm, &config.static_obstacles, roadmap, &params, seed, n)?)
        })
        .collect()
}

fn write_file(path: &Path, text: &str) -> Result<(), BenchError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Runs one command, writing human-readable output to `out`.
pub fn run_cli(cli: Cli, out: &mut impl Write) -> Result<(), BenchError> {
    let config = load_config(&cli.config)?;
    match cli.command {
        Command::Roadmap(RoadmapCommand::Build { out: path }) => {
            let roadmap = Roadmap::build(&config.arm, &config.static_obstacles, config.roadmap.clone())?;
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            save_roadmap(&roadmap, &path)?;
            writeln!(out, "{} nodes, {} edges, digest {}", roadmap.node_count(), roadmap.edge_count(), roadmap.digest())?;
        }
        Command::Roadmap(RoadmapCommand::Info { roadmap }) => {
            let roadmap = load_roadmap_checked(&roadmap, &config.arm, &config.static_obstacles)?;
            let degrees: Vec<usize> = (0..roadmap.node_count()).map(|v| roadmap.neighbors(v).len()).collect();
            let isolated = degrees.iter().filter(|d| **d == 0).count();
            writeln!(out, "nodes        {}", roadmap.node_count())?;
            writeln!(out, "edges        {}", roadmap.edge_count())?;
            writeln!(out, "mean degree  {:.3}", degrees.iter().sum::<usize>() as f64 / degrees.len().max(1) as f64)?;
            writeln!(out, "isolated     {isolated}")?;
            writeln!(out, "model        {}", roadmap.model_digest())?;
            writeln!(out, "static scene {}", roadmap.static_scene_digest())?;
            writeln!(out, "digest       {}", roadmap.digest())?;
        }
        Command::Scene(SceneCommand::Gen { roadmap, seed, out: dir, obstacles, scenes }) => {
            let roadmap = obtain_roadmap(&config, &roadmap)?;
            std::fs::create_dir_all(&dir)?;
            for d in generate_suite(&config, &roadmap, seed, &obstacles, scenes)? {
                let path = dir.join(format!("dataset_{:02}.json", d.obstacle_count));
                save_dataset(&d, &path)?;
                writeln!(out, "{}: {} scenes with {} obstacles", path.display(), d.scenes.len(), d.obstacle_count)?;
            }
        }
        Command::Plan(PlanCommand::Run { select, methods, out: path }) => {
            let methods = Method::parse_list(&methods)?;
            let roadmap = obtain_roadmap(&config, &select.roadmap)?;
            let dataset = checked_dataset(&config, &roadmap, &select.dataset)?;
            let mut results = Vec::new();
            let mut failed = Vec::new();
            for m in methods {
                let r = run_method(&config, &roadmap, &dataset, select.scene, m)?;
                writeln!(
                    out,
                    "{:<5} {:?} cost {} exact checks {} fuzzy edges {} time {:.3} ms",
                    m.name(),
                    r.status,
                    r.cost.map_or("-".into(), |c| format!("{c:.6}")),
                    r.stats.exact_point_checks,
                    r.stats.fuzzy_edge_checks,
                    r.stats.wall_ms
                )?;
                if !r.is_solved() {
                    failed.push(m.name());
                }
                results.push(serde_json::json!({ "method": m, "result": r }));
            }
            if let Some(path) = path {
                write_file(&path, &(serde_json::to_string_pretty(&results).expect("results serialize") + "\n"))?;
            }
            if !failed.is_empty() {
                return Err(BenchError::Planning(format!("scene {} unsolved by {}", select.scene, failed.join(", "))));
            }
        }
        Command::Bench(BenchCommand::Run { roadmap, dataset, seed, methods, reps, out: path }) => {
            let methods = Method::parse_list(&methods)?;
            let roadmap = obtain_roadmap(&config, &roadmap)?;
            let datasets = if dataset.is_empty() {
                generate_suite(&config, &roadmap, seed, &[], None)?
            } else {
                dataset.iter().map(|p| checked_dataset(&config, &roadmap, p)).collect::<Result<_, _>>()?
            };
            let report = run_bench(&config, &roadmap, &datasets, &methods, reps.unwrap_or(config.reps))?;
            write!(out, "{}", summarize(&report))?;
            if let Some(path) = path {
                write_file(&path, &report.to_json())?;
            }
        }
        Command::Render(args) => {
            let roadmap = obtain_roadmap(&config, &args.select.roadmap)?;
            let dataset = checked_dataset(&config, &roadmap, &args.select.dataset)?;
            let scene = dataset
                .scenes
                .get(args.select.scene)
                .ok_or_else(|| BenchError::Validation(format!("dataset has no scene {}", args.select.scene)))?;
            let method: Method = args.method.parse()?;
            let result = run_method(&config, &roadmap, &dataset, args.select.scene, method)?;
            let opts = RenderOptions { zone: config.planner.zone, ..Default::default() };
            let svg = if args.config_space {
                let all: Vec<CircleObstacle> = config.static_obstacles.iter().chain(&scene.obstacles).copied().collect();
                render_config_space(&config.arm, &all, &result.path, &result.path, &opts)?
            } else {
                render_workspace(&config.arm, &config.static_obstacles, &scene.obstacles, &result.path, &opts)?
            };
            write_file(&args.out, &svg)?;
            writeln!(out, "wrote {} ({:?}, {} waypoints)", args.out.display(), result.status, result.path.len())?;
        }
    }
    Ok(())
}
