use std::path::Path;
use std::process::Command;

use hiro::bench::{BenchReport, HiroConfig};
use hiro::roadmap::RoadmapParams;

fn small_config(dir: &Path) -> std::path::PathBuf {
    let mut config = HiroConfig { roadmap: RoadmapParams { node_count: 400, ..Default::default() }, reps: 2, ..Default::default() };
    config.dataset.obstacle_counts = vec![0, 6];
    config.dataset.scenes_per_dataset = 3;
    let path = dir.join("config.json");
    std::fs::write(&path, config.to_json()).unwrap();
    path
}

fn hiro(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hiro")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

#[test]
fn full_pipeline_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();

    let (code, out, err) = hiro(&["--config", cfg, "roadmap", "build", "--out", &p("roadmap.json")]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("nodes"));
    let (code, out, _) = hiro(&["--config", cfg, "roadmap", "info", "--roadmap", &p("roadmap.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("digest"));

    let (code, _, err) = hiro(&["--config", cfg, "scene", "gen", "--roadmap", &p("roadmap.json"), "--seed", "5", "--out", &p("scenes")]);
    assert_eq!(code, 0, "{err}");
    let d0 = p("scenes/dataset_00.json");
    let d6 = p("scenes/dataset_06.json");
    assert!(Path::new(&d6).exists());

    let (code, out, err) = hiro(&[
        "--config", cfg, "plan", "run", "--roadmap", &p("roadmap.json"), "--dataset", &d6, "--scene", "1", "--methods", "hiro,lazy,full",
        "--out", &p("plan.json"),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 3);

    let (code, out, err) = hiro(&[
        "--config", cfg, "bench", "run", "--roadmap", &p("roadmap.json"), "--dataset", &d0, "--dataset", &d6, "--out", &p("report.json"),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("Planning time"));
    let report: BenchReport = serde_json::from_str(&std::fs::read_to_string(p("report.json")).unwrap()).unwrap();
    assert_eq!(report.records.len(), 2 * 3 * 3);

    // Without scene obstacles every method solves every scene at the same cost.
    for scene in 0..3 {
        let costs: Vec<f64> =
            report.records.iter().filter(|r| r.obstacle_count == 0 && r.scene == scene).map(|r| r.cost.unwrap()).collect();
        assert_eq!(costs.len(), 3);
        assert!(costs.iter().all(|c| (c - costs[0]).abs() < 1e-9), "{costs:?}");
    }
    // Means are averages of the recorded per-scene medians.
    for s in &report.summaries {
        let times: Vec<f64> = report
            .records
            .iter()
            .filter(|r| r.method == s.method && r.obstacle_count == s.obstacle_count)
            .map(|r| r.median_ms)
            .collect();
        assert!((times.iter().sum::<f64>() / times.len() as f64 - s.mean_ms).abs() < 1e-9);
    }

    let (code, _, err) = hiro(&[
        "--config", cfg, "render", "--roadmap", &p("roadmap.json"), "--dataset", &d6, "--scene", "0", "--out", &p("scene.svg"),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(std::fs::read_to_string(p("scene.svg")).unwrap().starts_with("<svg"));
    // The desk arm has three joints, so the configuration-space view is refused.
    let (code, _, _) = hiro(&[
        "--config", cfg, "render", "--roadmap", &p("roadmap.json"), "--dataset", &d6, "--config-space", "--out", &p("cs.svg"),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn digest_mismatches_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let roadmap = dir.path().join("roadmap.json");
    let (code, _, _) = hiro(&["--config", cfg.to_str().unwrap(), "roadmap", "build", "--out", roadmap.to_str().unwrap()]);
    assert_eq!(code, 0);

    // Same roadmap, different arm: rejected before anything runs.
    let mut other = HiroConfig::from_json(&std::fs::read_to_string(&cfg).unwrap()).unwrap();
    other.arm = hiro::kinematics::ArmModel::new(vec![0.4, 0.3, 0.25]).unwrap();
    let other_cfg = dir.path().join("other.json");
    std::fs::write(&other_cfg, other.to_json()).unwrap();
    let (code, _, err) = hiro(&["--config", other_cfg.to_str().unwrap(), "roadmap", "info", "--roadmap", roadmap.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("digest"), "{err}");

    let (code, _, _) = hiro(&["--config", cfg.to_str().unwrap(), "bench", "run", "--methods", "rrt"]);
    assert_eq!(code, 2);
}
