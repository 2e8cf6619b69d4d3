use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_curvlab");

fn curvlab(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = r#"
seed = 11
samples = 2000

[[scenario]]
id = "circle"
target = "support_flow"
[scenario.config]
speed = "H"
geometry = "planar"
initial = { shape = "sphere", radius = 1.0 }
n_grid = 64
stop_inradius = 0.3
record_every = 20
snapshot_every = 500

[[scenario]]
id = "ellipse-gcf"
target = "entropy_gcf"
[scenario.config]
initial = { shape = "ellipse", a = 1.5, b = 1.0 }
beta = 1.0
tau_max = 0.5
n_grid = 64

[[scenario]]
id = "small-sphere"
target = "mesh_flow"
[scenario.config]
mesh = { fixture = "icosphere", subdivisions = 2 }
record_every = 50

[[scenario]]
id = "peter-paul"
target = "curvature_algebra"
config = { suite = "peter-paul" }

[[scenario]]
id = "oval"
target = "acceptance"
config = { name = "angenent-oval" }
"#;

fn csv_files(root: &Path) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for dir in fs::read_dir(root).unwrap() {
        let dir = dir.unwrap().path();
        if dir.is_dir() {
            for f in fs::read_dir(&dir).unwrap() {
                let f = f.unwrap().path();
                if f.extension().is_some_and(|e| e == "csv") {
                    out.push((f.strip_prefix(root).unwrap().display().to_string(), fs::read_to_string(&f).unwrap()));
                }
            }
        }
    }
    out.sort();
    out
}

#[test]
fn run_writes_outputs_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let out = curvlab(&["run", &cfg, "--out", a.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let out = curvlab(&["run", &cfg, "--out", b.to_str().unwrap(), "--threads", "2"]);
    assert!(out.status.success());

    for f in ["circle/series.csv", "circle/u_0.csv", "ellipse-gcf/entropy_series.csv", "small-sphere/monitors.csv"] {
        assert!(a.join(f).exists(), "missing {f}");
    }
    let series = fs::read_to_string(a.join("circle/series.csv")).unwrap();
    assert!(series.starts_with("t,rho_minus,rho_plus,supF,pinch_ratio,area_or_volume,eta_p,f_sigma_max\n"));
    let entropy = fs::read_to_string(a.join("ellipse-gcf/entropy_series.csv")).unwrap();
    assert!(entropy.starts_with("tau,entropy,entropy_point_x,entropy_point_y,holder_defect,variance_defect,volume\n"));
    let mesh = fs::read_to_string(a.join("small-sphere/monitors.csv")).unwrap();
    assert!(mesh.starts_with("t,area,diameter,max_ratio,f_sigma_integral\n"));

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    let circle = &summary["scenarios"][0];
    assert_eq!(circle["id"], "circle");
    let t_ext = circle["metrics"]["extinction_time"].as_f64().unwrap();
    assert!((t_ext - 0.5).abs() < 1e-4, "{t_ext}");
    let manifest = fs::read_to_string(a.join("manifest")).unwrap();
    assert!(manifest.contains("root_seed 11") && manifest.contains("scenario oval target acceptance"));

    assert_eq!(csv_files(&a), csv_files(&b));
}

#[test]
fn unknown_key_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL.replace("record_every = 20", "recrod_every = 20"));
    let out = curvlab(&["run", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("recrod_every") && err.contains("line 14"), "{err}");
}

#[test]
fn failing_scenario_does_not_abort_siblings() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"
[[scenario]]
id = "below-threshold"
target = "entropy_gcf"
config = { initial = { shape = "sphere", radius = 1.0 }, beta = 0.1, tau_max = 1.0 }

[[scenario]]
id = "oval"
target = "acceptance"
config = { name = "angenent-oval" }
"#;
    let cfg = write_config(tmp.path(), body);
    let o = tmp.path().join("o");
    let out = curvlab(&["run", &cfg, "--out", o.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(o.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["scenarios"][0]["status"], "error");
    assert!(summary["scenarios"][0]["error"].as_str().unwrap().contains("beta"));
    assert_eq!(summary["scenarios"][1]["status"], "passed");
    assert!(o.join("oval/angenent-oval.csv").exists());
}

#[test]
fn verify_is_reproducible_and_rejects_zero_samples() {
    let a = curvlab(&["verify", "pinching-cone", "--seed", "5", "--samples", "1e3"]);
    let b = curvlab(&["verify", "pinching-cone", "--seed", "5", "--samples", "1000"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8_lossy(&a.stdout);
    assert!(text.contains("min_margin") && text.contains("argmin"));
    assert_eq!(curvlab(&["verify", "pinching-cone", "--samples", "0"]).status.code(), Some(2));
    assert_eq!(curvlab(&["verify", "no-such-suite"]).status.code(), Some(2));
}

#[test]
fn list_scenarios_prints_registry() {
    let out = curvlab(&["--list-scenarios"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for id in ["sphere-law", "entropy-monotonicity", "mesh-mcf", "eta-monotonicity", "pinching-cone"] {
        assert!(text.contains(id), "{id}");
    }
}

#[test]
fn bundled_sphere_config_passes_sphere_law() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/sphere_mcf.toml");
    let out = curvlab(&["run", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    let law = &summary["scenarios"][0];
    assert_eq!(law["id"], "sphere-law");
    assert_eq!(law["status"], "passed");
    assert!(tmp.path().join("sphere-law/sphere-law-H.csv").exists());
}
