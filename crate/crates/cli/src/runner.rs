//! Scenario dispatch and output files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use curvlab::campaign::run_suite;
use curvlab::entropy_gcf::{entropy_series_csv, gcf_rescaled_run};
use curvlab::mesh_flow::{mesh_run, monitor_csv, write_mesh};
use curvlab::scenarios::{run_scenario, Check, ScenarioOptions};
use curvlab::support_flow::io::{fmt_f64, series_csv, snapshot_csv};
use curvlab::support_flow::{diameter_bound_check, evolve, speed_decay_fit, StopReason};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Plan, Scenario, TargetConfig};

/// Per-record tolerance for the monotone monitors of free-form runs.
const MONOTONE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Passed,
    Failed,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSummary {
    pub id: String,
    pub target: &'static str,
    pub seed: u64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, f64>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub samples: u64,
    pub passed: bool,
    pub scenarios: Vec<ScenarioSummary>,
}

struct Outcome {
    checks: Vec<Check>,
    metrics: BTreeMap<String, f64>,
    files: Vec<(String, String)>,
}

impl Outcome {
    fn new() -> Self {
        Self { checks: Vec::new(), metrics: BTreeMap::new(), files: Vec::new() }
    }

    fn metric(&mut self, k: &str, v: f64) {
        self.metrics.insert(k.to_string(), v);
    }
}

fn max_increase(v: &[f64], relative: bool) -> f64 {
    v.windows(2)
        .map(|w| if relative { (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE) } else { w[1] - w[0] })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn run_target(sc: &Scenario, samples: u64) -> anyhow::Result<Outcome> {
    let mut o = Outcome::new();
    match &sc.config {
        TargetConfig::SupportFlow(spec) => {
            let cfg = spec.build(sc.seed)?;
            let run = evolve::<f64>(&cfg)?;
            let alpha = cfg.speed.degree();
            o.metric("steps", run.steps as f64);
            o.metric("rejected_steps", run.rejected as f64);
            o.metric("t_final", run.last.t);
            if let Some(ext) = run.extinction {
                o.metric("extinction_time", ext.t_ext);
                o.metric("radius_power_slope", ext.slope);
                o.metric("radius_power_r_squared", ext.r_squared);
                o.checks.push(Check::flag("extinction fit unflagged", !ext.flagged));
                if let Ok(fit) = speed_decay_fit(&run.records, ext.t_ext, alpha) {
                    o.metric("sup_f_slope", fit.slope);
                    o.metric("sup_f_slope_expected", -alpha / (alpha + 1.0));
                }
                if let Ok(band) = diameter_bound_check(&run.records, ext.t_ext, alpha) {
                    o.metric("radii_band_factor", band.band_factor());
                }
            } else if run.stop == StopReason::Extinction {
                o.checks.push(Check::flag("extinction fit unflagged", false));
            }
            for (i, p) in cfg.monitors.eta_p.iter().enumerate() {
                let v: Vec<f64> = run.records.iter().map(|r| r.eta_p[i]).collect();
                o.checks.push(Check::new(format!("eta p={p} max increase"), max_increase(&v, false), "<=", MONOTONE_TOLERANCE));
            }
            o.files.push(("series.csv".into(), series_csv(&run.records)));
            for (step, s) in &run.snapshots {
                o.files.push((format!("u_{step}.csv"), snapshot_csv(s)));
            }
        }
        TargetConfig::EntropyGcf(spec) => {
            let cfg = spec.build(sc.seed)?;
            let run = gcf_rescaled_run::<f64>(&cfg)?;
            let omega = cfg.geometry.sphere_area();
            o.metric("steps", run.steps as f64);
            o.metric("initial_entropy", run.records.first().map_or(f64::NAN, |r| r.entropy));
            o.metric("final_entropy", run.records.last().map_or(f64::NAN, |r| r.entropy));
            o.metric("max_volume_drift", run.max_volume_drift);
            o.checks.push(Check::new("max entropy increase", run.max_entropy_increase, "<=", MONOTONE_TOLERANCE));
            o.checks.push(Check::new("max slope minus Holder bound", run.max_slope_excess, "<=", MONOTONE_TOLERANCE));
            o.checks.push(Check::new("max surface measure error", run.max_sigma_error * omega, "<=", 1e-8));
            o.files.push(("entropy_series.csv".into(), entropy_series_csv(&run.records)));
        }
        TargetConfig::MeshFlow(spec) => {
            let cfg = spec.build()?;
            let run = mesh_run::<f64>(&cfg)?;
            let first = &run.records[0];
            let last = run.records.last().unwrap_or(first);
            o.metric("steps", run.steps as f64);
            o.metric("t_final", run.t);
            o.metric("initial_max_ratio", first.max_ratio);
            o.metric("final_max_ratio", last.max_ratio);
            o.metric("initial_f_sigma_integral", first.f_sigma_integral);
            o.metric("final_f_sigma_integral", last.f_sigma_integral);
            o.metric("final_radius_fraction", last.radius / first.radius);
            let ratio: Vec<f64> = run.records.iter().map(|r| r.max_ratio).collect();
            let fint: Vec<f64> = run.records.iter().map(|r| r.f_sigma_integral).collect();
            o.metric("max_ratio_relative_increase", max_increase(&ratio, true));
            o.metric("f_sigma_integral_relative_increase", max_increase(&fint, true));
            let flagged = run.records.iter().map(|r| r.flagged).max().unwrap_or(0);
            o.checks.push(Check::new("flagged vertices", flagged as f64, "<=", 0.0));
            o.files.push(("monitors.csv".into(), monitor_csv(&run.records)));
            for (step, m) in &run.snapshots {
                o.files.push((format!("mesh_{step}.off"), write_mesh(m)));
            }
        }
        TargetConfig::CurvatureAlgebra(spec) => {
            let report = run_suite(&spec.suite, sc.seed, spec.samples.unwrap_or(samples))?;
            let mut csv = String::from("case,samples,min_margin,violations,passed\n");
            for c in &report.cases {
                let _ = writeln!(csv, "{},{},{},{},{}", c.label, c.samples, fmt_f64(c.min_margin), c.violations, c.passed);
                o.metric(&format!("{} min margin", c.label), c.min_margin);
                o.checks.push(Check::new(format!("{} violations", c.label), c.violations as f64, "<=", 0.0));
            }
            for (k, v) in &report.extras {
                o.metric(k, *v);
            }
            o.files.push(("cases.csv".into(), csv));
            o.files.push(("report.json".into(), serde_json::to_string_pretty(&report)? + "\n"));
        }
        TargetConfig::Acceptance(spec) => {
            let opts = ScenarioOptions { seed: sc.seed, samples: spec.samples.unwrap_or(samples) };
            let rep = run_scenario(&spec.name, &opts)?;
            o.checks = rep.checks;
            o.metrics = rep.metrics;
            o.files = rep.artifacts.into_iter().map(|a| (a.name, a.content)).collect();
        }
    }
    Ok(o)
}

fn write_files(dir: &Path, files: &[(String, String)]) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, content) in files {
        let path = dir.join(name);
        fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn execute(sc: &Scenario, samples: u64, out: &Path) -> ScenarioSummary {
    let mut summary = ScenarioSummary {
        id: sc.id.clone(),
        target: sc.target.as_str(),
        seed: sc.seed,
        status: Status::Error,
        error: None,
        checks: Vec::new(),
        metrics: BTreeMap::new(),
        files: Vec::new(),
    };
    let result = run_target(sc, samples).and_then(|o| {
        write_files(&out.join(&sc.out), &o.files)?;
        Ok(o)
    });
    match result {
        Ok(o) => {
            summary.status = if o.checks.iter().all(|c| c.passed) { Status::Passed } else { Status::Failed };
            summary.files = o.files.into_iter().map(|(name, _)| format!("{}/{name}", sc.out)).collect();
            summary.checks = o.checks;
            summary.metrics = o.metrics;
        }
        Err(e) => summary.error = Some(format!("{e:#}")),
    }
    summary
}

fn manifest(plan: &Plan, config: &Path, threads: usize) -> String {
    let mut m = String::new();
    let _ = writeln!(m, "curvlab-cli {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "config {}", config.display());
    let _ = writeln!(m, "root_seed {}", plan.seed);
    let _ = writeln!(m, "samples {}", plan.samples);
    let _ = writeln!(m, "threads {threads}");
    for sc in &plan.scenarios {
        let _ = writeln!(m, "scenario {} target {} seed {} out {}", sc.id, sc.target.as_str(), sc.seed, sc.out);
    }
    m
}

/// Runs every scenario of the plan in parallel and writes `summary.json`
/// and `manifest` under `out`.
pub fn run_plan(plan: &Plan, config: &Path, out: &Path) -> anyhow::Result<RunSummary> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let scenarios: Vec<ScenarioSummary> = plan.scenarios.par_iter().map(|sc| execute(sc, plan.samples, out)).collect();
    let summary = RunSummary {
        seed: plan.seed,
        samples: plan.samples,
        passed: scenarios.iter().all(|s| s.status == Status::Passed),
        scenarios,
    };
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    fs::write(out.join("manifest"), manifest(plan, config, rayon::current_num_threads()))?;
    Ok(summary)
}

pub fn default_out(config: &Path) -> PathBuf {
    let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    PathBuf::from(format!("{stem}-out"))
}
