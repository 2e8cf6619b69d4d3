//! Named acceptance scenarios. Each one runs a fixed experiment and
//! reports numeric checks against pinned tolerances, summary metrics and
//! CSV artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::campaign::{run_suite, CampaignReport};
use crate::entropy_gcf::{entropy_series_csv, gcf_rescaled_run, GcfRunConfig};
use crate::error::{Error, Result};
use crate::linalg::fit_line;
use crate::mesh_flow::{mesh_run, monitor_csv, MeshFixture, MeshRunConfig};
use crate::seeding::derive_seed;
use crate::speed_functions::{builtin, SpeedFunction};
use crate::support_flow::io::{fmt_f64, series_csv};
use crate::support_flow::{
    angenent_residual, angenent_support, diameter_bound_check, eta_functional, evolve, radii, rescale_alpha1,
    speed_decay_fit, FlowRunConfig, Geometry, InitialShape,
};

/// Registered scenario ids with one-line descriptions.
pub const SCENARIOS: &[(&str, &str)] = &[
    ("sphere-law", "round start under H, H², H³ and K^β: extinction time and r^{α+1} slope"),
    ("speed-decay", "spheroid under H and S₂/S₁: sup F decay exponent and radii band"),
    ("pinching-cone", "reaction terms on the pinching-cone boundary"),
    ("algebraic-bounds", "pointwise inequality suites: eqr1, minimal, Chen, Codazzi, Peter–Paul, AMC lemma"),
    ("sphere-constants", "sphere-ambient reaction defect with the tabulated constants"),
    ("entropy-monotonicity", "rescaled curve flow by K^β: entropy monotone and round limit"),
    ("affine-soliton", "ellipse under K^{1/3} stays an ellipse; under K it rounds"),
    ("angenent-oval", "Angenent oval residual and radii ratio"),
    ("mesh-mcf", "perturbed sphere in R⁴ under mean curvature flow: pinching monitors"),
    ("eta-monotonicity", "rescaled spheroid under S₂/S₁: η functional monotone"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioOptions {
    pub seed: u64,
    /// Samples per case for the randomized campaigns.
    pub samples: u64,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self { seed: 42, samples: 1_000_000 }
    }
}

/// A scalar compared against a bound with `op` one of `<=`, `<`, `>=`, `>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub op: &'static str,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, op: &'static str, bound: f64) -> Self {
        let passed = match op {
            "<=" => value <= bound,
            "<" => value < bound,
            ">=" => value >= bound,
            ">" => value > bound,
            _ => false,
        };
        Self { name: name.into(), value, op, bound, passed }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, ">=", 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub name: String,
    #[serde(skip)]
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub id: String,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, f64>,
    pub artifacts: Vec<Artifact>,
    pub passed: bool,
}

impl ScenarioReport {
    fn new(id: &str) -> Self {
        Self { id: id.into(), checks: Vec::new(), metrics: BTreeMap::new(), artifacts: Vec::new(), passed: false }
    }

    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn metric(&mut self, k: impl Into<String>, v: f64) {
        self.metrics.insert(k.into(), v);
    }

    fn artifact(&mut self, name: impl Into<String>, content: String) {
        self.artifacts.push(Artifact { name: name.into(), content });
    }

    fn finish(mut self) -> Self {
        self.passed = !self.checks.is_empty() && self.checks.iter().all(|c| c.passed);
        self
    }

    /// First failing check, if any.
    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

pub fn scenario_ids() -> impl Iterator<Item = &'static str> {
    SCENARIOS.iter().map(|s| s.0)
}

pub fn run_scenario(id: &str, opts: &ScenarioOptions) -> Result<ScenarioReport> {
    if opts.samples == 0 {
        return Err(Error::Parameter("samples must be positive".into()));
    }
    let report = match id {
        "sphere-law" => sphere_law()?,
        "speed-decay" => speed_decay()?,
        "pinching-cone" => campaigns(id, &["pinching-cone"], opts, Some(60.0))?,
        "algebraic-bounds" => {
            campaigns(id, &["eqr1", "minimal-r1", "chen", "codazzi", "peter-paul", "lemma23"], opts, None)?
        }
        "sphere-constants" => campaigns(id, &["sphere-constants"], opts, None)?,
        "entropy-monotonicity" => entropy_monotonicity(opts.seed)?,
        "affine-soliton" => affine_soliton()?,
        "angenent-oval" => angenent_oval()?,
        "mesh-mcf" => mesh_mcf()?,
        "eta-monotonicity" => eta_monotonicity()?,
        _ => return Err(Error::Unknown { kind: "scenario", name: id.to_string() }),
    };
    Ok(report.finish())
}

fn normalized(name: &str, n: usize, power: Option<f64>, k: Option<usize>) -> Result<SpeedFunction> {
    builtin(name, n, power, k)?.normalize()
}

fn sphere_law() -> Result<ScenarioReport> {
    let mut rep = ScenarioReport::new("sphere-law");
    let cases: Vec<(String, SpeedFunction, Geometry)> = vec![
        ("H".into(), normalized("H", 2, None, None)?, Geometry::Axisymmetric),
        ("H^2".into(), normalized("H^a", 2, Some(2.0), None)?, Geometry::Axisymmetric),
        ("H^3".into(), normalized("H^a", 2, Some(3.0), None)?, Geometry::Axisymmetric),
        ("K^1/3".into(), builtin("K^b", 1, Some(1.0 / 3.0), None)?, Geometry::Planar),
        ("K^1".into(), builtin("K^b", 1, Some(1.0), None)?, Geometry::Planar),
        ("K^2".into(), builtin("K^b", 1, Some(2.0), None)?, Geometry::Planar),
    ];
    for (label, f, geometry) in cases {
        let start = Instant::now();
        let alpha = f.degree();
        let mut cfg = FlowRunConfig::new(f, geometry, InitialShape::Sphere { radius: 1.0 });
        cfg.n_grid = 256;
        cfg.dt_safety = if geometry == Geometry::Planar { 0.25 } else { 0.4 };
        cfg.stop_inradius = 0.2;
        cfg.record_every = 200;
        let run = evolve::<f64>(&cfg)?;
        let elapsed = start.elapsed().as_secs_f64();
        let want_t = 1.0 / (alpha + 1.0);
        let t_ext = run.extinction.map_or(f64::NAN, |e| e.t_ext);
        let t: Vec<f64> = run.records.iter().map(|r| r.t).collect();
        let y: Vec<f64> = run.records.iter().map(|r| r.rho_plus.powf(alpha + 1.0)).collect();
        let slope = fit_line(&t, &y).map_or(f64::NAN, |l| l.slope);
        rep.metric(format!("{label} extinction time"), t_ext);
        rep.metric(format!("{label} slope"), slope);
        rep.check(Check::new(format!("{label} extinction rel error"), ((t_ext - want_t) / want_t).abs(), "<=", 1e-4));
        let want_slope = -(alpha + 1.0);
        rep.check(Check::new(format!("{label} slope rel error"), ((slope - want_slope) / want_slope).abs(), "<=", 1e-4));
        rep.check(Check::new(format!("{label} runtime s"), elapsed, "<", 10.0));
        rep.artifact(format!("sphere-law-{}.csv", file_label(&label)), series_csv(&run.records));
    }
    Ok(rep)
}

fn file_label(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

fn speed_decay() -> Result<ScenarioReport> {
    let mut rep = ScenarioReport::new("speed-decay");
    let start = Instant::now();
    let cases = [("H", normalized("H", 2, None, None)?), ("S2/S1", normalized("Sk_ratio", 2, None, Some(2))?)];
    for (label, f) in cases {
        let alpha = f.degree();
        let mut cfg = FlowRunConfig::new(f, Geometry::Axisymmetric, InitialShape::Spheroid { a: 1.2, b: 1.0 });
        cfg.dt_safety = 0.4;
        cfg.stop_inradius = 0.01;
        cfg.record_every = 100;
        let run = evolve::<f64>(&cfg)?;
        let ext = run.extinction.ok_or_else(|| Error::Fit(format!("{label}: no extinction fit")))?;
        let fit = speed_decay_fit(&run.records, ext.t_ext, alpha)?;
        let band = diameter_bound_check(&run.records, ext.t_ext, alpha)?;
        rep.metric(format!("{label} extinction time"), ext.t_ext);
        rep.metric(format!("{label} sup F slope"), fit.slope);
        rep.metric(format!("{label} sup F r_squared"), fit.r_squared);
        rep.metric(format!("{label} band factor"), band.band_factor());
        let want = -alpha / (alpha + 1.0);
        rep.check(Check::new(format!("{label} slope error"), (fit.slope - want).abs(), "<=", 0.05));
        rep.check(Check::new(format!("{label} radii band factor"), band.band_factor(), "<=", 3.0));
        rep.artifact(format!("speed-decay-{}.csv", file_label(label)), series_csv(&run.records));
    }
    rep.check(Check::new("runtime s", start.elapsed().as_secs_f64(), "<", 30.0));
    Ok(rep)
}

const CASES_HEADER: &str = "suite,case,samples,min_margin,violations,passed";

fn campaigns(id: &str, suites: &[&str], opts: &ScenarioOptions, budget: Option<f64>) -> Result<ScenarioReport> {
    let mut rep = ScenarioReport::new(id);
    let start = Instant::now();
    let mut csv = format!("{CASES_HEADER}\n");
    for suite in suites {
        let r: CampaignReport = run_suite(suite, opts.seed, opts.samples)?;
        for c in &r.cases {
            let _ = writeln!(csv, "{},{},{},{},{},{}", suite, c.label, c.samples, fmt_f64(c.min_margin), c.violations, c.passed);
            rep.metric(format!("{} min margin", c.label), c.min_margin);
            rep.check(Check::new(format!("{} violations", c.label), c.violations as f64, "<=", 0.0));
        }
        for (k, v) in &r.extras {
            rep.metric(k.clone(), *v);
        }
    }
    if let Some(limit) = budget {
        rep.check(Check::new("runtime s", start.elapsed().as_secs_f64(), "<", limit));
    }
    rep.artifact(format!("{id}.csv"), csv);
    Ok(rep)
}

fn entropy_monotonicity(seed: u64) -> Result<ScenarioReport> {
    let mut rep = ScenarioReport::new("entropy-monotonicity");
    let start = Instant::now();
    let mut jobs = Vec::new();
    for beta in [0.5, 1.0, 2.0] {
        for i in 0..5u64 {
            let run_seed = derive_seed(seed, "entropy-curves", i);
            jobs.push((beta, i, run_seed));
        }
    }
    let runs: Vec<_> = jobs
        .par_iter()
        .map(|&(beta, i, s)| {
            let mut cfg =
                GcfRunConfig::new(Geometry::Planar, InitialShape::RandomTrig { modes: 4, amplitude: 0.9 }, beta, 6.0);
            cfg.seed = s;
            gcf_rescaled_run::<f64>(&cfg).map(|r| (beta, i, r))
        })
        .collect::<Result<_>>()?;
    let omega = Geometry::Planar.sphere_area();
    for (beta, i, run) in runs {
        let label = format!("beta={beta} curve {i}");
        let first = run.records.first().map_or(f64::NAN, |r| r.entropy);
        let last = run.records.last().map_or(f64::NAN, |r| r.entropy);
        rep.metric(format!("{label} initial entropy"), first);
        rep.metric(format!("{label} final entropy"), last);
        rep.check(Check::new(format!("{label} max entropy increase"), run.max_entropy_increase, "<=", 1e-6));
        rep.check(Check::new(format!("{label} max slope minus Holder bound"), run.max_slope_excess, "<=", 1e-6));
        rep.check(Check::new(format!("{label} max |∫dσ − 2π|"), run.max_sigma_error * omega, "<=", 1e-8));
        rep.check(Check::new(format!("{label} entropy at tau=6"), last.abs(), "<=", 1e-3));
        rep.artifact(format!("entropy-beta{}-curve{i}.csv", file_label(&beta.to_string())), entropy_series_csv(&run.records));
    }
    rep.check(Check::new("runtime s", start.elapsed().as_secs_f64(), "<", 60.0));
    Ok(rep)
}

fn affine_soliton() -> Result<ScenarioReport> {
    let mut rep = ScenarioReport::new("affine-soliton");
    let tau_max = 2.0;
    let ellipse = InitialShape::Ellipse { a: 2.0, b: 1.0 };
    let mut cfg = GcfRunConfig::new(Geometry::Planar, ellipse.clone(), 1.0 / 3.0, tau_max);
    cfg.record_every = 10;
    let run = gcf_rescaled_run::<f64>(&cfg)?;
    let ecc0 = run.records[0].eccentricity.unwrap_or(f64::NAN);
    let e0 = run.records[0].entropy;
    let mut ecc_drift = 0.0f64;
    let mut entropy_drift = 0.0f64;
    for r in run.records.iter().skip(1) {
        let ecc = r.eccentricity.unwrap_or(f64::NAN);
        ecc_drift = ecc_drift.max((ecc - ecc0).abs() / r.tau);
        entropy_drift = entropy_drift.max((r.entropy - e0).abs() / r.tau);
    }
    rep.metric("beta=1/3 initial eccentricity", ecc0);
    rep.check(Check::new("beta=1/3 eccentricity drift per unit tau", ecc_drift, "<=", 1e-3));
    rep.check(Check::new("beta=1/3 entropy drift per unit tau", entropy_drift, "<=", 1e-4));
    rep.artifact("affine-soliton-beta1_3.csv", entropy_series_csv(&run.records));

    let mut cfg = GcfRunConfig::new(Geometry::Planar, ellipse, 1.0, tau_max);
    cfg.record_every = 10;
    let run = gcf_rescaled_run::<f64>(&cfg)?;
    let ecc: Vec<f64> = run.records.iter().map(|r| r.eccentricity.unwrap_or(f64::NAN)).collect();
    let strictly = ecc.windows(2).all(|w| w[1] < w[0]);
    rep.metric("beta=1 final eccentricity", *ecc.last().unwrap_or(&f64::NAN));
    rep.check(Check::flag("beta=1 eccentricity strictly decreasing", strictly));
    rep.artifact("affine-soliton-beta1.csv", entropy_series_csv(&run.records));
    Ok(rep)
}

fn angenent_oval() -> Result<ScenarioReport> {
    let mut rep = ScenarioReport::new("angenent-oval");
    let res = angenent_residual(-2.0, 512, 1e-4)?;
    rep.metric("residual t=-2", res);
    rep.check(Check::new("residual at t=-2", res, "<=", 1e-2));
    let mut csv = String::from("t,rho_minus,rho_plus,ratio\n");
    let mut ratios = Vec::new();
    for t in [-1.0, -2.0, -5.0] {
        let r = radii(&angenent_support(t, 512)?)?;
        let ratio = r.rho_plus / r.rho_minus;
        let _ = writeln!(csv, "{},{},{},{}", fmt_f64(t), fmt_f64(r.rho_minus), fmt_f64(r.rho_plus), fmt_f64(ratio));
        rep.metric(format!("radii ratio t={t}"), ratio);
        ratios.push(ratio);
    }
    rep.check(Check::flag("radii ratio strictly increasing as t decreases", ratios.windows(2).all(|w| w[1] > w[0])));
    rep.artifact("angenent-oval.csv", csv);
    Ok(rep)
}

/// Largest increase between consecutive values relative to the earlier one.
fn max_relative_increase(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE)).fold(f64::NEG_INFINITY, f64::max)
}

fn mesh_mcf() -> Result<ScenarioReport> {
    let mut rep = ScenarioReport::new("mesh-mcf");
    let start = Instant::now();
    let mut cfg = MeshRunConfig::new(MeshFixture::PerturbedIcosphere { subdivisions: 4, amplitude: 0.05 });
    cfg.record_every = 20;
    let run = mesh_run::<f64>(&cfg)?;
    let first = &run.records[0];
    let last = run.records.last().expect("records");
    rep.metric("vertices", run.last.vertex_count() as f64);
    rep.metric("initial max ratio", first.max_ratio);
    rep.metric("final max ratio", last.max_ratio);
    rep.metric("initial f_sigma integral", first.f_sigma_integral);
    rep.metric("final f_sigma integral", last.f_sigma_integral);
    rep.metric("final radius fraction", last.radius / first.radius);
    rep.check(Check::new("initial max ratio above 1/2", first.max_ratio, ">", 0.5));
    rep.check(Check::new("initial max ratio below 2/3", first.max_ratio, "<", 2.0 / 3.0));
    let ratios: Vec<f64> = run.records.iter().map(|r| r.max_ratio).collect();
    let fint: Vec<f64> = run.records.iter().map(|r| r.f_sigma_integral).collect();
    rep.check(Check::new("max ratio relative increase", max_relative_increase(&ratios), "<=", 1e-9));
    rep.check(Check::new("f_sigma integral relative increase", max_relative_increase(&fint), "<=", 1e-9));
    rep.check(Check::new("final radius fraction", last.radius / first.radius, "<=", 0.5));
    rep.check(Check::new("flagged vertices", run.records.iter().map(|r| r.flagged).max().unwrap_or(0) as f64, "<=", 0.0));
    rep.artifact("mesh-mcf-perturbed.csv", monitor_csv(&run.records));

    let mut cfg = MeshRunConfig::new(MeshFixture::Icosphere { subdivisions: 4, radius: 1.0, ambient: 4 });
    cfg.record_every = 20;
    let round = mesh_run::<f64>(&cfg)?;
    let err = round
        .records
        .iter()
        .map(|r| {
            let exact = 1.0 - 4.0 * r.t;
            (r.mean_radius.powi(2) - exact).abs() / exact
        })
        .fold(0.0f64, f64::max);
    rep.metric("round control max rel error", err);
    rep.check(Check::new("round control r² = r0² − 4t rel error", err, "<=", 0.01));
    rep.artifact("mesh-mcf-round.csv", monitor_csv(&round.records));
    rep.check(Check::new("runtime s", start.elapsed().as_secs_f64(), "<", 300.0));
    Ok(rep)
}

fn eta_monotonicity() -> Result<ScenarioReport> {
    let mut rep = ScenarioReport::new("eta-monotonicity");
    let f = normalized("Sk_ratio", 2, None, Some(2))?;
    let mut cfg = FlowRunConfig::new(f.clone(), Geometry::Axisymmetric, InitialShape::Spheroid { a: 1.2, b: 1.0 });
    cfg.dt_safety = 0.4;
    cfg.stop_inradius = 0.05;
    cfg.record_every = 100;
    cfg.snapshot_every = Some(1);
    let run = evolve::<f64>(&cfg)?;
    let ext = run.extinction.ok_or_else(|| Error::Fit("no extinction fit".into()))?;
    let states: Vec<_> = run.snapshots.iter().map(|(_, s)| s.clone()).collect();
    let point = run.last.steiner_point();
    let rescaled = rescale_alpha1(&states, &f, ext.t_ext, &point)?;
    let mut csv = String::from("tau,eta_2,eta_6\n");
    let mut series = [Vec::new(), Vec::new()];
    for (tau, s) in &rescaled {
        let e2 = eta_functional(s, &f, 2.0)?;
        let e6 = eta_functional(s, &f, 6.0)?;
        let _ = writeln!(csv, "{},{},{}", fmt_f64(*tau), fmt_f64(e2), fmt_f64(e6));
        series[0].push(e2);
        series[1].push(e6);
    }
    rep.metric("rescaled states", rescaled.len() as f64);
    for (p, v) in [2, 6].iter().zip(&series) {
        let worst = v.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        rep.metric(format!("p={p} initial"), v[0]);
        rep.metric(format!("p={p} final"), *v.last().unwrap_or(&f64::NAN));
        rep.check(Check::new(format!("p={p} max per-step increase"), worst, "<=", 1e-6));
    }
    rep.artifact("eta-monotonicity.csv", csv);
    Ok(rep)
}
