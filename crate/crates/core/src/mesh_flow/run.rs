//! Mesh flow runs with periodic curvature monitors.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::curvature::{f_sigma_from, pinching_from, vertex_curvatures};
use super::diameter::intrinsic_diameter;
use super::laplacian::{mcf_step, MeshScheme};
use super::mesh::{icosphere, perturbed_icosphere, torus, MeshImmersion};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::support_flow::io::fmt_f64;

/// Named initial meshes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fixture", rename_all = "snake_case")]
pub enum MeshFixture {
    Icosphere {
        #[serde(default = "default_subdivisions")]
        subdivisions: usize,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "four")]
        ambient: usize,
    },
    /// Unit icosphere in `R⁴` with a `P₂(z)` bump in the fourth coordinate.
    PerturbedIcosphere {
        #[serde(default = "default_subdivisions")]
        subdivisions: usize,
        amplitude: f64,
    },
    Torus {
        big: f64,
        small: f64,
        #[serde(default = "torus_nu")]
        nu: usize,
        #[serde(default = "torus_nv")]
        nv: usize,
        #[serde(default = "four")]
        ambient: usize,
    },
}

fn default_subdivisions() -> usize {
    4
}
fn one() -> f64 {
    1.0
}
fn four() -> usize {
    4
}
fn torus_nu() -> usize {
    64
}
fn torus_nv() -> usize {
    32
}

impl MeshFixture {
    pub fn build<T: Real>(&self) -> Result<MeshImmersion<T>> {
        match *self {
            MeshFixture::Icosphere { subdivisions, radius, ambient } => icosphere(subdivisions, radius, ambient),
            MeshFixture::PerturbedIcosphere { subdivisions, amplitude } => perturbed_icosphere(subdivisions, amplitude),
            MeshFixture::Torus { big, small, nu, nv, ambient } => torus(big, small, nu, nv, ambient),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshRunConfig {
    pub fixture: MeshFixture,
    pub scheme: MeshScheme,
    /// Fraction of `(min edge)²/4` used as the step.
    pub dt_safety: f64,
    /// Stop once `√(area/4π)` falls to this fraction of its initial value.
    pub stop_radius_fraction: f64,
    pub t_max: Option<f64>,
    pub max_steps: usize,
    pub record_every: usize,
    pub sigma: f64,
    pub p: f64,
    /// Pinching constant reported against, `2/3` for surfaces.
    pub c0: f64,
    pub snapshot_every: Option<usize>,
}

impl MeshRunConfig {
    pub fn new(fixture: MeshFixture) -> Self {
        Self {
            fixture,
            scheme: MeshScheme::Explicit,
            dt_safety: 0.5,
            stop_radius_fraction: 0.5,
            t_max: None,
            max_steps: 1_000_000,
            record_every: 25,
            sigma: 0.1,
            p: 30.0,
            c0: 2.0 / 3.0,
            snapshot_every: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let limit = if self.scheme == MeshScheme::Explicit { 1.0 } else { 100.0 };
        if !(self.dt_safety > 0.0 && self.dt_safety <= limit) {
            return Err(Error::Parameter(format!("dt_safety = {} must lie in (0, {limit}]", self.dt_safety)));
        }
        if !(self.stop_radius_fraction > 0.0 && self.stop_radius_fraction < 1.0) {
            return Err(Error::Parameter("stop_radius_fraction must lie in (0, 1)".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Parameter("record_every must be positive".into()));
        }
        Ok(())
    }
}

/// Monitors at one instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshRecord {
    pub step: usize,
    pub t: f64,
    pub area: f64,
    /// `√(area/4π)`.
    pub radius: f64,
    pub mean_radius: f64,
    pub diameter: f64,
    pub max_ratio: f64,
    pub max_h_sq: f64,
    pub f_sigma_integral: f64,
    pub flagged: usize,
    pub max_trace_residual: f64,
}

#[derive(Debug, Clone)]
pub struct MeshRun<T> {
    pub records: Vec<MeshRecord>,
    pub snapshots: Vec<(usize, MeshImmersion<T>)>,
    pub last: MeshImmersion<T>,
    pub t: f64,
    pub steps: usize,
}

pub fn mesh_record<T: Real>(mesh: &MeshImmersion<T>, t: f64, step: usize, cfg: &MeshRunConfig) -> Result<MeshRecord> {
    let vc = vertex_curvatures(mesh)?;
    let fs = f_sigma_from(&vc, cfg.sigma, cfg.p)?;
    let pc = pinching_from(&vc, cfg.c0);
    let area = mesh.area().f64();
    Ok(MeshRecord {
        step,
        t,
        area,
        radius: (area / (4.0 * std::f64::consts::PI)).sqrt(),
        mean_radius: mesh.mean_radius().f64(),
        diameter: intrinsic_diameter(mesh)?,
        max_ratio: pc.max_ratio,
        max_h_sq: pc.max_h_sq,
        f_sigma_integral: fs.value,
        flagged: fs.flagged,
        max_trace_residual: fs.max_trace_residual,
    })
}

/// Flows the fixture by `∂φ/∂t = H⃗` until the area radius halves (by
/// default), checking that the area decreases at every step.
pub fn mesh_run<T: Real>(cfg: &MeshRunConfig) -> Result<MeshRun<T>> {
    cfg.validate()?;
    let mesh = cfg.fixture.build::<T>()?;
    mesh_run_from(cfg, mesh)
}

pub fn mesh_run_from<T: Real>(cfg: &MeshRunConfig, mut mesh: MeshImmersion<T>) -> Result<MeshRun<T>> {
    cfg.validate()?;
    let mut t = 0.0f64;
    let mut records = vec![mesh_record(&mesh, t, 0, cfg)?];
    let mut snapshots = Vec::new();
    if cfg.snapshot_every.is_some() {
        snapshots.push((0, mesh.clone()));
    }
    let r0 = records[0].radius;
    let mut area = records[0].area;
    let mut steps = 0;
    loop {
        if (area / (4.0 * std::f64::consts::PI)).sqrt() <= cfg.stop_radius_fraction * r0 {
            break;
        }
        if cfg.t_max.is_some_and(|tm| t >= tm * (1.0 - 1e-14)) || steps >= cfg.max_steps {
            break;
        }
        let mut dt = cfg.dt_safety * mesh.min_edge().f64().powi(2) / 4.0;
        if let Some(tm) = cfg.t_max {
            dt = dt.min(tm - t);
        }
        let next = mcf_step(&mesh, T::c(dt), cfg.scheme)?;
        let next_area = next.area().f64();
        if !(next_area < area) {
            return Err(Error::Mesh(format!("area did not decrease at step {} ({area} -> {next_area})", steps + 1)));
        }
        mesh = next;
        area = next_area;
        t += dt;
        steps += 1;
        if steps % cfg.record_every == 0 {
            records.push(mesh_record(&mesh, t, steps, cfg)?);
        }
        if let Some(every) = cfg.snapshot_every {
            if every > 0 && steps % every == 0 {
                snapshots.push((steps, mesh.clone()));
            }
        }
    }
    if records.last().map(|r| r.step) != Some(steps) {
        records.push(mesh_record(&mesh, t, steps, cfg)?);
    }
    Ok(MeshRun { records, snapshots, last: mesh, t, steps })
}

pub const MONITOR_HEADER: &str = "t,area,diameter,max_ratio,f_sigma_integral";

/// Monitor CSV.
pub fn monitor_csv(records: &[MeshRecord]) -> String {
    let mut out = String::from(MONITOR_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.area),
            fmt_f64(r.diameter),
            fmt_f64(r.max_ratio),
            fmt_f64(r.f_sigma_integral)
        );
    }
    out
}
