//! Explicit RK4 integration of `∂u/∂t = −f(λ)` with adaptive steps.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::monitors::{eta_functional, f_sigma_monitor, pinching_ratio};
use super::radii::radii;
use super::state::{CurvatureField, Geometry, SupportState};
use crate::error::{Error, Result};
use crate::linalg::fit_line;
use crate::real::Real;
use crate::seeding::substream;
use crate::speed_functions::SpeedFunction;

/// `f(λ)` at every node together with the curvature field it came from.
pub fn speed_field<T: Real>(s: &SupportState<T>, f: &SpeedFunction) -> Result<(Vec<T>, CurvatureField<T>)> {
    check_dim(s, f)?;
    let c = s.curvature_radii()?;
    let v = (0..c.nodes()).map(|j| f.eval(c.node_lambda(j))).collect::<Result<Vec<T>>>()?;
    Ok((v, c))
}

fn check_dim<T: Real>(s: &SupportState<T>, f: &SpeedFunction) -> Result<()> {
    if f.n() != s.geometry().dim() {
        return Err(Error::Parameter(format!(
            "speed {} is for n = {} but the state has n = {}",
            f.name(),
            f.n(),
            s.geometry().dim()
        )));
    }
    Ok(())
}

/// `safety·Δ²/D` with `D = max Σᵢ fᵢ λᵢ²`, the largest diffusion
/// coefficient of the linearized equation.
pub fn stable_dt<T: Real>(s: &SupportState<T>, f: &SpeedFunction, safety: T) -> Result<T> {
    check_dim(s, f)?;
    let c = s.curvature_radii()?;
    let mut d = T::zero();
    for j in 0..c.nodes() {
        let l = c.node_lambda(j);
        let g = f.grad(l)?;
        d = d.max(g.iter().zip(l).map(|(&gi, &li)| gi * li * li).sum());
    }
    let h = s.grid().step();
    Ok(safety * h * h / d)
}

fn rhs<T: Real>(s: &SupportState<T>, f: &SpeedFunction) -> Result<Vec<T>> {
    Ok(speed_field(s, f)?.0.into_iter().map(|v| -v).collect())
}

/// One classical RK4 step; every stage must stay convex.
pub fn step<T: Real>(s: &SupportState<T>, f: &SpeedFunction, dt: T) -> Result<SupportState<T>> {
    let half = T::c(0.5) * dt;
    let axpy = |a: T, k: &[T]| -> Vec<T> { s.u.iter().zip(k).map(|(&u, &k)| u + a * k).collect() };
    let k1 = rhs(s, f)?;
    let k2 = rhs(&s.with_u(axpy(half, &k1), s.t + half), f)?;
    let k3 = rhs(&s.with_u(axpy(half, &k2), s.t + half), f)?;
    let k4 = rhs(&s.with_u(axpy(dt, &k3), s.t + dt), f)?;
    let sixth = dt / T::c(6.0);
    let u: Vec<T> = (0..s.len())
        .map(|j| s.u[j] + sixth * (k1[j] + T::c(2.0) * (k2[j] + k3[j]) + k4[j]))
        .collect();
    if let Some(j) = u.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { node: j });
    }
    let next = s.with_u(u, s.t + dt);
    next.curvature_radii()?;
    Ok(next)
}

/// Named initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum InitialShape {
    Sphere {
        radius: f64,
    },
    /// Planar ellipse, semi-axes `a` (x) and `b` (y).
    Ellipse {
        a: f64,
        b: f64,
    },
    /// Spheroid, semi-axis `a` along the symmetry axis, equatorial `b`.
    Spheroid {
        a: f64,
        b: f64,
    },
    /// `u = mean + Σ cos[k−1] cos kθ + sin[k−1] sin kθ`. Axisymmetric
    /// states use the cosine series in `φ` and ignore `sin`.
    Fourier {
        mean: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    /// Random convex trigonometric polynomial with modes `2..=modes`, drawn
    /// from the run seed; `amplitude < 1` bounds `Σ (k²−1)|c_k|`.
    RandomTrig {
        modes: usize,
        amplitude: f64,
    },
}

impl InitialShape {
    pub fn build<T: Real>(&self, geometry: Geometry, n: usize, seed: u64) -> Result<SupportState<T>> {
        let positive = |x: f64, what: &str| -> Result<()> {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{what} must be positive, got {x}")))
            }
        };
        match self {
            InitialShape::Sphere { radius } => {
                positive(*radius, "radius")?;
                SupportState::sphere(geometry, n, *radius)
            }
            InitialShape::Ellipse { a, b } => {
                positive(*a, "a")?;
                positive(*b, "b")?;
                if geometry != Geometry::Planar {
                    return Err(Error::Parameter("ellipse needs planar geometry".into()));
                }
                SupportState::ellipse(n, *a, *b)
            }
            InitialShape::Spheroid { a, b } => {
                positive(*a, "a")?;
                positive(*b, "b")?;
                if geometry != Geometry::Axisymmetric {
                    return Err(Error::Parameter("spheroid needs axisymmetric geometry".into()));
                }
                SupportState::spheroid(n, *a, *b)
            }
            InitialShape::Fourier { mean, cos, sin } => {
                let (c, s) = (cos.clone(), sin.clone());
                let mean = *mean;
                SupportState::from_fn(geometry, n, move |t| {
                    let mut u = mean;
                    for (k, a) in c.iter().enumerate() {
                        u += a * ((k + 1) as f64 * t).cos();
                    }
                    if geometry == Geometry::Planar {
                        for (k, b) in s.iter().enumerate() {
                            u += b * ((k + 1) as f64 * t).sin();
                        }
                    }
                    u
                })
            }
            InitialShape::RandomTrig { modes, amplitude } => {
                if *modes < 2 || !(*amplitude > 0.0 && *amplitude < 1.0) {
                    return Err(Error::Parameter("random_trig needs modes >= 2 and 0 < amplitude < 1".into()));
                }
                let mut rng = substream(seed, "random-trig", 0);
                let mut coef = Vec::new();
                let mut weight = 0.0;
                for k in 2..=*modes {
                    let (a, b): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    weight += ((k * k) as f64 - 1.0) * (a.abs() + b.abs());
                    coef.push((k, a, b));
                }
                let scale = amplitude / weight;
                let shift: (f64, f64) = (rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
                SupportState::from_fn(geometry, n, move |t| {
                    let mut u = 1.0 + shift.0 * t.cos() + shift.1 * t.sin();
                    for &(k, a, b) in &coef {
                        let kt = k as f64 * t;
                        u += scale * (a * kt.cos() + b * kt.sin());
                    }
                    u
                })
            }
        }
    }
}

/// Monitors sampled at every record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MonitorSet {
    /// Exponents `p` for the η functional (1-homogeneous speeds only).
    #[serde(default)]
    pub eta_p: Vec<f64>,
    /// `σ` for `max |h̊|²/H^{2−σ}` (surfaces only).
    #[serde(default)]
    pub f_sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowRunConfig {
    pub speed: SpeedFunction,
    pub geometry: Geometry,
    pub initial: InitialShape,
    pub n_grid: usize,
    pub dt_safety: f64,
    /// The run stops once the circumradius drops below this.
    pub stop_inradius: f64,
    pub t_max: Option<f64>,
    pub max_steps: usize,
    pub record_every: usize,
    pub snapshot_every: Option<usize>,
    pub monitors: MonitorSet,
    pub seed: u64,
}

impl FlowRunConfig {
    pub fn new(speed: SpeedFunction, geometry: Geometry, initial: InitialShape) -> Self {
        Self {
            speed,
            geometry,
            initial,
            n_grid: 256,
            dt_safety: 0.2,
            stop_inradius: 0.05,
            t_max: None,
            max_steps: 10_000_000,
            record_every: 50,
            snapshot_every: None,
            monitors: MonitorSet::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid < 64 {
            return Err(Error::Parameter(format!("N = {} must be at least 64", self.n_grid)));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 0.5) {
            return Err(Error::Parameter(format!("dt_safety = {} must lie in (0, 0.5]", self.dt_safety)));
        }
        if !(self.stop_inradius > 0.0) {
            return Err(Error::Parameter("stop_inradius must be positive".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Parameter("record_every must be positive".into()));
        }
        if self.speed.n() != self.geometry.dim() {
            return Err(Error::Parameter(format!(
                "speed {} has n = {} but geometry has n = {}",
                self.speed.name(),
                self.speed.n(),
                self.geometry.dim()
            )));
        }
        Ok(())
    }
}

/// One sampled instant of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeriesRecord {
    pub step: usize,
    pub t: f64,
    pub rho_minus: f64,
    pub rho_plus: f64,
    pub sup_f: f64,
    pub pinch_ratio: f64,
    pub area_or_volume: f64,
    pub eta_p: Vec<f64>,
    pub f_sigma_max: Option<f64>,
}

/// Extinction time from the tail of `ρ₊^{α+1}` against `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtinctionFit {
    pub t_ext: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub points: usize,
    /// Set when the fit is poor (`R² < 0.999`) or degenerate.
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Extinction,
    TimeLimit,
    StepLimit,
}

#[derive(Debug, Clone)]
pub struct FlowRun<T: Real> {
    pub records: Vec<TimeSeriesRecord>,
    pub snapshots: Vec<(usize, SupportState<T>)>,
    pub last: SupportState<T>,
    pub extinction: Option<ExtinctionFit>,
    pub steps: usize,
    pub rejected: usize,
    pub stop: StopReason,
}

/// `max_θ (u − ⟨s,θ⟩)` about the Steiner point, an upper bound for `ρ₊`.
fn circumradius_bound<T: Real>(s: &SupportState<T>) -> T {
    let z = s.steiner_point();
    (0..s.len()).map(|j| s.u[j] - s.grid().pairing(&z, j)).fold(T::neg_infinity(), T::max)
}

pub fn record<T: Real>(s: &SupportState<T>, f: &SpeedFunction, m: &MonitorSet, step: usize) -> Result<TimeSeriesRecord> {
    let (v, c) = speed_field(s, f)?;
    let r = radii(s)?;
    let eta_p = m.eta_p.iter().map(|&p| eta_functional(s, f, p).map(|x| x.f64())).collect::<Result<_>>()?;
    let f_sigma_max = match m.f_sigma {
        Some(sig) => Some(f_sigma_monitor(s, T::c(sig))?.f64()),
        None => None,
    };
    Ok(TimeSeriesRecord {
        step,
        t: s.t.f64(),
        rho_minus: r.rho_minus.f64(),
        rho_plus: r.rho_plus.f64(),
        sup_f: v.iter().copied().fold(T::neg_infinity(), T::max).f64(),
        pinch_ratio: pinching_ratio(s)?.f64(),
        area_or_volume: s.volume_with(&c).f64(),
        eta_p,
        f_sigma_max,
    })
}

/// Fits `ρ₊^{α+1} = m t + b` on the last third of the records (at least
/// five) and returns `T = −b/m`.
pub fn extinction_fit(records: &[TimeSeriesRecord], alpha: f64) -> Option<ExtinctionFit> {
    if records.len() < 5 {
        return None;
    }
    let k = (records.len() / 3).max(5);
    let tail = &records[records.len() - k..];
    let t: Vec<f64> = tail.iter().map(|r| r.t).collect();
    let y: Vec<f64> = tail.iter().map(|r| r.rho_plus.powf(alpha + 1.0)).collect();
    let fit = fit_line(&t, &y)?;
    let t_ext = -fit.intercept / fit.slope;
    let flagged = !(t_ext.is_finite() && fit.slope < 0.0 && fit.r_squared >= 0.999);
    Some(ExtinctionFit { t_ext, slope: fit.slope, r_squared: fit.r_squared, points: k, flagged })
}

/// Runs the flow from `cfg` until the circumradius falls below
/// `stop_inradius`, `t_max` is reached or the step budget is spent.
pub fn evolve<T: Real>(cfg: &FlowRunConfig) -> Result<FlowRun<T>> {
    cfg.validate()?;
    let s0: SupportState<T> = cfg.initial.build(cfg.geometry, cfg.n_grid, cfg.seed)?;
    evolve_from(cfg, s0)
}

/// As [`evolve`] from an explicit initial state.
pub fn evolve_from<T: Real>(cfg: &FlowRunConfig, s0: SupportState<T>) -> Result<FlowRun<T>> {
    cfg.validate()?;
    let f = &cfg.speed;
    let alpha = f.degree();
    let safety = T::c(cfg.dt_safety);
    let r0 = circumradius_bound(&s0).f64();
    let dt_min = 1e-12 * r0.powf(alpha + 1.0);
    let mut s = s0;
    let mut records = vec![record(&s, f, &cfg.monitors, 0)?];
    let mut snapshots = Vec::new();
    if cfg.snapshot_every.is_some() {
        snapshots.push((0, s.clone()));
    }
    let mut steps = 0;
    let mut rejected = 0;
    let stop = loop {
        if circumradius_bound(&s).f64() < cfg.stop_inradius {
            break StopReason::Extinction;
        }
        if let Some(tm) = cfg.t_max {
            if s.t.f64() >= tm * (1.0 - 1e-14) {
                break StopReason::TimeLimit;
            }
        }
        if steps >= cfg.max_steps {
            break StopReason::StepLimit;
        }
        let mut dt = stable_dt(&s, f, safety)?;
        if let Some(tm) = cfg.t_max {
            dt = dt.min(T::c(tm) - s.t);
        }
        s = loop {
            match step(&s, f, dt) {
                Ok(next) => break next,
                Err(Error::ConvexityLoss { .. } | Error::NonFinite { .. }) => {
                    rejected += 1;
                    dt = dt * T::c(0.5);
                    if dt.f64() < dt_min {
                        return Err(Error::StepUnderflow { dt: dt.f64(), dt_min, t: s.t.f64() });
                    }
                }
                Err(e) => return Err(e),
            }
        };
        steps += 1;
        if steps % cfg.record_every == 0 {
            records.push(record(&s, f, &cfg.monitors, steps)?);
        }
        if let Some(every) = cfg.snapshot_every {
            if every > 0 && steps % every == 0 {
                snapshots.push((steps, s.clone()));
            }
        }
    };
    if records.last().map(|r| r.step) != Some(steps) {
        records.push(record(&s, f, &cfg.monitors, steps)?);
    }
    let extinction = if stop == StopReason::Extinction { extinction_fit(&records, alpha) } else { None };
    Ok(FlowRun { records, snapshots, last: s, extinction, steps, rejected, stop })
}
