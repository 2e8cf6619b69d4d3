//! Entropy of convex bodies and the volume-normalized Gauss curvature flow
//! `∂ũ/∂τ = −K̃^β/(ω_n⁻¹∫K̃^{β−1}dθ) + ũ`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::support_flow::io::fmt_f64;
use crate::support_flow::{CurvatureField, Geometry, InitialShape, SupportState};

/// Which closed form of `E_β(Ω, z)` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyBranch {
    /// `β = 1`: `ω_n⁻¹ ∫ log u_z dθ`.
    Log,
    /// `β ≠ 1`: `β/(β−1) · log(ω_n⁻¹ ∫ u_z^{1−1/β} dθ)`.
    Power,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyEvaluation<T> {
    pub beta: f64,
    pub value: T,
    pub center: Vec<T>,
    pub branch: EntropyBranch,
}

/// Enclosed area or volume of a convex state.
pub fn body_volume<T: Real>(s: &SupportState<T>) -> Result<T> {
    s.body_volume()
}

/// `|B(1)| = ω_n/(n+1)`.
pub fn unit_ball_volume(geometry: Geometry) -> f64 {
    geometry.sphere_area() / (geometry.dim() + 1) as f64
}

/// `τ = (n+1)⁻¹ log(|B(1)|/|Ω_t|)`.
pub fn tau_from_volume(geometry: Geometry, volume: f64) -> f64 {
    (unit_ball_volume(geometry) / volume).ln() / (geometry.dim() + 1) as f64
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("beta = {beta} must be positive")))
    }
}

fn centered<T: Real>(s: &SupportState<T>, z: &[T]) -> Result<Vec<T>> {
    if z.len() != s.geometry().center_dim() {
        return Err(Error::Shape(format!("center has {} coordinates, expected {}", z.len(), s.geometry().center_dim())));
    }
    let g = s.grid();
    let mut uz = Vec::with_capacity(s.len());
    for j in 0..s.len() {
        let v = s.u[j] - g.pairing(z, j);
        if !(v > T::zero()) {
            return Err(Error::Precondition(format!("center {z:?} is not interior: u_z = {v} at node {j}")));
        }
        uz.push(v);
    }
    Ok(uz)
}

/// Value, gradient and Hessian of `z ↦ E_β(Ω, z)`.
struct Local<T> {
    value: T,
    grad: Vec<T>,
    hess: Vec<T>,
}

fn local<T: Real>(s: &SupportState<T>, z: &[T], beta: f64) -> Result<Local<T>> {
    let uz = centered(s, z)?;
    let g = s.grid();
    let d = z.len();
    let omega = T::c(s.geometry().sphere_area());
    let mut grad = vec![T::zero(); d];
    let mut hess = vec![T::zero(); d * d];
    let value = if beta == 1.0 {
        for (j, (&u, &w)) in uz.iter().zip(g.weights()).enumerate() {
            let th = g.direction(j);
            for a in 0..d {
                grad[a] -= w * th[a] / u;
                for b in 0..d {
                    hess[a * d + b] -= w * th[a] * th[b] / (u * u);
                }
            }
        }
        for x in grad.iter_mut().chain(hess.iter_mut()) {
            *x /= omega;
        }
        g.integrate(|j| uz[j].ln()) / omega
    } else {
        let q = T::c(1.0 - 1.0 / beta);
        let m = g.integrate(|j| uz[j].powf(q)) / omega;
        // log(m)/q through expm1/ln_1p keeps the branch continuous at β → 1.
        let value = (g.integrate(|j| (q * uz[j].ln()).exp_m1()) / omega).ln_1p() / q;
        let mut second = vec![T::zero(); d * d];
        for (j, (&u, &w)) in uz.iter().zip(g.weights()).enumerate() {
            let th = g.direction(j);
            let p = u.powf(q - T::one());
            for a in 0..d {
                grad[a] -= w * p * th[a];
                for b in 0..d {
                    second[a * d + b] += w * p / u * th[a] * th[b];
                }
            }
        }
        let c = omega * m;
        for x in grad.iter_mut() {
            *x /= c;
        }
        for a in 0..d {
            for b in 0..d {
                hess[a * d + b] = (q - T::one()) * second[a * d + b] / c - q * grad[a] * grad[b];
            }
        }
        value
    };
    Ok(Local { value, grad, hess })
}

/// `E_β(Ω, z)`; `z` must be interior, `u_z > 0` at every node.
pub fn entropy<T: Real>(s: &SupportState<T>, z: &[T], beta: f64) -> Result<EntropyEvaluation<T>> {
    check_beta(beta)?;
    let uz = centered(s, z)?;
    let g = s.grid();
    let omega = T::c(s.geometry().sphere_area());
    let (value, branch) = if beta == 1.0 {
        (g.integrate(|j| uz[j].ln()) / omega, EntropyBranch::Log)
    } else {
        let q = T::c(1.0 - 1.0 / beta);
        ((g.integrate(|j| (q * uz[j].ln()).exp_m1()) / omega).ln_1p() / q, EntropyBranch::Power)
    };
    Ok(EntropyEvaluation { beta, value, center: z.to_vec(), branch })
}

/// Newton direction `−H⁻¹g` for `d ≤ 2`, or the gradient when `H` is not
/// negative definite.
fn ascent_direction<T: Real>(l: &Local<T>) -> Vec<T> {
    match l.grad.len() {
        1 if l.hess[0] < T::zero() => vec![-l.grad[0] / l.hess[0]],
        2 => {
            let (a, b, c) = (l.hess[0], l.hess[1], l.hess[3]);
            let det = a * c - b * b;
            if a < T::zero() && det > T::zero() {
                vec![-(c * l.grad[0] - b * l.grad[1]) / det, -(a * l.grad[1] - b * l.grad[0]) / det]
            } else {
                l.grad.clone()
            }
        }
        _ => l.grad.clone(),
    }
}

fn ascend<T: Real>(s: &SupportState<T>, start: Vec<T>, beta: f64) -> Result<(Vec<T>, T)> {
    let scale = s.u.iter().map(|u| u.abs()).fold(T::zero(), T::max);
    let tol = T::epsilon().sqrt() * T::c(1e-2) * scale;
    let mut z = start;
    let mut l = local(s, &z, beta)?;
    for _ in 0..200 {
        let d = ascent_direction(&l);
        let slope: T = d.iter().zip(&l.grad).map(|(&a, &b)| a * b).sum();
        let len = d.iter().map(|&x| x * x).sum::<T>().sqrt();
        let gnorm = l.grad.iter().map(|&x| x * x).sum::<T>().sqrt();
        if slope <= T::zero() {
            return Ok((z, l.value));
        }
        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<T> = z.iter().zip(&d).map(|(&a, &b)| a + t * b).collect();
            // Trial points on or beyond the boundary are rejected outright.
            if let Ok(lt) = local(s, &trial, beta) {
                // Near the optimum value changes drown in rounding; a
                // halved gradient then decides.
                let gt = lt.grad.iter().map(|&x| x * x).sum::<T>().sqrt();
                let noise = T::c(8.0) * T::epsilon() * (T::one() + l.value.abs());
                if lt.value >= l.value + T::c(1e-4) * t * slope
                    || (gt <= T::c(0.5) * gnorm && lt.value >= l.value - noise)
                {
                    accepted = Some((trial, lt));
                    break;
                }
            }
            t = t * T::c(0.5);
        }
        match accepted {
            Some((zt, lt)) => {
                z = zt;
                l = lt;
                if len <= tol {
                    return Ok((z, l.value));
                }
            }
            None => return Ok((z, l.value)),
        }
    }
    let gnorm = l.grad.iter().map(|&x| x * x).sum::<T>().sqrt();
    Err(Error::NonConvergence { what: "entropy point".into(), best: gnorm.f64() })
}

/// Entropy point `e` maximizing `E_β(Ω, ·)` and the entropy `E_β(Ω)`.
///
/// Damped Newton ascent from the Steiner point; further starts offset
/// by half the Steiner-centered inradius bound must reach the same point.
pub fn entropy_point<T: Real>(s: &SupportState<T>, beta: f64) -> Result<EntropyEvaluation<T>> {
    entropy_point_from(s, beta, None)
}

fn entropy_point_from<T: Real>(s: &SupportState<T>, beta: f64, guess: Option<&[T]>) -> Result<EntropyEvaluation<T>> {
    check_beta(beta)?;
    let sp = s.steiner_point();
    let mut starts = Vec::new();
    if let Some(g) = guess {
        if centered(s, g).is_ok() {
            starts.push(g.to_vec());
        }
    }
    if starts.is_empty() {
        starts.push(sp.clone());
        let inner = centered(s, &sp)?.into_iter().fold(T::infinity(), T::min) * T::c(0.5);
        for a in 0..sp.len() {
            for sign in [T::one(), -T::one()] {
                let mut z = sp.clone();
                z[a] += sign * inner;
                starts.push(z);
            }
        }
    }
    let scale = s.u.iter().map(|u| u.abs()).fold(T::zero(), T::max);
    let agree = T::c(1e-6) * scale;
    let mut best: Option<(Vec<T>, T)> = None;
    for z0 in starts {
        let (z, v) = ascend(s, z0, beta)?;
        if let Some((bz, _)) = &best {
            let dist = bz.iter().zip(&z).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt();
            if dist > agree {
                return Err(Error::NonConvergence { what: "entropy point (multi-start disagreement)".into(), best: dist.f64() });
            }
        }
        if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            best = Some((z, v));
        }
    }
    let (center, value) = best.expect("at least one start");
    let branch = if beta == 1.0 { EntropyBranch::Log } else { EntropyBranch::Power };
    Ok(EntropyEvaluation { beta, value, center, branch })
}

/// `Π λ_i` per node.
fn gauss_curvature<T: Real>(c: &CurvatureField<T>) -> Vec<T> {
    (0..c.nodes()).map(|j| T::one() / c.jacobian(j)).collect()
}

/// `f̄ = ω_n⁻¹ ∫ K^β dμ = ω_n⁻¹ ∫ K^{β−1} dθ`, also the normalizer of the
/// rescaled flow.
pub fn fbar<T: Real>(s: &SupportState<T>, beta: f64) -> Result<T> {
    check_beta(beta)?;
    let k = gauss_curvature(&s.curvature_radii()?);
    Ok(fbar_with(s, &k, beta))
}

fn fbar_with<T: Real>(s: &SupportState<T>, k: &[T], beta: f64) -> T {
    let b1 = T::c(beta - 1.0);
    s.grid().integrate(|j| k[j].powf(b1)) / T::c(s.geometry().sphere_area())
}

/// Smallest `β` with the flow theory behind the rescaled flow: `1/(n+2)`.
pub fn beta_threshold(geometry: Geometry) -> f64 {
    1.0 / (geometry.dim() + 2) as f64
}

fn check_flow_beta(geometry: Geometry, beta: f64, research: bool) -> Result<()> {
    check_beta(beta)?;
    let min = beta_threshold(geometry);
    if beta < min * (1.0 - 1e-12) && !research {
        return Err(Error::Parameter(format!(
            "beta = {beta} is below 1/(n+2) = {min}; enable the research flag to run it"
        )));
    }
    Ok(())
}

/// A volume-normalized state of the rescaled flow.
#[derive(Debug, Clone)]
pub struct RescaledGCFState<T: Real> {
    pub support: SupportState<T>,
    pub tau: T,
    /// `|B(1)|`.
    pub target_volume: T,
    /// Relative volume error removed by the last renormalization.
    pub volume_drift: T,
}

impl<T: Real> RescaledGCFState<T> {
    /// Moves the Steiner point to the origin and scales to `|B(1)|`.
    pub fn normalize(s: &SupportState<T>, tau: T) -> Result<Self> {
        let target = T::c(unit_ball_volume(s.geometry()));
        let (support, drift) = renormalize(s, target)?;
        Ok(Self { support, tau, target_volume: target, volume_drift: drift })
    }
}

fn renormalize<T: Real>(s: &SupportState<T>, target: T) -> Result<(SupportState<T>, T)> {
    let sp: Vec<T> = s.steiner_point().into_iter().map(|x| -x).collect();
    let moved = s.translated(&sp);
    let v = moved.body_volume()?;
    let n1 = T::of(s.geometry().dim() + 1);
    let c = (target / v).powf(T::one() / n1);
    Ok((moved.scaled(c), (v - target) / target))
}

fn rescaled_rhs<T: Real>(s: &SupportState<T>, beta: f64) -> Result<Vec<T>> {
    let k = gauss_curvature(&s.curvature_radii()?);
    let norm = fbar_with(s, &k, beta);
    if !(norm > T::zero()) {
        return Err(Error::Degenerate(format!("flow normalizer {norm} is not positive")));
    }
    let b = T::c(beta);
    Ok((0..s.len()).map(|j| s.u[j] - k[j].powf(b) / norm).collect())
}

/// `safety·Δ²/D` with `D = max β K^β Σ λ_i / f̄`.
pub fn rescaled_stable_dtau<T: Real>(s: &SupportState<T>, beta: f64, safety: T) -> Result<T> {
    let c = s.curvature_radii()?;
    let k = gauss_curvature(&c);
    let norm = fbar_with(s, &k, beta);
    let b = T::c(beta);
    let mut d = T::zero();
    for (j, &kj) in k.iter().enumerate() {
        let sum: T = c.node_lambda(j).iter().copied().sum();
        d = d.max(b * kj.powf(b) * sum / norm);
    }
    let h = s.grid().step();
    Ok(safety * h * h / d)
}

/// One RK4 step of the rescaled flow in `τ`, then recentering at the
/// Steiner point and exact rescaling to `|B(1)|`.
pub fn gcf_rescaled_step<T: Real>(state: &RescaledGCFState<T>, beta: f64, dtau: T) -> Result<RescaledGCFState<T>> {
    check_beta(beta)?;
    let s = &state.support;
    let half = T::c(0.5) * dtau;
    let axpy = |a: T, k: &[T]| -> Vec<T> { s.u.iter().zip(k).map(|(&u, &k)| u + a * k).collect() };
    let k1 = rescaled_rhs(s, beta)?;
    let k2 = rescaled_rhs(&s.with_u(axpy(half, &k1), s.t), beta)?;
    let k3 = rescaled_rhs(&s.with_u(axpy(half, &k2), s.t), beta)?;
    let k4 = rescaled_rhs(&s.with_u(axpy(dtau, &k3), s.t), beta)?;
    let sixth = dtau / T::c(6.0);
    let u: Vec<T> = (0..s.len())
        .map(|j| s.u[j] + sixth * (k1[j] + T::c(2.0) * (k2[j] + k3[j]) + k4[j]))
        .collect();
    if let Some(j) = u.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { node: j });
    }
    let (support, drift) = renormalize(&s.with_u(u, s.t), state.target_volume)?;
    Ok(RescaledGCFState { support, tau: state.tau + dtau, target_volume: state.target_volume, volume_drift: drift })
}

/// Quantities of the entropy inequality at one state, evaluated at its
/// entropy point with `f = K^β/u_e` and `dσ = u_e/K dθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityTerms<T> {
    pub entropy: EntropyEvaluation<T>,
    /// `−[∫f^{1+1/β}dσ·∫dσ/(∫f^{1/β}dσ·∫f dσ) − 1]`, never positive.
    pub holder_rhs: T,
    /// `∫(f − f̄)² dν` with `dν = ω_n⁻¹ dσ`.
    pub variance: T,
    /// `∫dσ`, equal to `(n+1)|Ω|`.
    pub sigma_total: T,
    pub fbar: T,
}

pub fn monotonicity_terms<T: Real>(s: &SupportState<T>, beta: f64) -> Result<MonotonicityTerms<T>> {
    terms_from(s, beta, None)
}

fn terms_from<T: Real>(s: &SupportState<T>, beta: f64, guess: Option<&[T]>) -> Result<MonotonicityTerms<T>> {
    let entropy = entropy_point_from(s, beta, guess)?;
    let ue = centered(s, &entropy.center)?;
    let k = gauss_curvature(&s.curvature_radii()?);
    let g = s.grid();
    let b = T::c(beta);
    let ib = T::one() / b;
    let f: Vec<T> = (0..s.len()).map(|j| k[j].powf(b) / ue[j]).collect();
    let sig = |j: usize| ue[j] / k[j];
    let sigma_total = g.integrate(sig);
    let i_f = g.integrate(|j| f[j] * sig(j));
    let i_fb = g.integrate(|j| f[j].powf(ib) * sig(j));
    let i_fb1 = g.integrate(|j| f[j].powf(T::one() + ib) * sig(j));
    let holder_rhs = -(i_fb1 * sigma_total / (i_fb * i_f) - T::one());
    let omega = T::c(s.geometry().sphere_area());
    let fbar = i_f / omega;
    let variance = g.integrate(|j| (f[j] - fbar) * (f[j] - fbar) * sig(j)) / omega;
    Ok(MonotonicityTerms { entropy, holder_rhs, variance, sigma_total, fbar })
}

/// Entropy inequality checked between consecutive rescaled states.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityDefects {
    /// `(E(τ₁) − E(τ₀))/(τ₁ − τ₀)`.
    pub slope: f64,
    /// Larger of the Hölder bounds at the two ends; the secant slope is a
    /// derivative at some interior instant.
    pub holder_rhs: f64,
    /// Variance at the later state.
    pub variance: f64,
    /// `|∫dσ − ω_n|/ω_n` at the later state.
    pub sigma_error: f64,
}

impl MonotonicityDefects {
    /// `slope ≤ holder_rhs + tol ≤ tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.slope <= self.holder_rhs + tol && self.holder_rhs <= tol
    }
}

pub fn entropy_monotonicity_defects<T: Real>(
    s0: &RescaledGCFState<T>,
    s1: &RescaledGCFState<T>,
    beta: f64,
) -> Result<MonotonicityDefects> {
    let a = monotonicity_terms(&s0.support, beta)?;
    let b = terms_from(&s1.support, beta, Some(&a.entropy.center))?;
    Ok(defects_between(&a, &b, (s1.tau - s0.tau).f64(), s1.support.geometry()))
}

fn defects_between<T: Real>(
    a: &MonotonicityTerms<T>,
    b: &MonotonicityTerms<T>,
    dtau: f64,
    geometry: Geometry,
) -> MonotonicityDefects {
    let omega = geometry.sphere_area();
    MonotonicityDefects {
        slope: (b.entropy.value - a.entropy.value).f64() / dtau,
        holder_rhs: a.holder_rhs.max(b.holder_rhs).f64(),
        variance: b.variance.f64(),
        sigma_error: (b.sigma_total.f64() - omega).abs() / omega,
    }
}

/// `sqrt(1 − (w_min/w_max)²)` from the widths `u(θ) + u(θ+π)` of a planar
/// state; the eccentricity of an ellipse.
pub fn width_eccentricity<T: Real>(s: &SupportState<T>) -> Result<f64> {
    let n = s.len();
    if s.geometry() != Geometry::Planar || n % 2 != 0 {
        return Err(Error::Precondition("width eccentricity needs a planar state with an even grid".into()));
    }
    let widths: Vec<f64> = (0..n / 2).map(|j| (s.u[j] + s.u[j + n / 2]).f64()).collect();
    let max = widths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = widths.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((1.0 - (min / max).powi(2)).max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcfRunConfig {
    pub geometry: Geometry,
    pub initial: InitialShape,
    pub beta: f64,
    pub n_grid: usize,
    pub dtau_safety: f64,
    pub tau_max: f64,
    pub record_every: usize,
    /// Allows `β < 1/(n+2)`.
    pub research: bool,
    pub seed: u64,
}

impl GcfRunConfig {
    pub fn new(geometry: Geometry, initial: InitialShape, beta: f64, tau_max: f64) -> Self {
        Self {
            geometry,
            initial,
            beta,
            n_grid: 128,
            dtau_safety: 0.2,
            tau_max,
            record_every: 50,
            research: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_flow_beta(self.geometry, self.beta, self.research)?;
        if self.n_grid < 64 {
            return Err(Error::Parameter(format!("N = {} must be at least 64", self.n_grid)));
        }
        if !(self.dtau_safety > 0.0 && self.dtau_safety <= 0.5) {
            return Err(Error::Parameter(format!("dtau_safety = {} must lie in (0, 0.5]", self.dtau_safety)));
        }
        if !(self.tau_max > 0.0 && self.tau_max.is_finite()) {
            return Err(Error::Parameter("tau_max must be positive".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Parameter("record_every must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyRecord {
    pub step: usize,
    pub tau: f64,
    pub entropy: f64,
    pub entropy_point: Vec<f64>,
    pub holder_defect: f64,
    pub variance_defect: f64,
    pub volume: f64,
    pub fbar: f64,
    pub eccentricity: Option<f64>,
}

/// A rescaled run with the worst per-step defects.
#[derive(Debug, Clone)]
pub struct GcfRun<T: Real> {
    pub records: Vec<EntropyRecord>,
    pub last: RescaledGCFState<T>,
    pub steps: usize,
    /// Largest `E(τ_{k+1}) − E(τ_k)`.
    pub max_entropy_increase: f64,
    /// Largest `slope − holder_rhs`.
    pub max_slope_excess: f64,
    /// Largest Hölder bound, `≤ 0` in exact arithmetic.
    pub max_holder: f64,
    /// Largest `|∫dσ − ω_n|/ω_n`.
    pub max_sigma_error: f64,
    pub max_volume_drift: f64,
}

fn entropy_record<T: Real>(st: &RescaledGCFState<T>, m: &MonotonicityTerms<T>, step: usize) -> Result<EntropyRecord> {
    let s = &st.support;
    Ok(EntropyRecord {
        step,
        tau: st.tau.f64(),
        entropy: m.entropy.value.f64(),
        entropy_point: m.entropy.center.iter().map(|x| x.f64()).collect(),
        holder_defect: m.holder_rhs.f64(),
        variance_defect: m.variance.f64(),
        volume: s.body_volume()?.f64(),
        fbar: m.fbar.f64(),
        eccentricity: width_eccentricity(s).ok(),
    })
}

/// Runs the rescaled flow to `tau_max`, evaluating the entropy inequality
/// after every step.
pub fn gcf_rescaled_run<T: Real>(cfg: &GcfRunConfig) -> Result<GcfRun<T>> {
    cfg.validate()?;
    let s0: SupportState<T> = cfg.initial.build(cfg.geometry, cfg.n_grid, cfg.seed)?;
    gcf_rescaled_run_from(cfg, &s0)
}

pub fn gcf_rescaled_run_from<T: Real>(cfg: &GcfRunConfig, s0: &SupportState<T>) -> Result<GcfRun<T>> {
    cfg.validate()?;
    let beta = cfg.beta;
    let safety = T::c(cfg.dtau_safety);
    let mut st = RescaledGCFState::normalize(s0, T::zero())?;
    let mut terms = monotonicity_terms(&st.support, beta)?;
    let mut records = vec![entropy_record(&st, &terms, 0)?];
    let omega = cfg.geometry.sphere_area();
    let mut run = GcfRun {
        records: Vec::new(),
        last: st.clone(),
        steps: 0,
        max_entropy_increase: f64::NEG_INFINITY,
        max_slope_excess: f64::NEG_INFINITY,
        max_holder: terms.holder_rhs.f64(),
        max_sigma_error: (terms.sigma_total.f64() - omega).abs() / omega,
        max_volume_drift: 0.0,
    };
    let tau_max = T::c(cfg.tau_max);
    while st.tau < tau_max * T::c(1.0 - 1e-14) {
        let dtau = rescaled_stable_dtau(&st.support, beta, safety)?.min(tau_max - st.tau);
        let next = gcf_rescaled_step(&st, beta, dtau)?;
        let nt = terms_from(&next.support, beta, Some(&terms.entropy.center))?;
        let d = defects_between(&terms, &nt, dtau.f64(), cfg.geometry);
        run.max_entropy_increase = run.max_entropy_increase.max((nt.entropy.value - terms.entropy.value).f64());
        run.max_slope_excess = run.max_slope_excess.max(d.slope - d.holder_rhs);
        run.max_holder = run.max_holder.max(nt.holder_rhs.f64());
        run.max_sigma_error = run.max_sigma_error.max(d.sigma_error);
        run.max_volume_drift = run.max_volume_drift.max(next.volume_drift.abs().f64());
        run.steps += 1;
        st = next;
        terms = nt;
        if run.steps % cfg.record_every == 0 {
            records.push(entropy_record(&st, &terms, run.steps)?);
        }
    }
    if records.last().map(|r| r.step) != Some(run.steps) {
        records.push(entropy_record(&st, &terms, run.steps)?);
    }
    run.records = records;
    run.last = st;
    Ok(run)
}

pub const ENTROPY_HEADER: &str = "tau,entropy,entropy_point_x,entropy_point_y,holder_defect,variance_defect,volume";

/// `entropy_series.csv`; axisymmetric runs report the axis coordinate as
/// `entropy_point_x` and leave `entropy_point_y` empty.
pub fn entropy_series_csv(records: &[EntropyRecord]) -> String {
    let mut out = String::from(ENTROPY_HEADER);
    out.push('\n');
    for r in records {
        let coord = |i: usize| r.entropy_point.get(i).copied().map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(r.tau),
            fmt_f64(r.entropy),
            coord(0),
            coord(1),
            fmt_f64(r.holder_defect),
            fmt_f64(r.variance_defect),
            fmt_f64(r.volume)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_entropy_is_log_radius() {
        for g in [Geometry::Planar, Geometry::Axisymmetric] {
            let s = SupportState::<f64>::sphere(g, 64, 1.7).unwrap();
            let z = vec![0.0; g.center_dim()];
            for beta in [0.3, 0.5, 1.0, 2.0, 7.0] {
                let e = entropy(&s, &z, beta).unwrap();
                assert!((e.value - 1.7f64.ln()).abs() < 1e-12, "{g:?} {beta}: {}", e.value);
            }
            let unit = SupportState::<f64>::sphere(g, 64, 1.0).unwrap();
            assert!(entropy(&unit, &z, 0.7).unwrap().value.abs() < 1e-14);
        }
    }

    #[test]
    fn branches_join_continuously() {
        let s = SupportState::<f64>::ellipse(128, 2.0, 1.0).unwrap();
        let z = [0.3, -0.2];
        let log = entropy(&s, &z, 1.0).unwrap();
        assert_eq!(log.branch, EntropyBranch::Log);
        for beta in [1.0 - 1e-7, 1.0 + 1e-7] {
            let p = entropy(&s, &z, beta).unwrap();
            assert_eq!(p.branch, EntropyBranch::Power);
            assert!((p.value - log.value).abs() < 1e-6);
        }
    }

    #[test]
    fn boundary_center_is_rejected() {
        let s = SupportState::<f64>::sphere(Geometry::Planar, 64, 1.0).unwrap();
        assert!(matches!(entropy(&s, &[1.0, 0.0], 1.0), Err(Error::Precondition(_))));
        assert!(matches!(entropy(&s, &[0.0], 1.0), Err(Error::Shape(_))));
        assert!(entropy(&s, &[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn gradient_and_hessian_match_differences() {
        let s = SupportState::<f64>::ellipse(128, 2.0, 1.0).unwrap();
        let z = [0.4, 0.1];
        for beta in [0.4, 1.0, 3.0] {
            let l = local(&s, &z, beta).unwrap();
            let h = 1e-5;
            for a in 0..2 {
                let mut zp = z;
                let mut zm = z;
                zp[a] += h;
                zm[a] -= h;
                let (lp, lm) = (local(&s, &zp, beta).unwrap(), local(&s, &zm, beta).unwrap());
                assert!(((lp.value - lm.value) / (2.0 * h) - l.grad[a]).abs() < 1e-8);
                for b in 0..2 {
                    assert!(((lp.grad[b] - lm.grad[b]) / (2.0 * h) - l.hess[a * 2 + b]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn entropy_point_symmetry_and_covariance() {
        let e = SupportState::<f64>::ellipse(128, 2.0, 1.0).unwrap();
        let p = entropy_point(&e, 1.0).unwrap();
        assert!(p.center.iter().all(|x| x.abs() < 1e-6));
        let ball = SupportState::<f64>::sphere(Geometry::Planar, 128, 1.0).unwrap().translated(&[0.3, -0.4]);
        let p = entropy_point(&ball, 2.0).unwrap();
        assert!((p.center[0] - 0.3).abs() < 1e-6 && (p.center[1] + 0.4).abs() < 1e-6);
        assert!(p.value.abs() < 1e-12);
    }

    #[test]
    fn fbar_of_balls() {
        let s = SupportState::<f64>::sphere(Geometry::Axisymmetric, 64, 1.0).unwrap();
        assert!((fbar(&s, 0.7).unwrap() - 1.0).abs() < 1e-12);
        // Radius r: K = r^{−n}, so f̄ = r^{n(1−β)}.
        let s = SupportState::<f64>::sphere(Geometry::Planar, 64, 2.0).unwrap();
        assert!((fbar(&s, 3.0).unwrap() - 2f64.powf(-2.0)).abs() < 1e-12);
    }

    #[test]
    fn round_state_is_stationary() {
        let s = SupportState::<f64>::sphere(Geometry::Planar, 128, 3.0).unwrap();
        let st = RescaledGCFState::normalize(&s, 0.0).unwrap();
        assert!((st.support.body_volume().unwrap() - PI).abs() < 1e-12);
        let next = gcf_rescaled_step(&st, 0.7, 1e-3).unwrap();
        let dev = next.support.u.iter().zip(&st.support.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev <= 1e-10, "{dev}");
        let t = monotonicity_terms(&next.support, 0.7).unwrap();
        assert!(t.holder_rhs.abs() < 1e-12 && t.variance < 1e-20);
        assert!((t.sigma_total - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn beta_threshold_needs_research_flag() {
        let mut cfg = GcfRunConfig::new(Geometry::Planar, InitialShape::Sphere { radius: 1.0 }, 0.2, 1.0);
        assert!(cfg.validate().is_err());
        cfg.research = true;
        assert!(cfg.validate().is_ok());
        cfg.beta = 1.0 / 3.0;
        cfg.research = false;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn tau_of_unit_ball_is_zero() {
        assert!(tau_from_volume(Geometry::Axisymmetric, 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((tau_from_volume(Geometry::Planar, PI / 4.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn csv_columns() {
        let r = EntropyRecord {
            step: 0,
            tau: 0.0,
            entropy: 0.5,
            entropy_point: vec![0.25],
            holder_defect: -0.1,
            variance_defect: 0.01,
            volume: 1.0,
            fbar: 1.0,
            eccentricity: None,
        };
        let csv = entropy_series_csv(&[r]);
        let line = csv.lines().nth(1).unwrap();
        assert_eq!(line.split(',').count(), 7);
        assert_eq!(line.split(',').nth(3), Some(""));
    }
}
