//! Run-level monitors: pinching, speed decay, radii bands, rescaling and
//! the curvature-ratio functionals.

use serde::Serialize;

use super::state::{Geometry, SupportState};
use super::stepper::{speed_field, TimeSeriesRecord};
use crate::error::{Error, Result};
use crate::linalg::fit_line;
use crate::real::Real;
use crate::speed_functions::{Concavity, SpeedFunction};

/// `max λₙ/λ₁` over nodes; for curves, where there is a single curvature,
/// the ratio `ρ₊/ρ₋` stands in.
pub fn pinching_ratio<T: Real>(s: &SupportState<T>) -> Result<T> {
    match s.geometry() {
        Geometry::Planar => {
            let r = super::radii::radii(s)?;
            Ok(r.rho_plus / r.rho_minus)
        }
        Geometry::Axisymmetric => {
            let c = s.curvature_radii()?;
            Ok((0..c.nodes())
                .map(|j| {
                    let l = c.node_lambda(j);
                    l[1] / l[0]
                })
                .fold(T::one(), T::max))
        }
    }
}

/// Log-log fit of `sup F` against `T − t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedDecayFit {
    pub slope: f64,
    pub r_squared: f64,
    /// `log10` of the range of `T − t` used.
    pub decades: f64,
    /// Extremes of `sup F · (T−t)^{α/(α+1)}`.
    pub band_min: f64,
    pub band_max: f64,
}

/// Fits `log sup F = slope·log(T−t) + c` over records with `t < T`.
pub fn speed_decay_fit(series: &[TimeSeriesRecord], t_ext: f64, alpha: f64) -> Result<SpeedDecayFit> {
    let pts: Vec<(f64, f64)> =
        series.iter().filter(|r| r.t < t_ext && r.sup_f > 0.0).map(|r| (t_ext - r.t, r.sup_f)).collect();
    if pts.len() < 3 {
        return Err(Error::Fit("speed decay fit needs at least three points before T".into()));
    }
    let (lo, hi) = pts.iter().fold((f64::INFINITY, 0.0f64), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let decades = (hi / lo).log10();
    if decades < 1.0 {
        return Err(Error::Fit(format!("T − t spans only {decades:.2} decades")));
    }
    let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::Fit("sup F is constant over the series".into()));
    }
    let fit = fit_line(&x, &y).ok_or_else(|| Error::Fit("degenerate log-log data".into()))?;
    let e = alpha / (alpha + 1.0);
    let band = pts.iter().map(|p| p.1 * p.0.powf(e));
    let (band_min, band_max) = band.fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(v), b.max(v)));
    Ok(SpeedDecayFit { slope: fit.slope, r_squared: fit.r_squared, decades, band_min, band_max })
}

/// Extremes of the rescaled radii and the concentric-sphere comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiameterBoundCheck {
    /// Extremes of `ρ₊ (T−t)^{−1/(α+1)}`.
    pub plus_min: f64,
    pub plus_max: f64,
    /// Extremes of `ρ₋ (T−t)^{−1/(α+1)}`.
    pub minus_min: f64,
    pub minus_max: f64,
    /// `min (r_sphere − ρ₋)` and `min (ρ₊ − r_sphere)` with
    /// `r_sphere = ((α+1)(T−t))^{1/(α+1)}`; nonnegative when the enclosed and
    /// enclosing spheres bracket the sphere law.
    pub comparison_lower_defect: f64,
    pub comparison_upper_defect: f64,
}

impl DiameterBoundCheck {
    /// Largest of the two ratios `max/min`.
    pub fn band_factor(&self) -> f64 {
        (self.plus_max / self.plus_min).max(self.minus_max / self.minus_min)
    }
}

pub fn diameter_bound_check(series: &[TimeSeriesRecord], t_ext: f64, alpha: f64) -> Result<DiameterBoundCheck> {
    let pts: Vec<&TimeSeriesRecord> = series.iter().filter(|r| r.t < t_ext).collect();
    if pts.is_empty() {
        return Err(Error::Fit("diameter check needs records before T".into()));
    }
    let e = 1.0 / (alpha + 1.0);
    let mut c = DiameterBoundCheck {
        plus_min: f64::INFINITY,
        plus_max: 0.0,
        minus_min: f64::INFINITY,
        minus_max: 0.0,
        comparison_lower_defect: f64::INFINITY,
        comparison_upper_defect: f64::INFINITY,
    };
    for r in pts {
        let tau = t_ext - r.t;
        let (p, m) = (r.rho_plus * tau.powf(-e), r.rho_minus * tau.powf(-e));
        c.plus_min = c.plus_min.min(p);
        c.plus_max = c.plus_max.max(p);
        c.minus_min = c.minus_min.min(m);
        c.minus_max = c.minus_max.max(m);
        let rs = ((alpha + 1.0) * tau).powf(e);
        c.comparison_lower_defect = c.comparison_lower_defect.min(rs - r.rho_minus);
        c.comparison_upper_defect = c.comparison_upper_defect.min(r.rho_plus - rs);
    }
    Ok(c)
}

/// `τ = −½ log(T−t)` and `ũ = (2(T−t))^{−1/2}(u − ⟨p,θ⟩)` for a
/// 1-homogeneous speed normalized to `f(1,…,1) = 1`.
pub fn rescale_alpha1<T: Real>(
    snapshots: &[SupportState<T>],
    f: &SpeedFunction,
    t_ext: f64,
    p: &[T],
) -> Result<Vec<(f64, SupportState<T>)>> {
    if f.degree() != 1.0 {
        return Err(Error::Precondition(format!("rescaling needs a 1-homogeneous speed, got degree {}", f.degree())));
    }
    snapshots
        .iter()
        .filter(|s| s.t.f64() < t_ext)
        .map(|s| {
            let rem = t_ext - s.t.f64();
            let c = T::c((2.0 * rem).powf(-0.5));
            let u = (0..s.len()).map(|j| c * (s.u[j] - s.grid().pairing(p, j))).collect();
            Ok((-0.5 * rem.ln(), s.with_u(u, s.t)))
        })
        .collect()
}

/// `∫ (η^p − η₀^p) dθ` with `η = |λ|/f(λ)`, `η₀ = η(1,…,1)`. This equals
/// `∫ K̃ (η^p − η₀^p) dμ̃` since `K̃ dμ̃ = dθ` and `η` is scale invariant.
/// For convex speeds `η ≤ η₀`, so the integrand is `η₀^p − η^p`.
pub fn eta_functional<T: Real>(s: &SupportState<T>, f: &SpeedFunction, p: f64) -> Result<T> {
    if f.degree() != 1.0 {
        return Err(Error::Precondition(format!("η functional needs a 1-homogeneous speed, got {}", f.degree())));
    }
    if !(p > 0.0) {
        return Err(Error::Parameter(format!("p = {p} must be positive")));
    }
    let (v, c) = speed_field(s, f)?;
    let n = c.n;
    let eta0 = T::of(n).sqrt() / f.eval(&vec![T::one(); n])?;
    let pp = T::c(p);
    let sign = if f.concavity() == Concavity::Convex { -T::one() } else { T::one() };
    Ok(s.grid().integrate(|j| {
        let l = c.node_lambda(j);
        let eta = l.iter().map(|&x| x * x).sum::<T>().sqrt() / v[j];
        sign * (eta.powf(pp) - eta0.powf(pp))
    }))
}

/// `max |h̊|²/H^{2−σ}` over nodes.
pub fn f_sigma_monitor<T: Real>(s: &SupportState<T>, sigma: T) -> Result<T> {
    let c = s.curvature_radii()?;
    let n = T::of(c.n);
    let mut best = T::zero();
    for j in 0..c.nodes() {
        let l = c.node_lambda(j);
        let h: T = l.iter().copied().sum();
        if !(h > T::zero()) {
            return Err(Error::Degenerate(format!("H <= 0 at node {j}")));
        }
        let ring: T = l.iter().map(|&x| (x - h / n) * (x - h / n)).sum();
        best = best.max(ring / h.powf(T::c(2.0) - sigma));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature_algebra::{norms_and_traceless, SecondFundamentalForm};
    use crate::speed_functions::builtin;

    #[test]
    fn round_states() {
        let b = SupportState::<f64>::sphere(Geometry::Axisymmetric, 64, 2.0).unwrap();
        assert!((pinching_ratio(&b).unwrap() - 1.0).abs() < 1e-12);
        assert!(f_sigma_monitor(&b, 0.1).unwrap() < 1e-20);
        let f = builtin("Sk_ratio", 2, None, Some(2)).unwrap().normalize().unwrap();
        assert!(eta_functional(&b, &f, 2.0).unwrap().abs() < 1e-12);
        let c = SupportState::<f64>::sphere(Geometry::Planar, 64, 1.0).unwrap();
        assert!((pinching_ratio(&c).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spheroid_functionals_positive() {
        let s = SupportState::<f64>::spheroid(128, 1.2, 1.0).unwrap();
        assert!(pinching_ratio(&s).unwrap() > 1.0);
        let f = builtin("Sk_ratio", 2, None, Some(2)).unwrap().normalize().unwrap();
        assert!(eta_functional(&s, &f, 2.0).unwrap() > 0.0);
        assert!(eta_functional(&s, &builtin("H^a", 2, Some(2.0), None).unwrap(), 2.0).is_err());
    }

    #[test]
    fn f_sigma_zero_matches_f0() {
        let s = SupportState::<f64>::spheroid(128, 1.2, 1.0).unwrap();
        let c = s.curvature_radii().unwrap();
        let mut best: f64 = 0.0;
        for j in 0..c.nodes() {
            let l = c.node_lambda(j);
            let h = SecondFundamentalForm::from_fn(2, 1, |i, k, _| if i == k { l[i] } else { 0.0 });
            best = best.max(norms_and_traceless(&h).f0().unwrap());
        }
        assert!((f_sigma_monitor(&s, 0.0).unwrap() - best).abs() < 1e-14);
    }

    #[test]
    fn decay_fit_on_exact_sphere_law() {
        for alpha in [1.0, 2.0] {
            let t_ext = 1.0 / (alpha + 1.0);
            let series: Vec<TimeSeriesRecord> = (0..60)
                .map(|i| {
                    let tau = t_ext * 10f64.powf(-3.0 * i as f64 / 59.0);
                    let r = ((alpha + 1.0) * tau).powf(1.0 / (alpha + 1.0));
                    TimeSeriesRecord {
                        step: i,
                        t: t_ext - tau,
                        rho_minus: r,
                        rho_plus: r,
                        sup_f: r.powf(-alpha),
                        pinch_ratio: 1.0,
                        area_or_volume: 0.0,
                        eta_p: vec![],
                        f_sigma_max: None,
                    }
                })
                .collect();
            let fit = speed_decay_fit(&series, t_ext, alpha).unwrap();
            assert!((fit.slope + alpha / (alpha + 1.0)).abs() < 1e-10);
            let d = diameter_bound_check(&series, t_ext, alpha).unwrap();
            let c = (alpha + 1.0f64).powf(1.0 / (alpha + 1.0));
            assert!((d.plus_min - c).abs() < 1e-12 && (d.plus_max - c).abs() < 1e-12);
            assert!(d.comparison_lower_defect.abs() < 1e-12);
            let flat: Vec<_> = series.iter().map(|r| TimeSeriesRecord { sup_f: 1.0, ..r.clone() }).collect();
            assert!(speed_decay_fit(&flat, t_ext, alpha).is_err());
            assert!(speed_decay_fit(&series[..2], t_ext, alpha).is_err());
        }
        assert!(diameter_bound_check(&[], 1.0, 1.0).is_err());
    }
}
