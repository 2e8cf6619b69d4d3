//! The Angenent oval `e^t cosh y = cos x`, `t < 0`, an ancient solution of
//! curve shortening flow, as a fixture.

use std::f64::consts::FRAC_PI_2;

use super::state::{Geometry, SupportState};
use crate::error::{Error, Result};

fn level(t: f64, x: f64, y: f64) -> f64 {
    // Monotone along rays from the origin; agrees in sign with
    // e^t cosh y − cos x inside |x| < π/2.
    t.exp() * y.abs().cosh() - x.abs().min(std::f64::consts::PI).cos()
}

fn check_time(t: f64) -> Result<()> {
    if !(t < 0.0) || !t.is_finite() {
        return Err(Error::Parameter(format!("the oval exists for t < 0, got {t}")));
    }
    Ok(())
}

/// Boundary point in polar direction `psi`, by bisection on the radius.
fn boundary_point(t: f64, psi: f64) -> [f64; 2] {
    let ymax = (-t).exp().acosh();
    let (c, s) = (psi.cos(), psi.sin());
    let (mut lo, mut hi) = (0.0, FRAC_PI_2.hypot(ymax) * 1.000_001);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if level(t, mid * c, mid * s) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    [r * c, r * s]
}

/// `n` points on the oval at time `t`, equally spaced in polar angle.
pub fn angenent_oval_sample(t: f64, n: usize) -> Result<Vec<[f64; 2]>> {
    check_time(t)?;
    if n < 3 {
        return Err(Error::Parameter("need at least three points".into()));
    }
    Ok((0..n).map(|j| boundary_point(t, std::f64::consts::TAU * j as f64 / n as f64)).collect())
}

/// Support function of the oval on an `n`-node planar grid. Each value is
/// `max ⟨p(ψ), θ⟩` over boundary points, refined by golden-section search
/// in the polar angle around the best of a fine sample.
pub fn angenent_support(t: f64, n: usize) -> Result<SupportState<f64>> {
    check_time(t)?;
    let m = 8 * n;
    let coarse = angenent_oval_sample(t, m)?;
    let step = std::f64::consts::TAU / m as f64;
    let grid = super::state::Grid::<f64>::new(Geometry::Planar, n)?;
    let u = grid
        .angles()
        .iter()
        .map(|&th| {
            let (c, s) = (th.cos(), th.sin());
            let h = |p: [f64; 2]| p[0] * c + p[1] * s;
            let best = (0..m).max_by(|&a, &b| h(coarse[a]).total_cmp(&h(coarse[b]))).unwrap_or(0);
            let g = 0.618_033_988_749_894_8;
            let (mut lo, mut hi) = ((best as f64 - 1.0) * step, (best as f64 + 1.0) * step);
            while hi - lo > 1e-13 {
                let x1 = hi - g * (hi - lo);
                let x2 = lo + g * (hi - lo);
                if h(boundary_point(t, x1)) >= h(boundary_point(t, x2)) {
                    hi = x2;
                } else {
                    lo = x1;
                }
            }
            h(boundary_point(t, 0.5 * (lo + hi)))
        })
        .collect();
    SupportState::new(grid, u, t)
}

/// `max_θ |(u(t+δ) − u(t))/δ + κ(θ)|` relative to `max κ`: the normal
/// velocity of the implicit family against its curvature.
pub fn angenent_residual(t: f64, n: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0) || t + delta >= 0.0 {
        return Err(Error::Parameter("need delta > 0 and t + delta < 0".into()));
    }
    let a = angenent_support(t, n)?;
    let b = angenent_support(t + delta, n)?;
    let c = a.curvature_radii()?;
    let cb = b.curvature_radii()?;
    let mut worst: f64 = 0.0;
    let mut kmax: f64 = 0.0;
    for j in 0..n {
        let kappa = 0.5 * (c.lambda[j] + cb.lambda[j]);
        kmax = kmax.max(kappa);
        worst = worst.max(((b.u[j] - a.u[j]) / delta + kappa).abs());
    }
    Ok(worst / kmax)
}
