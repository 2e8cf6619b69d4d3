//! Inradius and circumradius from the support function.

use super::state::SupportState;
use crate::error::{Error, Result};
use crate::real::Real;

/// `ρ₋ ≤ ρ₊` with the optimizing centers, in center coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiiPair<T> {
    pub rho_minus: T,
    pub rho_plus: T,
    pub center_minus: Vec<T>,
    pub center_plus: Vec<T>,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Minimizes a convex function of one variable on `[lo, hi]`.
fn golden_min<T: Real>(mut lo: T, mut hi: T, tol: T, f: &mut impl FnMut(T) -> T) -> (T, T) {
    let g = T::c(GOLDEN);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = T::c(0.5) * (lo + hi);
    (x, f(x))
}

/// Minimizes a convex function on the box `centre ± half` by nested golden
/// sections; partial minimization keeps the outer function convex.
fn box_min<T: Real>(dim: usize, centre: &[T], half: T, tol: T, f: &impl Fn(&[T]) -> T) -> (Vec<T>, T) {
    if dim == 1 {
        let (x, v) = golden_min(centre[0] - half, centre[0] + half, tol, &mut |x| f(&[x]));
        return (vec![x], v);
    }
    let inner_arg = |x: T| -> (T, T) { golden_min(centre[1] - half, centre[1] + half, tol, &mut |y| f(&[x, y])) };
    let (x, _) = golden_min(centre[0] - half, centre[0] + half, tol, &mut |x| inner_arg(x).1);
    let (y, v) = inner_arg(x);
    (vec![x, y], v)
}

fn shifted_extremum<T: Real>(s: &SupportState<T>, z: &[T], max: bool) -> T {
    let g = s.grid();
    let it = (0..s.len()).map(|j| s.u[j] - g.pairing(z, j));
    if max {
        it.fold(T::neg_infinity(), T::max)
    } else {
        it.fold(T::infinity(), T::min)
    }
}

/// `ρ₊ = min_z max_θ (u − ⟨z,θ⟩)` and `ρ₋ = max_z min_θ (u − ⟨z,θ⟩)`.
///
/// Both objectives are convex (concave) in `z`, so nested golden-section
/// search over a box around the Steiner point finds the optimum. For
/// axisymmetric states the centers lie on the axis by symmetry.
pub fn radii<T: Real>(s: &SupportState<T>) -> Result<RadiiPair<T>> {
    let dim = s.geometry().center_dim();
    let steiner = s.steiner_point();
    let half = shifted_extremum(s, &steiner, true).max(T::c(1e-300));
    let tol = T::c(1e-12).max(T::c(100.0) * T::epsilon()) * half;
    let (cp, rp) = box_min(dim, &steiner, half, tol, &|z| shifted_extremum(s, z, true));
    let (cm, rm) = box_min(dim, &steiner, half, tol, &|z| -shifted_extremum(s, z, false));
    let rm = -rm;
    let edge = |c: &[T]| c.iter().zip(&steiner).any(|(&a, &b)| (a - b).abs() >= half * T::c(0.999_999));
    if edge(&cp) || edge(&cm) || !(rm > T::zero()) || rm > rp {
        return Err(Error::NonConvergence {
            what: "inradius/circumradius centers".into(),
            best: rm.f64().min(rp.f64()),
        });
    }
    Ok(RadiiPair { rho_minus: rm, rho_plus: rp, center_minus: cm, center_plus: cp })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::support_flow::state::Geometry;

    #[test]
    fn circle_and_ellipse() {
        let c = SupportState::<f64>::sphere(Geometry::Planar, 64, 1.3).unwrap();
        let r = radii(&c).unwrap();
        assert!((r.rho_minus - 1.3).abs() < 1e-9 && (r.rho_plus - 1.3).abs() < 1e-9);
        let e = SupportState::<f64>::ellipse(64, 2.0, 1.0).unwrap();
        let r = radii(&e).unwrap();
        assert!((r.rho_minus - 1.0).abs() < 1e-9 && (r.rho_plus - 2.0).abs() < 1e-9);
    }

    #[test]
    fn translated_circle_recovers_center() {
        let c = SupportState::<f64>::sphere(Geometry::Planar, 64, 1.0).unwrap().translated(&[0.25, -0.4]);
        let r = radii(&c).unwrap();
        assert!((r.rho_minus - 1.0).abs() < 1e-9 && (r.rho_plus - 1.0).abs() < 1e-9);
        for cc in [&r.center_minus, &r.center_plus] {
            assert!((cc[0] - 0.25).abs() < 1e-6 && (cc[1] + 0.4).abs() < 1e-6);
        }
    }

    #[test]
    fn axisymmetric_translated_spheroid() {
        let s = SupportState::<f64>::spheroid(64, 1.2, 1.0).unwrap().translated(&[0.3]);
        let r = radii(&s).unwrap();
        // The extremal directions fall between cell centres: O(Δ²) offsets.
        assert!((r.rho_minus - 1.0).abs() < 2e-4, "{r:?}");
        assert!((r.rho_plus - 1.2).abs() < 2e-4, "{r:?}");
        assert!((r.center_plus[0] - 0.3).abs() < 1e-6);
    }

    #[test]
    fn matches_grid_oracle_on_asymmetric_curve() {
        let s = SupportState::<f64>::from_fn(Geometry::Planar, 128, |t| {
            1.0 + 0.1 * (2.0 * t).cos() + 0.04 * (3.0 * t).sin() + 0.2 * t.cos()
        })
        .unwrap();
        let r = radii(&s).unwrap();
        let (mut best_p, mut best_m) = (f64::INFINITY, f64::NEG_INFINITY);
        let m = 400;
        for i in 0..=m {
            for k in 0..=m {
                let z = [
                    r.center_plus[0] - 0.01 + 0.02 * i as f64 / m as f64,
                    r.center_plus[1] - 0.01 + 0.02 * k as f64 / m as f64,
                ];
                best_p = best_p.min(shifted_extremum(&s, &z, true));
                let z = [
                    r.center_minus[0] - 0.01 + 0.02 * i as f64 / m as f64,
                    r.center_minus[1] - 0.01 + 0.02 * k as f64 / m as f64,
                ];
                best_m = best_m.max(shifted_extremum(&s, &z, false));
            }
        }
        assert!(r.rho_plus <= best_p + 1e-12 && best_p - r.rho_plus < 1e-6);
        assert!(r.rho_minus >= best_m - 1e-12 && r.rho_minus - best_m < 1e-6);
    }
}
