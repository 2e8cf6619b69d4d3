//! Reaction terms of the evolution of `|h|²` and `|H|²` under mean curvature
//! flow, and the pointwise inequalities built on them.

use super::sff::{adapted_decompose, norms_and_traceless, SecondFundamentalForm};
use crate::error::{Error, Result};
use crate::real::Real;

/// `(R1, R2)`: the zero-order terms in `∂|h|²/∂t` and `∂|H|²/∂t` (halved).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionTerms<T> {
    pub r1: T,
    pub r2: T,
}

pub fn reaction_terms<T: Real>(h: &SecondFundamentalForm<T>) -> ReactionTerms<T> {
    let (n, k) = (h.n(), h.k());
    let mut r1 = T::zero();
    for a in 0..k {
        for b in 0..k {
            let mut s = T::zero();
            for i in 0..n {
                for j in 0..n {
                    s += h.get(i, j, a) * h.get(i, j, b);
                }
            }
            r1 += s * s;
        }
    }
    // Normal curvature: commutators of the shape operators. Only α < β
    // contribute and the (α,β)/(β,α) terms are equal.
    for a in 0..k {
        for b in (a + 1)..k {
            let mut s = T::zero();
            for i in 0..n {
                for j in 0..n {
                    let mut c = T::zero();
                    for p in 0..n {
                        c += h.get(i, p, a) * h.get(j, p, b) - h.get(j, p, a) * h.get(i, p, b);
                    }
                    s += c * c;
                }
            }
            r1 += T::c(2.0) * s;
        }
    }
    let hv = h.mean_curvature();
    let mut r2 = T::zero();
    for i in 0..n {
        for j in 0..n {
            let s: T = (0..k).map(|a| hv[a] * h.get(i, j, a)).sum();
            r2 += s * s;
        }
    }
    ReactionTerms { r1, r2 }
}

/// Largest `C0` for which `|h|² ≤ C0 |H|²` is preserved in Euclidean space:
/// `1/(n−1)` for `n ≥ 4`, `4/(3n)` for `n = 2, 3`.
pub fn euclidean_pinching_threshold<T: Real>(n: usize) -> Result<T> {
    match n {
        0 | 1 => Err(Error::Parameter(format!("pinching threshold needs n >= 2, got {n}"))),
        2 | 3 => Ok(T::c(4.0) / (T::c(3.0) * T::of(n))),
        _ => Ok(T::one() / T::of(n - 1)),
    }
}

fn pinching_slack<T: Real>(scale: T) -> T {
    T::c(1e-10) * scale
}

/// `R1 − C0·R2`, the reaction part of `∂(|h|² − C0|H|²)/∂t` (halved).
///
/// Requires `|h|² ≤ C0|H|²` and `C0` at most the Euclidean threshold.
pub fn pinching_reaction_defect<T: Real>(h: &SecondFundamentalForm<T>, c0: T) -> Result<T> {
    let thr: T = euclidean_pinching_threshold(h.n())?;
    if !(c0 > T::zero()) || c0 > thr {
        return Err(Error::Precondition(format!("C0 = {c0} outside (0, {thr}]")));
    }
    let c = norms_and_traceless(h);
    if c.normh_sq > c0 * c.norm_mean_sq + pinching_slack(c.normh_sq) {
        return Err(Error::Precondition(format!(
            "|h|^2 = {} exceeds C0 |H|^2 = {}",
            c.normh_sq,
            c0 * c.norm_mean_sq
        )));
    }
    let r = reaction_terms(h);
    Ok(r.r1 - c0 * r.r2)
}

/// Right-hand side of the adapted-frame estimate for `R1 − R2/n` minus the
/// left-hand side; nonnegative whenever the estimate holds.
pub fn traceless_reaction_bound_defect<T: Real>(h: &SecondFundamentalForm<T>) -> Result<T> {
    let d = adapted_decompose(h)?;
    let r = reaction_terms(h);
    let n = T::of(h.n());
    let (x, y) = (d.norm_ring1_sq, d.norm_ringminus_sq);
    let hh = d.norm_mean * d.norm_mean;
    let rhs = x * x + x * hh / n + T::c(4.0) * x * y + T::c(1.5) * y * y;
    Ok(rhs - (r.r1 - r.r2 / n))
}

/// `(3/2)|h|⁴ − R1` for trace-free `h` (minimal points).
pub fn minimal_r1_bound_defect<T: Real>(h: &SecondFundamentalForm<T>) -> Result<T> {
    let hh = h.norm_sq();
    let tol = T::c(1e-10) * hh.sqrt().max(T::min_positive_value());
    if h.mean_curvature().iter().any(|x| x.abs() > tol) {
        return Err(Error::Precondition("h must be trace-free in every normal direction".into()));
    }
    Ok(T::c(1.5) * hh * hh - reaction_terms(h).r1)
}

/// Constants `(α, β, a, b)` of the perturbed pinching function
/// `|h̊|² / (a|H|² + bK)` for flows in a sphere of curvature `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePinchingConstants<T> {
    pub n: usize,
    pub alpha: T,
    pub beta: T,
    pub a: T,
    pub b: T,
}

impl<T: Real> SpherePinchingConstants<T> {
    /// Table values. For `n = 2` the caller picks `beta < 12/13`; other
    /// dimensions ignore it.
    pub fn for_dimension(n: usize, beta_n2: Option<T>) -> Result<Self> {
        let (alpha, beta, b) = match n {
            0 | 1 => return Err(Error::Parameter(format!("sphere constants need n >= 2, got {n}"))),
            2 => {
                let beta = beta_n2.ok_or_else(|| Error::Parameter("n = 2 needs beta < 12/13".into()))?;
                if !(beta > T::zero()) || beta >= T::c(12.0) / T::c(13.0) {
                    return Err(Error::Parameter(format!("n = 2 needs 0 < beta < 12/13, got {beta}")));
                }
                let four_minus = T::c(4.0) - beta;
                (T::c(2.0) / four_minus, beta, T::c(24.0) * beta / (T::c(13.0) * four_minus))
            }
            3 => (T::c(4.0) / T::c(9.0), T::c(1.5), T::c(33.0) / T::c(40.0)),
            _ => (T::one() / T::of(n - 1), T::c(2.0), T::c(1.1)),
        };
        Ok(Self { n, alpha, beta, a: alpha - T::one() / T::of(n), b })
    }
}

/// `R̃ = (a|H|²+bK)(R1 − R2/n − nK|h̊|²) − aR2|h̊|² − anK|h̊|²|H|²`.
///
/// Requires `|h|² ≤ α|H|² + βK` and `K > 0`.
pub fn sphere_reaction_defect<T: Real>(
    h: &SecondFundamentalForm<T>,
    k_amb: T,
    consts: &SpherePinchingConstants<T>,
) -> Result<T> {
    if consts.n != h.n() {
        return Err(Error::Parameter(format!("constants for n = {} applied to n = {}", consts.n, h.n())));
    }
    if !(consts.a > T::zero()) || !(consts.b > T::zero()) || consts.b > consts.beta {
        return Err(Error::Parameter("invalid sphere pinching constants".into()));
    }
    if !(k_amb > T::zero()) {
        return Err(Error::Precondition(format!("ambient curvature must be positive, got {k_amb}")));
    }
    let c = norms_and_traceless(h);
    let bound = consts.alpha * c.norm_mean_sq + consts.beta * k_amb;
    if c.normh_sq > bound + pinching_slack(c.normh_sq.max(bound)) {
        return Err(Error::Precondition(format!("|h|^2 = {} exceeds α|H|^2 + βK = {bound}", c.normh_sq)));
    }
    let r = reaction_terms(h);
    let n = T::of(h.n());
    let denom = consts.a * c.norm_mean_sq + consts.b * k_amb;
    Ok(denom * (r.r1 - r.r2 / n - n * k_amb * c.ring_sq)
        - consts.a * r.r2 * c.ring_sq
        - consts.a * n * k_amb * c.ring_sq * c.norm_mean_sq)
}

/// Exponents for the `∫ f_σ^p` monitor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinchingMonitorParams<T> {
    pub n: usize,
    pub c0: T,
    pub eps_nabla: T,
    pub eps0: T,
    pub sigma: T,
    pub p: T,
}

impl<T: Real> PinchingMonitorParams<T> {
    /// Validates `p > 16/ε∇`, `σ ≤ (ε0/8)√(ε∇/p)` and `σp > n`, where
    /// `ε∇ = 3/(n+2) − C0`. `eps0` has no closed form and is supplied.
    pub fn new(n: usize, c0: T, eps0: T, sigma: T, p: T) -> Result<Self> {
        let eps_nabla = T::c(3.0) / T::of(n + 2) - c0;
        let fail = |m: String| Err(Error::Parameter(m));
        if !(c0 > T::zero()) || !(eps_nabla > T::zero()) {
            return fail(format!("C0 = {c0} must lie in (0, 3/(n+2))"));
        }
        if !(eps0 > T::zero()) || !(sigma > T::zero()) || !(p > T::zero()) {
            return fail("eps0, sigma and p must be positive".into());
        }
        if p <= T::c(16.0) / eps_nabla {
            return fail(format!("p = {p} must exceed 16/eps_nabla = {}", T::c(16.0) / eps_nabla));
        }
        let smax = eps0 / T::c(8.0) * (eps_nabla / p).sqrt();
        if sigma > smax {
            return fail(format!("sigma = {sigma} exceeds (eps0/8) sqrt(eps_nabla/p) = {smax}"));
        }
        if sigma * p <= T::of(n) {
            return fail(format!("sigma * p = {} must exceed n = {n}", sigma * p));
        }
        Ok(Self { n, c0, eps_nabla, eps0, sigma, p })
    }
}
