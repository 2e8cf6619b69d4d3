//! Random second fundamental forms on and inside the constraint sets the
//! inequalities are stated on. Entries are i.i.d. standard normal,
//! symmetrized, then projected.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::inequalities::SymmetricTensor3;
use super::reaction::SpherePinchingConstants;
use super::sff::SecondFundamentalForm;
use crate::real::Real;

fn normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::c(StandardNormal.sample(rng))
}

/// Symmetrized i.i.d. normal entries.
pub fn normal_sff<T: Real, R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> SecondFundamentalForm<T> {
    SecondFundamentalForm::from_fn(n, k, |_, _, _| normal(rng))
}

/// Rebuilds `h` as `H⊗g/n + s·h̊`.
fn with_traceless_scale<T: Real>(h: &SecondFundamentalForm<T>, s: T) -> SecondFundamentalForm<T> {
    let n = h.n();
    let hv = h.mean_curvature();
    let ring = h.traceless();
    SecondFundamentalForm::from_fn(n, h.k(), |i, j, a| {
        let umb = if i == j { hv[a] / T::of(n) } else { T::zero() };
        umb + s * ring.get(i, j, a)
    })
}

/// Sample with `|h|² = C0|H|²` exactly (up to rounding), obtained by scaling
/// the traceless part. Needs `C0 > 1/n`.
pub fn pinching_boundary_sample<T: Real, R: Rng + ?Sized>(
    n: usize,
    k: usize,
    c0: T,
    rng: &mut R,
) -> SecondFundamentalForm<T> {
    pinched_sample(n, k, c0, T::one(), rng)
}

/// Sample with `|h̊|² = fraction·(C0 − 1/n)|H|²`.
pub fn pinched_sample<T: Real, R: Rng + ?Sized>(
    n: usize,
    k: usize,
    c0: T,
    fraction: T,
    rng: &mut R,
) -> SecondFundamentalForm<T> {
    loop {
        let h = normal_sff(n, k, rng);
        let hh = h.mean_curvature_sq();
        let ring = h.traceless().norm_sq();
        if hh <= T::c(1e-8) || ring <= T::c(1e-12) {
            continue;
        }
        let target = fraction * (c0 - T::one() / T::of(n)) * hh;
        return with_traceless_scale(&h, (target / ring).sqrt());
    }
}

/// Sample with `H = 0` in every normal direction.
pub fn trace_free_sample<T: Real, R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> SecondFundamentalForm<T> {
    normal_sff(n, k, rng).traceless()
}

/// Sample satisfying `|h|² ≤ α|H|² + βK` for ambient curvature `K`. The
/// overall scale is log-uniform in `[0.1, 10]` relative to `√K`, and a
/// quarter of the samples sit on the boundary of the pinching set.
pub fn sphere_pinched_sample<T: Real, R: Rng + ?Sized>(
    k: usize,
    k_amb: T,
    consts: &SpherePinchingConstants<T>,
    rng: &mut R,
) -> SecondFundamentalForm<T> {
    let n = consts.n;
    loop {
        let scale = T::c(10f64.powf(rng.random_range(-1.0..1.0))) * k_amb.sqrt();
        let h = normal_sff::<T, _>(n, k, rng).scaled(scale);
        let hh = h.mean_curvature_sq();
        let ring = h.traceless().norm_sq();
        if ring <= T::c(1e-14) * scale * scale {
            continue;
        }
        let room = consts.a * hh + consts.beta * k_amb;
        let u: f64 = if rng.random_bool(0.25) { 1.0 } else { rng.random() };
        let s = (T::c(u) * room * (T::one() - T::c(1e-12)) / ring).sqrt();
        return with_traceless_scale(&h, s);
    }
}

/// Principal curvatures with `H = n` and `f0 = fraction·f0_max`, where
/// `f0_max = 1/(n(n−1))`. Resamples until all are positive.
pub fn lemma23_sample<R: Rng + ?Sized>(n: usize, fraction: f64, rng: &mut R) -> Vec<f64> {
    let nf = n as f64;
    let f0 = fraction / (nf * (nf - 1.0));
    loop {
        let mut d: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let mean = d.iter().sum::<f64>() / nf;
        d.iter_mut().for_each(|x| *x -= mean);
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        let t = (f0 * nf * nf).sqrt() / norm;
        let lambda: Vec<f64> = d.iter().map(|x| 1.0 + t * x).collect();
        if lambda.iter().all(|&l| l > 0.0) {
            return lambda;
        }
    }
}

/// Totally symmetric normal 3-tensor.
pub fn symmetric_tensor3_sample<T: Real, R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> SymmetricTensor3<T> {
    SymmetricTensor3::from_fn(n, k, |_, _, _, _| normal(rng))
}
