//! Sectional-curvature, Codazzi-gradient and principal-curvature inequalities.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::sff::{norms_and_traceless, SecondFundamentalForm};
use crate::error::{Error, Result};
use crate::linalg::{dot, gram_schmidt};
use crate::real::Real;

/// Sectional curvature of the plane spanned by orthonormal `x`, `y`, from
/// the Gauss equation `⟨h(X,X),h(Y,Y)⟩ − |h(X,Y)|²` (flat ambient space).
pub fn sectional_curvature<T: Real>(h: &SecondFundamentalForm<T>, x: &[T], y: &[T]) -> T {
    let hxx = h.apply(x, x);
    let hyy = h.apply(y, y);
    let hxy = h.apply(x, y);
    dot(&hxx, &hyy) - dot(&hxy, &hxy)
}

/// An orthonormal 2-frame in the tangent space.
pub type Plane<T> = (Vec<T>, Vec<T>);

/// All coordinate planes `e_i ∧ e_j` plus `random` uniformly oriented planes.
pub fn sample_planes<T: Real, R: Rng + ?Sized>(n: usize, random: usize, rng: &mut R) -> Vec<Plane<T>> {
    let mut planes = Vec::with_capacity(n * (n - 1) / 2 + random);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut x = vec![T::zero(); n];
            let mut y = vec![T::zero(); n];
            x[i] = T::one();
            y[j] = T::one();
            planes.push((x, y));
        }
    }
    while planes.len() < n * (n - 1) / 2 + random {
        let mut v: Vec<Vec<T>> = (0..2)
            .map(|_| (0..n).map(|_| T::c(StandardNormal.sample(rng))).collect())
            .collect();
        gram_schmidt(&mut v, T::c(1e-6));
        if v.len() == 2 {
            let y = v.pop().unwrap();
            let x = v.pop().unwrap();
            planes.push((x, y));
        }
    }
    planes
}

/// `min_π K(π) − ½(1/(n−1) − C0)|H|²` over the given planes.
///
/// Requires `|h|² ≤ C0|H|²` with `C0 ≤ 1/(n−1)`.
pub fn chen_sectional_defect<T: Real>(h: &SecondFundamentalForm<T>, c0: T, planes: &[Plane<T>]) -> Result<T> {
    let n = h.n();
    if n < 2 {
        return Err(Error::Parameter("sectional curvature needs n >= 2".into()));
    }
    let cap = T::one() / T::of(n - 1);
    if !(c0 > T::zero()) || c0 > cap {
        return Err(Error::Precondition(format!("C0 = {c0} outside (0, 1/(n-1)]")));
    }
    if planes.is_empty() {
        return Err(Error::Parameter("no planes to test".into()));
    }
    let c = norms_and_traceless(h);
    if c.normh_sq > c0 * c.norm_mean_sq + T::c(1e-10) * c.normh_sq {
        return Err(Error::Precondition("|h|^2 exceeds C0 |H|^2".into()));
    }
    let bound = T::c(0.5) * (cap - c0) * c.norm_mean_sq;
    let kmin = planes
        .iter()
        .map(|(x, y)| sectional_curvature(h, x, y))
        .fold(T::infinity(), T::min);
    Ok(kmin - bound)
}

/// A totally symmetric 3-tensor with values in `R^k`, the algebraic model
/// of `∇h` in flat ambient space (Codazzi symmetry).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricTensor3<T> {
    n: usize,
    k: usize,
    data: Vec<T>,
}

impl<T: Real> SymmetricTensor3<T> {
    #[inline]
    fn idx(&self, i: usize, j: usize, l: usize, a: usize) -> usize {
        ((i * self.n + j) * self.n + l) * self.k + a
    }

    /// Builds from `(i, j, l, α)`-major data, rejecting non-symmetric input.
    pub fn new(n: usize, k: usize, data: Vec<T>) -> Result<Self> {
        if n == 0 || k == 0 || data.len() != n * n * n * k {
            return Err(Error::Shape(format!("expected n^3 k = {} entries", n * n * n * k)));
        }
        let t = Self { n, k, data };
        let scale = t.data.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let tol = T::c(1e-12) * scale.max(T::min_positive_value());
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for a in 0..k {
                        let v = t.get(i, j, l, a);
                        for &(p, q, r) in &[(j, i, l), (i, l, j), (l, j, i), (j, l, i), (l, i, j)] {
                            if (v - t.get(p, q, r, a)).abs() > tol {
                                return Err(Error::Shape(format!("T not symmetric at ({i},{j},{l},{a})")));
                            }
                        }
                    }
                }
            }
        }
        Ok(t)
    }

    /// Symmetrizes an arbitrary generator over the six index permutations.
    pub fn from_fn(n: usize, k: usize, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut raw = vec![T::zero(); n * n * n * k];
        let mut t = Self { n, k, data: vec![T::zero(); n * n * n * k] };
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for a in 0..k {
                        raw[t.idx(i, j, l, a)] = f(i, j, l, a);
                    }
                }
            }
        }
        let sixth = T::one() / T::c(6.0);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for a in 0..k {
                        let s = [(i, j, l), (j, i, l), (i, l, j), (l, j, i), (j, l, i), (l, i, j)]
                            .iter()
                            .map(|&(p, q, r)| raw[t.idx(p, q, r, a)])
                            .sum::<T>();
                        let id = t.idx(i, j, l, a);
                        t.data[id] = s * sixth;
                    }
                }
            }
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, l: usize, a: usize) -> T {
        self.data[self.idx(i, j, l, a)]
    }

    pub fn norm_sq(&self) -> T {
        self.data.iter().map(|&x| x * x).sum()
    }

    /// `(tr T)_{iα} = Σ_j T_{ijjα}`, row-major `n x k`.
    pub fn trace(&self) -> Vec<T> {
        let mut tr = vec![T::zero(); self.n * self.k];
        for i in 0..self.n {
            for a in 0..self.k {
                tr[i * self.k + a] = (0..self.n).map(|j| self.get(i, j, j, a)).sum();
            }
        }
        tr
    }
}

/// `|T|² − (3/(n+2))|tr T|²`, nonnegative for every symmetric `T`.
pub fn codazzi_gradient_ratio<T: Real>(t: &SymmetricTensor3<T>) -> T {
    let tr = t.trace();
    t.norm_sq() - T::c(3.0) / T::of(t.n() + 2) * tr.iter().map(|&x| x * x).sum::<T>()
}

/// Numerically minimizes `|T|²(n+2) / (3|tr T|²)` over symmetric tensors by
/// power iteration on `T ↦ Sym(trᵀ tr T)` from random starts. The minimum
/// is 1 when the constant `3/(n+2)` is sharp.
pub fn codazzi_sharpness_search<R: Rng + ?Sized>(n: usize, k: usize, starts: usize, rng: &mut R) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..starts {
        let mut t = SymmetricTensor3::<f64>::from_fn(n, k, |_, _, _, _| StandardNormal.sample(rng));
        for _ in 0..200 {
            let tr = t.trace();
            let next = SymmetricTensor3::from_fn(n, k, |i, j, l, a| if j == l { tr[i * k + a] } else { 0.0 });
            let nn = next.norm_sq().sqrt();
            if nn == 0.0 {
                break;
            }
            t = SymmetricTensor3 { n, k, data: next.data.iter().map(|x| x / nn).collect() };
        }
        let tr2: f64 = t.trace().iter().map(|x| x * x).sum();
        if tr2 > 0.0 {
            best = best.min(t.norm_sq() * (n as f64 + 2.0) / (3.0 * tr2));
        }
    }
    best
}

/// Result of [`amc_lemma23_defect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma23Defect<T> {
    /// `nC − (1+nf0)H|h|² − f0(1+nf0)(1−√(n(n−1)f0))H³`
    pub defect: T,
    /// `f0(1+nf0)(1−√(n(n−1)f0))H³`
    pub rhs: T,
    /// `rhs − ½ f0 H³`, nonnegative once `f0` is small enough.
    pub simplified_defect: T,
    pub f0: T,
    pub mean: T,
}

/// Cubic principal-curvature inequality for strongly pinched convex points.
pub fn amc_lemma23_defect<T: Real>(lambda: &[T]) -> Result<Lemma23Defect<T>> {
    let n = lambda.len();
    if n < 2 {
        return Err(Error::Parameter("need at least two principal curvatures".into()));
    }
    if lambda.iter().any(|&l| !(l > T::zero())) {
        return Err(Error::Precondition("principal curvatures must be positive".into()));
    }
    let nf = T::of(n);
    let mean: T = lambda.iter().copied().sum();
    let hh: T = lambda.iter().map(|&l| l * l).sum();
    let cubic: T = lambda.iter().map(|&l| l * l * l).sum();
    let ring = lambda.iter().map(|&l| (l - mean / nf).powi(2)).sum::<T>();
    let f0 = ring / (mean * mean);
    let cap = T::one() / (nf * (nf - T::one()));
    if f0 >= cap {
        return Err(Error::Precondition(format!("f0 = {f0} must be below 1/(n(n-1)) = {cap}")));
    }
    let h3 = mean * mean * mean;
    let rhs = f0 * (T::one() + nf * f0) * (T::one() - (nf * (nf - T::one()) * f0).sqrt()) * h3;
    let lhs = nf * cubic - (T::one() + nf * f0) * mean * hh;
    Ok(Lemma23Defect { defect: lhs - rhs, rhs, simplified_defect: rhs - T::c(0.5) * f0 * h3, f0, mean })
}

/// Largest `ε` with `(1+nε)(1−√(n(n−1)ε)) ≥ ½`, i.e. the pinching level
/// below which `rhs ≥ ½ f0 H³`.
pub fn lemma23_simplification_limit(n: usize) -> f64 {
    let nf = n as f64;
    let g = |e: f64| (1.0 + nf * e) * (1.0 - (nf * (nf - 1.0) * e).sqrt()) - 0.5;
    let (mut lo, mut hi) = (0.0, 1.0 / (nf * (nf - 1.0)));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `(5/3)(x+y)² − (x² + 4xy + (3/2)y²)`; equals `(2/3)(x − y/2)² ≥ 0`.
pub fn peter_paul_defect<T: Real>(x: T, y: T) -> T {
    T::c(5.0) / T::c(3.0) * (x + y) * (x + y) - (x * x + T::c(4.0) * x * y + T::c(1.5) * y * y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chen_umbilic_hand_value() {
        let h = SecondFundamentalForm::<f64>::umbilic(2, 2, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let planes = sample_planes(2, 4, &mut rng);
        let d = chen_sectional_defect(&h, 2.0 / 3.0, &planes).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn chen_zero_form_and_preconditions() {
        let z = SecondFundamentalForm::<f64>::zeros(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let planes = sample_planes(3, 3, &mut rng);
        assert_eq!(chen_sectional_defect(&z, 0.4, &planes).unwrap(), 0.0);
        assert!(chen_sectional_defect(&z, 0.6, &planes).is_err());
        let bad = SecondFundamentalForm::from_fn(3, 1, |i, j, _| if i == 0 && j == 0 { 1.0 } else { 0.0 });
        assert!(chen_sectional_defect(&bad, 0.4, &planes).is_err());
    }

    #[test]
    fn random_planes_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (x, y) in sample_planes::<f64, _>(5, 20, &mut rng) {
            assert!((dot(&x, &x) - 1.0).abs() < 1e-12);
            assert!((dot(&y, &y) - 1.0).abs() < 1e-12);
            assert!(dot(&x, &y).abs() < 1e-12);
        }
    }

    #[test]
    fn codazzi_examples() {
        let t = SymmetricTensor3::from_fn(2, 1, |i, j, l, _| if i + j + l == 0 { 1.0f64 } else { 0.0 });
        assert!((codazzi_gradient_ratio(&t) - 0.25).abs() < 1e-15);
        let z = SymmetricTensor3::<f64>::from_fn(3, 2, |_, _, _, _| 0.0);
        assert_eq!(codazzi_gradient_ratio(&z), 0.0);
        let mut d = vec![0.0f64; 8];
        d[1] = 1.0; // T_{001} only
        assert!(SymmetricTensor3::new(2, 1, d).is_err());
    }

    #[test]
    fn codazzi_constant_is_sharp() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..=5 {
            let best = codazzi_sharpness_search(n, 2, 4, &mut rng);
            assert!((best - 1.0).abs() < 1e-3, "n = {n}: {best}");
        }
    }

    #[test]
    fn lemma23_examples() {
        let d = amc_lemma23_defect(&[1.0f64, 1.0]).unwrap();
        assert!(d.defect.abs() < 1e-14 && d.rhs == 0.0);
        let d = amc_lemma23_defect(&[1.0f64, 1.1]).unwrap();
        // Direct evaluation: H = 2.1, |h|² = 2.21, C = 2.331, f0 = 0.005/4.41.
        let f0: f64 = 0.005 / 4.41;
        let rhs = f0 * (1.0 + 2.0 * f0) * (1.0 - (2.0 * f0).sqrt()) * 2.1f64.powi(3);
        let lhs = 2.0 * 2.331 - (1.0 + 2.0 * f0) * 2.1 * 2.21;
        assert!((d.defect - (lhs - rhs)).abs() < 1e-12);
        assert!(d.defect > 0.0);
        assert!(amc_lemma23_defect(&[1.0f64, 1.0, 10.0]).is_err());
        assert!(amc_lemma23_defect(&[1.0f64, -0.1]).is_err());
    }

    #[test]
    fn lemma23_limit_is_consistent() {
        for n in 2..=6 {
            let e = lemma23_simplification_limit(n);
            let nf = n as f64;
            assert!(e > 0.0 && e < 1.0 / (nf * (nf - 1.0)));
            let g = (1.0 + nf * e) * (1.0 - (nf * (nf - 1.0) * e).sqrt());
            assert!((g - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn peter_paul_grid_and_boundary() {
        for i in 0..=200 {
            for j in 0..=200 {
                let (x, y) = (i as f64 * 0.05, j as f64 * 0.05);
                assert!(peter_paul_defect(x, y) >= -1e-12);
            }
        }
        // x/y → ∞: leading coefficient 5/3 − 1 > 0; x/y → 0: 5/3 − 3/2 > 0.
        assert!((peter_paul_defect(1.0f64, 0.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((peter_paul_defect(0.0f64, 1.0) - 1.0 / 6.0).abs() < 1e-15);
        assert!(peter_paul_defect(0.5f64, 1.0).abs() < 1e-15);
    }
}
