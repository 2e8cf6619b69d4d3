use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::real::Real;

/// Pointwise second fundamental form `h_{ijα}` of an `n`-manifold in
/// codimension `k`, written in orthonormal tangent and normal frames.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondFundamentalForm<T> {
    n: usize,
    k: usize,
    data: Vec<T>,
}

impl<T: Real> SecondFundamentalForm<T> {
    /// Builds from `(i, j, α)`-major data, rejecting asymmetric input.
    pub fn new(n: usize, k: usize, data: Vec<T>) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::Shape(format!("n = {n}, k = {k}: both must be at least 1")));
        }
        if data.len() != n * n * k {
            return Err(Error::Shape(format!("expected {} entries, got {}", n * n * k, data.len())));
        }
        let h = Self { n, k, data };
        let mut scale = T::zero();
        for &x in &h.data {
            if !x.is_finite() {
                return Err(Error::Shape("non-finite entry".into()));
            }
            scale = scale.max(x.abs());
        }
        let tol = T::c(1e-12) * scale.max(T::min_positive_value());
        for i in 0..n {
            for j in (i + 1)..n {
                for a in 0..k {
                    if (h.get(i, j, a) - h.get(j, i, a)).abs() > tol {
                        return Err(Error::Shape(format!("h[{i}][{j}][{a}] != h[{j}][{i}][{a}]")));
                    }
                }
            }
        }
        Ok(h)
    }

    /// Builds from a generator, symmetrizing `(i, j)`.
    pub fn from_fn(n: usize, k: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = vec![T::zero(); n * n * k];
        for i in 0..n {
            for j in 0..n {
                for a in 0..k {
                    data[(i * n + j) * k + a] = f(i, j, a);
                }
            }
        }
        let mut h = Self { n, k, data };
        h.symmetrize();
        h
    }

    pub fn zeros(n: usize, k: usize) -> Self {
        Self { n, k, data: vec![T::zero(); n * n * k] }
    }

    /// `h = λ δ_ij ν_1`: the umbilic point of a round sphere of radius `1/λ`.
    pub fn umbilic(n: usize, k: usize, lambda: T) -> Self {
        Self::from_fn(n, k, |i, j, a| if i == j && a == 0 { lambda } else { T::zero() })
    }

    fn symmetrize(&mut self) {
        let (n, k) = (self.n, self.k);
        for i in 0..n {
            for j in (i + 1)..n {
                for a in 0..k {
                    let m = (self.data[(i * n + j) * k + a] + self.data[(j * n + i) * k + a]) * T::c(0.5);
                    self.data[(i * n + j) * k + a] = m;
                    self.data[(j * n + i) * k + a] = m;
                }
            }
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, a: usize) -> T {
        self.data[(i * self.n + j) * self.k + a]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { n: self.n, k: self.k, data: self.data.iter().map(|&x| x * c).collect() }
    }

    /// Mean curvature vector `H_α = Σ_i h_{iiα}`.
    pub fn mean_curvature(&self) -> Vec<T> {
        (0..self.k).map(|a| (0..self.n).map(|i| self.get(i, i, a)).sum()).collect()
    }

    pub fn norm_sq(&self) -> T {
        self.data.iter().map(|&x| x * x).sum()
    }

    pub fn mean_curvature_sq(&self) -> T {
        self.mean_curvature().iter().map(|&x| x * x).sum()
    }

    /// `h̊ = h − (1/n) H ⊗ g`.
    pub fn traceless(&self) -> Self {
        let hv = self.mean_curvature();
        let inv_n = T::one() / T::of(self.n);
        let mut out = self.clone();
        for i in 0..self.n {
            for a in 0..self.k {
                out.data[(i * self.n + i) * self.k + a] -= hv[a] * inv_n;
            }
        }
        out
    }

    /// `Σ_ij h_{ij}` contracted against a unit normal `nu`.
    pub fn component_along(&self, nu: &[T]) -> Vec<T> {
        let n = self.n;
        let mut m = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = (0..self.k).map(|a| self.get(i, j, a) * nu[a]).sum();
            }
        }
        m
    }

    /// `h(X, Y) ∈ R^k` for tangent vectors `X`, `Y`.
    pub fn apply(&self, x: &[T], y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.k];
        for i in 0..self.n {
            for j in 0..self.n {
                let w = x[i] * y[j];
                if w == T::zero() {
                    continue;
                }
                for (a, o) in out.iter_mut().enumerate() {
                    *o += w * self.get(i, j, a);
                }
            }
        }
        out
    }
}

/// Norms returned by [`norms_and_traceless`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureNorms<T> {
    /// `|h|²`
    pub normh_sq: T,
    /// `|H|²`
    pub norm_mean_sq: T,
    /// `|h̊|² = |h|² − |H|²/n`
    pub ring_sq: T,
    n: usize,
}

impl<T: Real> CurvatureNorms<T> {
    /// `f0 = |h̊|² / |H|²`; degenerate when `|H| = 0`.
    pub fn f0(&self) -> Result<T> {
        if self.norm_mean_sq <= T::zero() {
            return Err(Error::Degenerate("f0 requires |H|^2 > 0".into()));
        }
        Ok(self.ring_sq / self.norm_mean_sq)
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

pub fn norms_and_traceless<T: Real>(h: &SecondFundamentalForm<T>) -> CurvatureNorms<T> {
    let normh_sq = h.norm_sq();
    let norm_mean_sq = h.mean_curvature_sq();
    let ring_sq = h.traceless().norm_sq();
    CurvatureNorms { normh_sq, norm_mean_sq, ring_sq, n: h.n() }
}

/// Split of `h̊` along `ν₁ = H/|H|` and its orthogonal complement.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedDecomposition<T> {
    pub norm_mean: T,
    /// Eigenvalues of `h̊₁`, descending; they sum to zero.
    pub ring1_diag: Vec<T>,
    pub norm_ring1_sq: T,
    pub norm_ringminus_sq: T,
    /// `ν₁` in the working normal frame.
    pub nu1: Vec<T>,
}

pub fn adapted_decompose<T: Real>(h: &SecondFundamentalForm<T>) -> Result<AdaptedDecomposition<T>> {
    let n = h.n();
    let hv = h.mean_curvature();
    let norm_mean = hv.iter().map(|&x| x * x).sum::<T>().sqrt();
    if norm_mean <= T::zero() {
        return Err(Error::Degenerate("adapted frame requires |H| > 0".into()));
    }
    let nu1: Vec<T> = hv.iter().map(|&x| x / norm_mean).collect();
    let ring = h.traceless();
    let mut ring1 = ring.component_along(&nu1);
    let norm_ring1_sq: T = ring1.iter().map(|&x| x * x).sum();
    let mut minus = T::zero();
    for i in 0..n {
        for j in 0..n {
            for (a, &nu) in nu1.iter().enumerate() {
                let d = ring.get(i, j, a) - ring1[i * n + j] * nu;
                minus += d * d;
            }
        }
    }
    let (ring1_diag, _) = symmetric_eigen(&mut ring1, n);
    Ok(AdaptedDecomposition { norm_mean, ring1_diag, norm_ring1_sq, norm_ringminus_sq: minus, nu1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_h(rng: &mut ChaCha8Rng, n: usize, k: usize) -> SecondFundamentalForm<f64> {
        SecondFundamentalForm::from_fn(n, k, |_, _, _| StandardNormal.sample(rng))
    }

    #[test]
    fn umbilic_sphere_point() {
        let h = SecondFundamentalForm::<f64>::umbilic(2, 2, 1.0);
        let c = norms_and_traceless(&h);
        assert_eq!((c.normh_sq, c.norm_mean_sq, c.ring_sq), (2.0, 4.0, 0.0));
        assert_eq!(c.f0().unwrap(), 0.0);
    }

    #[test]
    fn zero_form_is_degenerate_for_f0() {
        let h = SecondFundamentalForm::<f64>::zeros(3, 2);
        let c = norms_and_traceless(&h);
        assert_eq!((c.normh_sq, c.norm_mean_sq, c.ring_sq), (0.0, 0.0, 0.0));
        assert!(matches!(c.f0(), Err(Error::Degenerate(_))));
        assert!(adapted_decompose(&h).is_err());
    }

    #[test]
    fn rejects_asymmetric_and_bad_shapes() {
        let mut d = vec![0.0; 8];
        d[(0 * 2 + 1) * 2] = 1.0;
        assert!(SecondFundamentalForm::new(2, 2, d).is_err());
        assert!(SecondFundamentalForm::new(2, 2, vec![0.0; 7]).is_err());
        assert!(SecondFundamentalForm::<f64>::new(0, 2, vec![]).is_err());
    }

    /// Independent oracle: plain index loops straight from the definitions.
    fn naive_norms(h: &SecondFundamentalForm<f64>) -> (f64, f64, f64) {
        let (n, k) = (h.n(), h.k());
        let mut hh = 0.0;
        let mut mean = vec![0.0; k];
        for i in 0..n {
            for j in 0..n {
                for a in 0..k {
                    hh += h.get(i, j, a).powi(2);
                }
            }
            for a in 0..k {
                mean[a] += h.get(i, i, a);
            }
        }
        let hm: f64 = mean.iter().map(|x| x * x).sum();
        let mut ring = 0.0;
        for i in 0..n {
            for j in 0..n {
                for a in 0..k {
                    let d = if i == j { mean[a] / n as f64 } else { 0.0 };
                    ring += (h.get(i, j, a) - d).powi(2);
                }
            }
        }
        (hh, hm, ring)
    }

    #[test]
    fn norms_match_index_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let h = random_h(&mut rng, 3, 2);
            let c = norms_and_traceless(&h);
            let (hh, hm, ring) = naive_norms(&h);
            assert!((c.normh_sq - hh).abs() <= 1e-12 * hh);
            assert!((c.norm_mean_sq - hm).abs() <= 1e-12 * hh.max(hm));
            assert!((c.ring_sq - ring).abs() <= 1e-12 * hh);
            assert!((c.ring_sq - (hh - hm / 3.0)).abs() <= 1e-12 * hh);
        }
    }

    #[test]
    fn adapted_decomposition_hand_example() {
        let h = SecondFundamentalForm::from_fn(2, 2, |i, j, a| if i == 0 && j == 0 && a == 0 { 2.0f64 } else { 0.0 });
        let d = adapted_decompose(&h).unwrap();
        assert_eq!(d.norm_mean, 2.0);
        assert!((d.ring1_diag[0] - 1.0).abs() < 1e-15 && (d.ring1_diag[1] + 1.0).abs() < 1e-15);
        assert!((d.norm_ring1_sq - 2.0).abs() < 1e-15);
        assert!(d.norm_ringminus_sq.abs() < 1e-15);
    }

    #[test]
    fn adapted_decomposition_of_umbilic_is_trivial() {
        let d = adapted_decompose(&SecondFundamentalForm::<f64>::umbilic(2, 2, 1.0)).unwrap();
        assert_eq!(d.norm_ring1_sq, 0.0);
        assert_eq!(d.norm_ringminus_sq, 0.0);
    }

    #[test]
    fn adapted_norms_sum_to_traceless_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=5 {
            for k in 1..=3 {
                for _ in 0..50 {
                    let h = random_h(&mut rng, n, k);
                    let d = adapted_decompose(&h).unwrap();
                    let ring = norms_and_traceless(&h).ring_sq;
                    assert!((d.norm_ring1_sq + d.norm_ringminus_sq - ring).abs() <= 1e-12 * ring);
                    let tr: f64 = d.ring1_diag.iter().sum();
                    assert!(tr.abs() < 1e-12 * ring.sqrt().max(1.0));
                    let eig_sq: f64 = d.ring1_diag.iter().map(|x| x * x).sum();
                    assert!((eig_sq - d.norm_ring1_sq).abs() <= 1e-11 * ring);
                }
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let h = SecondFundamentalForm::<f32>::umbilic(3, 1, 2.0);
        let c = norms_and_traceless(&h);
        assert_eq!(c.normh_sq, 12.0);
        assert_eq!(c.norm_mean_sq, 36.0);
        assert!(c.ring_sq.abs() < 1e-5);
    }
}
