//! Symmetric homogeneous speed functions `f(λ₁,…,λₙ)` and the calculus
//! used by the higher-homogeneity estimates.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::real::Real;

/// Builtin speed families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedKind {
    /// `H = Σλᵢ`
    Mean,
    /// `|λ|`
    Norm,
    /// `H^a`
    MeanPow(f64),
    /// `K^b = (Πλᵢ)^b`
    GaussPow(f64),
    /// `S_k^{1/k}`
    SkRoot(usize),
    /// `S_k / S_{k−1}`
    SkRatio(usize),
}

/// Convexity class of `f` on the positive cone, where known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Concavity {
    Convex,
    Concave,
    /// Linear: both convex and concave.
    Linear,
    Neither,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedFunction {
    kind: SpeedKind,
    n: usize,
    scale: f64,
    normalized: bool,
}

/// Largest dimension the builtins accept.
pub const MAX_DIM: usize = 15;

/// Elementary symmetric polynomials `S_0..=S_k` of `l`, skipping index
/// `skip` when given.
fn elementary<T: Real>(l: &[T], k: usize, skip: Option<usize>) -> [T; MAX_DIM + 1] {
    let mut s = [T::zero(); MAX_DIM + 1];
    s[0] = T::one();
    for (i, &x) in l.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        for j in (1..=k).rev() {
            let prev = s[j - 1];
            s[j] += x * prev;
        }
    }
    s
}

/// `∂S_k/∂λᵢ = S_{k−1}(λ without λᵢ)`.
fn elementary_grad<T: Real>(l: &[T], k: usize, i: usize) -> T {
    if k == 0 {
        return T::zero();
    }
    elementary(l, k - 1, Some(i))[k - 1]
}

/// Builds a builtin speed for dimension `n`. `power` is the exponent of
/// `H^a` and `K^b`; `k` selects the elementary polynomial.
pub fn builtin(name: &str, n: usize, power: Option<f64>, k: Option<usize>) -> Result<SpeedFunction> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::Parameter(format!("speed needs 1 <= n <= {MAX_DIM}, got {n}")));
    }
    let need_power = |what: &str| -> Result<f64> {
        let p = power.ok_or_else(|| Error::Parameter(format!("{what} needs a power")))?;
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Parameter(format!("{what} power must be positive, got {p}")));
        }
        Ok(p)
    };
    let need_k = |what: &str, lo: usize| -> Result<usize> {
        let k = k.ok_or_else(|| Error::Parameter(format!("{what} needs k")))?;
        if k < lo || k > n {
            return Err(Error::Parameter(format!("{what} needs {lo} <= k <= n = {n}, got {k}")));
        }
        Ok(k)
    };
    let kind = match name {
        "H" => SpeedKind::Mean,
        "norm" => SpeedKind::Norm,
        "H^a" | "H_pow" => SpeedKind::MeanPow(need_power("H^a")?),
        "K^b" | "K_pow" => SpeedKind::GaussPow(need_power("K^b")?),
        "Sk_root" => SpeedKind::SkRoot(need_k("Sk_root", 1)?),
        "Sk_ratio" => SpeedKind::SkRatio(need_k("Sk_ratio", 1)?),
        _ => return Err(Error::Unknown { kind: "speed", name: name.to_string() }),
    };
    Ok(SpeedFunction { kind, n, scale: 1.0, normalized: false })
}

impl SpeedFunction {
    pub fn kind(&self) -> SpeedKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Constant factor multiplying the raw family member.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn name(&self) -> String {
        match self.kind {
            SpeedKind::Mean => "H".into(),
            SpeedKind::Norm => "norm".into(),
            SpeedKind::MeanPow(a) => format!("H^{a}"),
            SpeedKind::GaussPow(b) => format!("K^{b}"),
            SpeedKind::SkRoot(k) => format!("S{k}^(1/{k})"),
            SpeedKind::SkRatio(k) => format!("S{k}/S{}", k - 1),
        }
    }

    /// Homogeneity degree `α`.
    pub fn degree(&self) -> f64 {
        match self.kind {
            SpeedKind::MeanPow(a) => a,
            SpeedKind::GaussPow(b) => b * self.n as f64,
            _ => 1.0,
        }
    }

    pub fn concavity(&self) -> Concavity {
        match self.kind {
            SpeedKind::Mean => Concavity::Linear,
            SpeedKind::Norm => Concavity::Convex,
            SpeedKind::MeanPow(a) if a == 1.0 => Concavity::Linear,
            SpeedKind::MeanPow(a) if a > 1.0 => Concavity::Convex,
            SpeedKind::MeanPow(_) => Concavity::Concave,
            SpeedKind::GaussPow(b) if b * self.n as f64 <= 1.0 && self.n > 1 => Concavity::Concave,
            SpeedKind::GaussPow(b) if self.n == 1 && b == 1.0 => Concavity::Linear,
            SpeedKind::GaussPow(_) => Concavity::Neither,
            SpeedKind::SkRoot(_) | SpeedKind::SkRatio(_) => Concavity::Concave,
        }
    }

    /// `H` and `|λ|` live on the half-space `H > 0`, the rest on `Γ₊`.
    pub fn in_cone<T: Real>(&self, l: &[T]) -> bool {
        if l.len() != self.n || l.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match self.kind {
            SpeedKind::Mean | SpeedKind::Norm => l.iter().copied().sum::<T>() > T::zero(),
            _ => l.iter().all(|&x| x > T::zero()),
        }
    }

    fn check<T: Real>(&self, l: &[T]) -> Result<()> {
        if l.len() != self.n {
            return Err(Error::Shape(format!("expected {} curvatures, got {}", self.n, l.len())));
        }
        if !self.in_cone(l) {
            return Err(Error::Precondition(format!("curvatures outside the admissible cone of {}", self.name())));
        }
        Ok(())
    }

    pub fn eval<T: Real>(&self, l: &[T]) -> Result<T> {
        self.check(l)?;
        let h: T = l.iter().copied().sum();
        let raw = match self.kind {
            SpeedKind::Mean => h,
            SpeedKind::Norm => l.iter().map(|&x| x * x).sum::<T>().sqrt(),
            SpeedKind::MeanPow(a) => h.powf(T::c(a)),
            SpeedKind::GaussPow(b) => l.iter().copied().fold(T::one(), |p, x| p * x).powf(T::c(b)),
            SpeedKind::SkRoot(k) => elementary(l, k, None)[k].powf(T::one() / T::of(k)),
            SpeedKind::SkRatio(k) => {
                let s = elementary(l, k, None);
                s[k] / s[k - 1]
            }
        };
        Ok(T::c(self.scale) * raw)
    }

    /// `∂f/∂λᵢ`.
    pub fn grad<T: Real>(&self, l: &[T]) -> Result<Vec<T>> {
        self.check(l)?;
        let h: T = l.iter().copied().sum();
        let sc = T::c(self.scale);
        let g: Vec<T> = match self.kind {
            SpeedKind::Mean => vec![T::one(); self.n],
            SpeedKind::Norm => {
                let r = l.iter().map(|&x| x * x).sum::<T>().sqrt();
                l.iter().map(|&x| x / r).collect()
            }
            SpeedKind::MeanPow(a) => vec![T::c(a) * h.powf(T::c(a - 1.0)); self.n],
            SpeedKind::GaussPow(b) => {
                let kb = l.iter().copied().fold(T::one(), |p, x| p * x).powf(T::c(b));
                l.iter().map(|&x| T::c(b) * kb / x).collect()
            }
            SpeedKind::SkRoot(k) => {
                let s = elementary(l, k, None)[k];
                let c = s.powf(T::one() / T::of(k) - T::one()) / T::of(k);
                (0..self.n).map(|i| c * elementary_grad(l, k, i)).collect()
            }
            SpeedKind::SkRatio(k) => {
                let s = elementary(l, k, None);
                (0..self.n)
                    .map(|i| {
                        let (a, b) = (elementary_grad(l, k, i), elementary_grad(l, k - 1, i));
                        (a * s[k - 1] - s[k] * b) / (s[k - 1] * s[k - 1])
                    })
                    .collect()
            }
        };
        Ok(g.into_iter().map(|x| sc * x).collect())
    }

    /// Hessian of `f` (row-major `n x n`) by central differences of the
    /// analytic gradient with step `h_rel·|λ|`, optionally Richardson
    /// extrapolated.
    pub fn hessian_fd(&self, l: &[f64], h_rel: f64, richardson: bool) -> Result<Vec<f64>> {
        self.check(l)?;
        let n = self.n;
        let scale = l.iter().map(|x| x * x).sum::<f64>().sqrt();
        let central = |h: f64| -> Result<Vec<f64>> {
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                let mut p = l.to_vec();
                let mut q = l.to_vec();
                p[i] += h;
                q[i] -= h;
                let (gp, gq) = (self.grad(&p)?, self.grad(&q)?);
                for j in 0..n {
                    m[i * n + j] = (gp[j] - gq[j]) / (2.0 * h);
                }
            }
            Ok(m)
        };
        let h = h_rel * scale;
        let mut m = central(h)?;
        if richardson {
            let m2 = central(0.5 * h)?;
            for (a, b) in m.iter_mut().zip(&m2) {
                *a = (4.0 * b - *a) / 3.0;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (m[i * n + j] + m[j * n + i]);
                m[i * n + j] = s;
                m[j * n + i] = s;
            }
        }
        if let Some(bad) = m.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { node: bad });
        }
        Ok(m)
    }

    fn with_unit_value(&self, target: f64) -> Result<SpeedFunction> {
        let ones = vec![1.0; self.n];
        let v = self.eval(&ones)?;
        if !(v > 0.0) {
            return Err(Error::Precondition(format!("f(1,...,1) = {v} must be positive")));
        }
        Ok(SpeedFunction { scale: self.scale * target / v, ..self.clone() })
    }

    /// Rescaled so that `f(1,…,1) = 1`; the degree is unchanged.
    pub fn normalize(&self) -> Result<SpeedFunction> {
        let mut f = self.with_unit_value(1.0)?;
        f.normalized = true;
        Ok(f)
    }

    /// Rescaled so that `f(1,…,1) = n^α`, i.e. `f = H^α` at umbilic points.
    /// This is the normalization under which `Ḟ = αH^{α−1}I` at umbilics.
    pub fn normalized_to_unit_sum(&self) -> Result<SpeedFunction> {
        let target = (self.n as f64).powf(self.degree());
        let mut f = self.with_unit_value(target)?;
        f.normalized = false;
        Ok(f)
    }

    /// Norm of the quadratic form `B ↦ F̈(A)[B,B]` over unit symmetric `B`,
    /// for `A = diag(λ)`: the larger of the spectral radius of the Hessian
    /// of `f` and the divided differences `|(fᵢ − fⱼ)/(λᵢ − λⱼ)|`.
    pub fn second_derivative_norm(&self, l: &[f64], h_rel: f64) -> Result<f64> {
        let n = self.n;
        let mut hess = self.hessian_fd(l, h_rel, false)?;
        let g = self.grad(l)?;
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = l[i] - l[j];
                let q = if d.abs() < 1e-8 { hess[i * n + i] - hess[i * n + j] } else { (g[i] - g[j]) / d };
                best = best.max(q.abs());
            }
        }
        let (vals, _) = symmetric_eigen(&mut hess, n);
        for v in vals {
            best = best.max(v.abs());
        }
        Ok(best)
    }
}

/// Sampled bound `|F̈(A)[B,B]| ≤ μ H^{α−2} |B|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuBound {
    pub mu: f64,
    pub n: usize,
    pub alpha: f64,
    pub sample_count: usize,
}

/// Largest pinching ratio `λmax/λmin` covered by [`estimate_mu`].
pub const MU_PINCHING_RATIO: f64 = 10.0;

/// Estimates `μ` over diagonal `A` with `λmax/λmin ≤ 10`, including the
/// umbilic point. For each `A` the maximum over `B` is exact.
pub fn estimate_mu<R: Rng + ?Sized>(f: &SpeedFunction, samples: usize, rng: &mut R) -> Result<MuBound> {
    let alpha = f.degree();
    if alpha <= 1.0 {
        return Err(Error::Precondition(format!("estimate_mu needs degree > 1, got {alpha}")));
    }
    let n = f.n();
    let mut mu: f64 = 0.0;
    for s in 0..samples.max(1) {
        let l: Vec<f64> = if s == 0 {
            vec![1.0; n]
        } else {
            let mut l: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..=MU_PINCHING_RATIO)).collect();
            l[rng.random_range(0..n)] = 1.0;
            l
        };
        let h: f64 = l.iter().sum();
        let q = f.second_derivative_norm(&l, 1e-5)?;
        mu = mu.max(q * h.powf(2.0 - alpha));
    }
    Ok(MuBound { mu, n, alpha, sample_count: samples.max(1) })
}

/// Signed defects of the two-sided bounds on `Ḟ` and `F` around the
/// umbilic value; all are nonnegative when the bounds hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichDefects {
    /// `min fᵢ − (αH^{α−1} − μH^{α−2}|h̊|)`
    pub lower_fprimo: f64,
    /// `(αH^{α−1} + μH^{α−2}|h̊|) − max fᵢ`
    pub upper_fprimo: f64,
    /// `F − (H^α − (μ/2)H^{α−2}|h̊|²)`
    pub lower_fzero: f64,
    /// `(H^α + (μ/2)H^{α−2}|h̊|²) − F`
    pub upper_fzero: f64,
}

impl SandwichDefects {
    pub fn min(&self) -> f64 {
        self.lower_fprimo.min(self.upper_fprimo).min(self.lower_fzero).min(self.upper_fzero)
    }
}

/// Requires `f(1,…,1) = n^α` (see [`SpeedFunction::normalized_to_unit_sum`]).
///
/// The zeroth-order bound uses `μ/2`, the Taylor remainder constant of `f`
/// around the umbilic point with the same `μ` as the first-order bound.
pub fn sandwich_defects(f: &SpeedFunction, mu: f64, l: &[f64]) -> Result<SandwichDefects> {
    if l.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Precondition("sandwich bounds need positive curvatures".into()));
    }
    let n = f.n();
    let alpha = f.degree();
    let unit = f.eval(&vec![1.0; n])?;
    let want = (n as f64).powf(alpha);
    if (unit - want).abs() > 1e-12 * want {
        return Err(Error::Precondition(format!("speed must satisfy f(1,...,1) = n^alpha = {want}, got {unit}")));
    }
    let h: f64 = l.iter().sum();
    let ring = l.iter().map(|&x| (x - h / n as f64).powi(2)).sum::<f64>().sqrt();
    let g = f.grad(l)?;
    let v = f.eval(l)?;
    let gmin = g.iter().copied().fold(f64::INFINITY, f64::min);
    let gmax = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let centre1 = alpha * h.powf(alpha - 1.0);
    let spread1 = mu * h.powf(alpha - 2.0) * ring;
    let centre0 = h.powf(alpha);
    let spread0 = 0.5 * mu * h.powf(alpha - 2.0) * ring * ring;
    Ok(SandwichDefects {
        lower_fprimo: gmin - (centre1 - spread1),
        upper_fprimo: (centre1 + spread1) - gmax,
        lower_fzero: v - (centre0 - spread0),
        upper_fzero: (centre0 + spread0) - v,
    })
}

/// `(α−1)/(4n(α+μ))`.
pub fn sigma_threshold(alpha: f64, mu: f64, n: usize) -> Result<f64> {
    if alpha <= 1.0 {
        return Err(Error::Precondition(format!("sigma threshold needs alpha > 1, got {alpha}")));
    }
    if !(mu >= 0.0) || n == 0 {
        return Err(Error::Parameter("mu must be nonnegative and n positive".into()));
    }
    Ok((alpha - 1.0) / (4.0 * n as f64 * (alpha + mu)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn catalog(n: usize) -> Vec<SpeedFunction> {
        vec![
            builtin("H", n, None, None).unwrap(),
            builtin("norm", n, None, None).unwrap(),
            builtin("H^a", n, Some(2.5), None).unwrap(),
            builtin("K^b", n, Some(0.7), None).unwrap(),
            builtin("Sk_root", n, None, Some(n.min(2))).unwrap(),
            builtin("Sk_ratio", n, None, Some(n.min(2))).unwrap(),
        ]
    }

    #[test]
    fn builtin_examples() {
        let h = builtin("H", 2, None, None).unwrap();
        assert_eq!(h.eval(&[1.0f64, 1.0]).unwrap(), 2.0);
        assert_eq!(h.degree(), 1.0);
        let k = builtin("K^b", 2, Some(2.0), None).unwrap();
        assert!((k.eval(&[2.0f64, 3.0]).unwrap() - 36.0).abs() < 1e-12);
        assert_eq!(k.degree(), 4.0);
        let r = builtin("Sk_ratio", 3, None, Some(2)).unwrap();
        assert!((r.eval(&[1.0f64, 1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(builtin("foo", 2, None, None), Err(Error::Unknown { .. })));
        assert!(builtin("K^b", 2, Some(0.0), None).is_err());
        assert!(builtin("Sk_root", 2, None, Some(3)).is_err());
    }

    #[test]
    fn normalize_examples() {
        let h = builtin("H", 2, None, None).unwrap().normalize().unwrap();
        assert!(h.is_normalized());
        assert!((h.eval(&[0.3f64, 0.9]).unwrap() - 0.6).abs() < 1e-15);
        let k = builtin("K^b", 2, Some(1.5), None).unwrap();
        let kn = k.normalize().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let l = [rng.random_range(0.1..3.0), rng.random_range(0.1..3.0)];
            assert_eq!(k.eval(&l).unwrap(), kn.eval(&l).unwrap());
        }
        let kk = kn.normalize().unwrap();
        assert_eq!(kk.eval(&[0.5, 2.0]).unwrap(), kn.eval(&[0.5, 2.0]).unwrap());
    }

    #[test]
    fn euler_relation_and_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=4 {
            for f in catalog(n) {
                for _ in 0..1000 {
                    let l: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..5.0)).collect();
                    let v = f.eval(&l).unwrap();
                    let g = f.grad(&l).unwrap();
                    let e: f64 = g.iter().zip(&l).map(|(a, b)| a * b).sum();
                    assert!((e - f.degree() * v).abs() <= 1e-8 * v, "{} {l:?}", f.name());
                    assert!(g.iter().all(|&x| x > 0.0), "monotonicity {}", f.name());
                    // dot_F contraction
                    let lmin = l.iter().copied().fold(f64::INFINITY, f64::min);
                    let c: f64 = g.iter().zip(&l).map(|(a, b)| a * b * b).sum();
                    assert!(c - lmin * f.degree() * v >= -1e-10 * c.abs());
                }
                for _ in 0..50 {
                    let l: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
                    let g = f.grad(&l).unwrap();
                    for i in 0..n {
                        let hh = 1e-6;
                        let mut p = l.clone();
                        let mut q = l.clone();
                        p[i] += hh;
                        q[i] -= hh;
                        let fd = (f.eval(&p).unwrap() - f.eval(&q).unwrap()) / (2.0 * hh);
                        assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1e-3), "{} fd", f.name());
                    }
                }
            }
        }
    }

    #[test]
    fn symmetry_and_exact_homogeneity() {
        for f in catalog(3) {
            let a = f.eval(&[1.0f64, 2.0, 3.0]).unwrap();
            let b = f.eval(&[3.0, 1.0, 2.0]).unwrap();
            assert!((a - b).abs() <= 1e-14 * a);
        }
        for f in [builtin("H", 3, None, None).unwrap(), builtin("Sk_ratio", 3, None, Some(2)).unwrap()] {
            assert_eq!(f.eval(&[2.0, 4.0, 6.0]).unwrap(), 2.0 * f.eval(&[1.0, 2.0, 3.0]).unwrap());
        }
    }

    #[test]
    fn cones() {
        let h = builtin("H", 2, None, None).unwrap();
        assert!(h.eval(&[-0.5, 1.0]).is_ok());
        assert!(h.eval(&[-1.5, 1.0]).is_err());
        let k = builtin("Sk_root", 2, None, Some(2)).unwrap();
        assert!(k.eval(&[-0.5, 1.0]).is_err());
        assert!(k.eval(&[1.0]).is_err());
    }

    #[test]
    fn f32_evaluation() {
        let f = builtin("Sk_ratio", 3, None, Some(2)).unwrap();
        let v: f32 = f.eval(&[1.0f32, 2.0, 3.0]).unwrap();
        assert!((v - 11.0 / 6.0).abs() < 1e-6);
    }

    #[test]
    fn mu_for_power_of_mean_curvature() {
        // F = H^α: F̈[B,B] = α(α−1)H^{α−2}(tr B)², and (tr B)² ≤ n|B|².
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 2..=3 {
            for a in [2.0, 3.0] {
                let f = builtin("H^a", n, Some(a), None).unwrap();
                let m = estimate_mu(&f, 200, &mut rng).unwrap();
                let exact = a * (a - 1.0) * n as f64;
                assert!((m.mu - exact).abs() < 1e-5 * exact, "{} vs {exact}", m.mu);
            }
        }
        let h = builtin("H", 2, None, None).unwrap();
        assert!(estimate_mu(&h, 10, &mut rng).is_err());
    }

    #[test]
    fn sandwich_holdout() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 2..=3 {
            for f in [
                builtin("H^a", n, Some(2.0), None).unwrap(),
                builtin("K^b", n, Some(1.0), None).unwrap(),
                builtin("K^b", n, Some(1.5), None).unwrap(),
            ] {
                let f = f.normalized_to_unit_sum().unwrap();
                let mu = estimate_mu(&f, 5000, &mut rng).unwrap();
                let d = sandwich_defects(&f, mu.mu, &vec![1.0; n]).unwrap();
                assert!(d.min().abs() < 1e-10 * mu.mu.max(1.0));
                for _ in 0..2000 {
                    let mut l: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..10.0)).collect();
                    l[0] = 1.0;
                    let h: f64 = l.iter().sum();
                    let d = sandwich_defects(&f, mu.mu, &l).unwrap();
                    assert!(d.min() >= -1e-8 * h.powf(f.degree()), "{} {l:?} {d:?}", f.name());
                }
            }
        }
        let f = builtin("H^a", 2, Some(2.0), None).unwrap().normalized_to_unit_sum().unwrap();
        let d = sandwich_defects(&f, 4.0, &[1.0, 2.0]).unwrap();
        // H² at (1,2): H = 3, |h̊| = 1/√2, μ = 4: Ḟ = 6I, F = 9.
        assert!((d.lower_fprimo - 4.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((d.lower_fzero - 1.0).abs() < 1e-12);
        assert!(sandwich_defects(&builtin("K^b", 2, Some(1.0), None).unwrap(), 4.0, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn sigma_threshold_examples() {
        assert!((sigma_threshold(2.0, 2.0, 2).unwrap() - 1.0 / 32.0).abs() < 1e-15);
        assert!(sigma_threshold(1.0 + 1e-12, 1.0, 2).unwrap() < 1e-12);
        assert!(sigma_threshold(1.0, 1.0, 2).is_err());
    }
}
