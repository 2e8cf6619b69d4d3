//! Support-function representation of convex curves and axisymmetric
//! surfaces, with differentiation and quadrature on the Gauss-map grid.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::real::Real;

/// Which convex hypersurfaces a state describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// Curve in the plane, `θ ∈ [0, 2π)`, `n = 1`.
    Planar,
    /// Surface of revolution in `R³` about the `z`-axis, polar angle
    /// `φ ∈ (0, π)` on cell centres, `n = 2`.
    Axisymmetric,
}

impl Geometry {
    /// Intrinsic dimension `n`.
    pub fn dim(self) -> usize {
        match self {
            Geometry::Planar => 1,
            Geometry::Axisymmetric => 2,
        }
    }

    /// `ω_n`, the area of the unit sphere `S^n`.
    pub fn sphere_area(self) -> f64 {
        match self {
            Geometry::Planar => 2.0 * PI,
            Geometry::Axisymmetric => 4.0 * PI,
        }
    }

    /// Number of coordinates of a center: the plane, or the symmetry axis.
    pub fn center_dim(self) -> usize {
        match self {
            Geometry::Planar => 2,
            Geometry::Axisymmetric => 1,
        }
    }
}

/// Grid, quadrature weights and differentiation plans, shared by states.
pub struct Grid<T: Real> {
    geometry: Geometry,
    angles: Vec<T>,
    /// Quadrature weights on `S^n`; they sum to `ω_n`.
    weights: Vec<T>,
    /// Unit directions paired with a center: `(cos θ, sin θ)` or `cos φ`.
    dirs: Vec<[T; 2]>,
    cot: Vec<T>,
    step: T,
    fft: Option<(Arc<dyn Fft<T>>, Arc<dyn Fft<T>>)>,
}

impl<T: Real> std::fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid").field("geometry", &self.geometry).field("n", &self.angles.len()).finish()
    }
}

/// Fejér's first rule on the cell-centred polar grid: `∫₀^π g(φ) sin φ dφ`
/// is integrated exactly for `g` a polynomial of degree `< N` in `cos φ`.
fn fejer_weights(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let phi = (j as f64 + 0.5) * PI / n as f64;
            let s: f64 = (1..=n / 2).map(|k| (2.0 * k as f64 * phi).cos() / (4.0 * (k * k) as f64 - 1.0)).sum();
            2.0 / n as f64 * (1.0 - 2.0 * s)
        })
        .collect()
}

impl<T: Real> Grid<T> {
    pub fn new(geometry: Geometry, n: usize) -> Result<Arc<Self>> {
        if n < 8 {
            return Err(Error::Parameter(format!("grid needs at least 8 nodes, got {n}")));
        }
        let g = match geometry {
            Geometry::Planar => {
                let step = 2.0 * PI / n as f64;
                let angles: Vec<f64> = (0..n).map(|j| j as f64 * step).collect();
                let mut planner = FftPlanner::new();
                Grid {
                    geometry,
                    dirs: angles.iter().map(|&a| [T::c(a.cos()), T::c(a.sin())]).collect(),
                    angles: angles.iter().map(|&a| T::c(a)).collect(),
                    weights: vec![T::c(step); n],
                    cot: Vec::new(),
                    step: T::c(step),
                    fft: Some((planner.plan_fft_forward(n), planner.plan_fft_inverse(n))),
                }
            }
            Geometry::Axisymmetric => {
                let step = PI / n as f64;
                let angles: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * step).collect();
                Grid {
                    geometry,
                    dirs: angles.iter().map(|&a| [T::c(a.cos()), T::zero()]).collect(),
                    cot: angles.iter().map(|&a| T::c(a.cos() / a.sin())).collect(),
                    angles: angles.iter().map(|&a| T::c(a)).collect(),
                    weights: fejer_weights(n).into_iter().map(|w| T::c(2.0 * PI * w)).collect(),
                    step: T::c(step),
                    fft: None,
                }
            }
        };
        Ok(Arc::new(g))
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Angular spacing `Δ`.
    pub fn step(&self) -> T {
        self.step
    }

    /// `∫_{S^n} g dθ` by the grid quadrature.
    pub fn integrate(&self, g: impl Fn(usize) -> T) -> T {
        self.weights.iter().enumerate().map(|(j, &w)| w * g(j)).sum()
    }

    /// `⟨z, θ_j⟩` for a center `z` of [`Geometry::center_dim`] coordinates.
    pub fn pairing(&self, z: &[T], j: usize) -> T {
        match self.geometry {
            Geometry::Planar => z[0] * self.dirs[j][0] + z[1] * self.dirs[j][1],
            Geometry::Axisymmetric => z[0] * self.dirs[j][0],
        }
    }

    /// Direction components paired with center coordinates.
    pub fn direction(&self, j: usize) -> &[T] {
        &self.dirs[j][..self.geometry.center_dim()]
    }

    /// `(u_θ, u_θθ)`: spectral on the circle, fourth-order central
    /// differences with even reflection at the poles otherwise.
    pub fn derivatives(&self, u: &[T]) -> (Vec<T>, Vec<T>) {
        let n = u.len();
        match &self.fft {
            Some((fwd, inv)) => {
                let mut buf: Vec<Complex<T>> = u.iter().map(|&x| Complex::new(x, T::zero())).collect();
                fwd.process(&mut buf);
                let mut d1 = buf.clone();
                let scale = T::one() / T::of(n);
                for k in 0..n {
                    let m = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                    let m = T::c(m);
                    let odd = if n % 2 == 0 && k == n / 2 { T::zero() } else { m };
                    let c = buf[k];
                    d1[k] = Complex::new(-c.im * odd, c.re * odd) * scale;
                    buf[k] = c * (-(m * m) * scale);
                }
                inv.process(&mut d1);
                inv.process(&mut buf);
                (d1.iter().map(|c| c.re).collect(), buf.iter().map(|c| c.re).collect())
            }
            None => {
                let at = |i: isize| -> T {
                    let i = if i < 0 {
                        -i - 1
                    } else if i >= n as isize {
                        2 * n as isize - i - 1
                    } else {
                        i
                    };
                    u[i as usize]
                };
                let h = self.step;
                let (c8, c12, c16, c30) = (T::c(8.0), T::c(12.0), T::c(16.0), T::c(30.0));
                let mut d1 = vec![T::zero(); n];
                let mut d2 = vec![T::zero(); n];
                for j in 0..n {
                    let i = j as isize;
                    let (m2, m1, p1, p2) = (at(i - 2), at(i - 1), at(i + 1), at(i + 2));
                    d1[j] = (-p2 + c8 * p1 - c8 * m1 + m2) / (c12 * h);
                    d2[j] = (-p2 + c16 * p1 - c30 * u[j] + c16 * m1 - m2) / (c12 * h * h);
                }
                (d1, d2)
            }
        }
    }
}

/// Principal radii and curvatures per node, node-major with `n` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField<T> {
    pub n: usize,
    /// Radii `r_i`, descending within a node.
    pub radii: Vec<T>,
    /// `λ_i = 1/r_i`, ascending within a node.
    pub lambda: Vec<T>,
}

impl<T: Real> CurvatureField<T> {
    pub fn nodes(&self) -> usize {
        self.lambda.len() / self.n
    }

    pub fn node_lambda(&self, j: usize) -> &[T] {
        &self.lambda[j * self.n..(j + 1) * self.n]
    }

    pub fn node_radii(&self, j: usize) -> &[T] {
        &self.radii[j * self.n..(j + 1) * self.n]
    }

    /// `Π r_i`, the density of `dμ` with respect to `dθ`.
    pub fn jacobian(&self, j: usize) -> T {
        self.node_radii(j).iter().copied().fold(T::one(), |p, r| p * r)
    }
}

/// Support function of a convex body on a Gauss-map grid at time `t`.
#[derive(Debug, Clone)]
pub struct SupportState<T: Real> {
    grid: Arc<Grid<T>>,
    pub u: Vec<T>,
    pub t: T,
}

impl<T: Real> SupportState<T> {
    pub fn new(grid: Arc<Grid<T>>, u: Vec<T>, t: T) -> Result<Self> {
        if u.len() != grid.len() {
            return Err(Error::Shape(format!("grid has {} nodes, u has {}", grid.len(), u.len())));
        }
        if let Some(j) = u.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { node: j });
        }
        Ok(Self { grid, u, t })
    }

    /// Sample `u` from a function of the grid angle.
    pub fn from_fn(geometry: Geometry, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = Grid::<T>::new(geometry, n)?;
        let u = grid.angles().iter().map(|&a: &T| T::c(f(a.f64()))).collect();
        Self::new(grid, u, T::zero())
    }

    /// Sphere (or circle) of radius `r` centred at the origin.
    pub fn sphere(geometry: Geometry, n: usize, r: f64) -> Result<Self> {
        Self::from_fn(geometry, n, |_| r)
    }

    /// Planar ellipse with semi-axes `a` along `x` and `b` along `y`.
    pub fn ellipse(n: usize, a: f64, b: f64) -> Result<Self> {
        Self::from_fn(Geometry::Planar, n, |t| (a * a * t.cos().powi(2) + b * b * t.sin().powi(2)).sqrt())
    }

    /// Spheroid with semi-axis `a` along the symmetry axis and equatorial
    /// radius `b`.
    pub fn spheroid(n: usize, a: f64, b: f64) -> Result<Self> {
        Self::from_fn(Geometry::Axisymmetric, n, |p| (a * a * p.cos().powi(2) + b * b * p.sin().powi(2)).sqrt())
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn geometry(&self) -> Geometry {
        self.grid.geometry()
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn with_u(&self, u: Vec<T>, t: T) -> Self {
        Self { grid: self.grid.clone(), u, t }
    }

    /// Support function of the body translated by `z`: `u + ⟨z, θ⟩`.
    pub fn translated(&self, z: &[T]) -> Self {
        let u = (0..self.len()).map(|j| self.u[j] + self.grid.pairing(z, j)).collect();
        self.with_u(u, self.t)
    }

    /// Support function of the body scaled by `c` about the origin.
    pub fn scaled(&self, c: T) -> Self {
        self.with_u(self.u.iter().map(|&x| c * x).collect(), self.t)
    }

    /// Principal radii `u_θθ + u` (and `u_φ cot φ + u`), failing at the
    /// first node where a radius is not positive.
    pub fn curvature_radii(&self) -> Result<CurvatureField<T>> {
        let (d1, d2) = self.grid.derivatives(&self.u);
        let n = self.geometry().dim();
        let len = self.len();
        let mut radii = Vec::with_capacity(n * len);
        let mut lambda = Vec::with_capacity(n * len);
        for j in 0..len {
            let r1 = d2[j] + self.u[j];
            let r2 = if n == 2 { d1[j] * self.grid.cot[j] + self.u[j] } else { r1 };
            for r in [r1, r2].into_iter().take(n) {
                if !r.is_finite() {
                    return Err(Error::NonFinite { node: j });
                }
                if r <= T::zero() {
                    return Err(Error::ConvexityLoss { node: j, radius: r.f64() });
                }
            }
            if n == 1 {
                radii.push(r1);
                lambda.push(T::one() / r1);
            } else {
                let (big, small) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
                radii.extend([big, small]);
                lambda.extend([T::one() / big, T::one() / small]);
            }
        }
        Ok(CurvatureField { n, radii, lambda })
    }

    /// Enclosed area or volume `(1/(n+1)) ∫ u Π r_i dθ`.
    pub fn body_volume(&self) -> Result<T> {
        let c = self.curvature_radii()?;
        Ok(self.volume_with(&c))
    }

    pub(crate) fn volume_with(&self, c: &CurvatureField<T>) -> T {
        let n = self.geometry().dim();
        self.grid.integrate(|j| self.u[j] * c.jacobian(j)) / T::of(n + 1)
    }

    /// Perimeter or surface area `∫ Π r_i dθ`.
    pub fn surface_measure(&self) -> Result<T> {
        let c = self.curvature_radii()?;
        Ok(self.grid.integrate(|j| c.jacobian(j)))
    }

    /// Steiner point `((n+1)/ω_n) ∫ u θ dθ` in center coordinates.
    pub fn steiner_point(&self) -> Vec<T> {
        let g = &self.grid;
        let c = T::c((g.geometry().dim() + 1) as f64 / g.geometry().sphere_area());
        (0..g.geometry().center_dim()).map(|a| c * g.integrate(|j| self.u[j] * g.direction(j)[a])).collect()
    }
}
