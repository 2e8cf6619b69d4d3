//! Cotangent Laplace–Beltrami operator and mean curvature flow steps.

use serde::{Deserialize, Serialize};

use super::mesh::{gram_area, MeshImmersion};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::real::Real;

/// Cotangent weights `cot α + cot β` aligned with each vertex ring, and
/// mixed Voronoi areas.
#[derive(Debug, Clone)]
pub struct CotanLaplacian<T> {
    pub areas: Vec<T>,
    pub weights: Vec<Vec<T>>,
}

impl<T: Real> CotanLaplacian<T> {
    pub fn new(mesh: &MeshImmersion<T>) -> Result<Self> {
        let nv = mesh.vertex_count();
        let mut areas = vec![T::zero(); nv];
        let mut weights: Vec<Vec<T>> = (0..nv).map(|v| vec![T::zero(); mesh.ring(v).len()]).collect();
        let scale = mesh.area();
        let slot = |a: usize, b: usize| mesh.ring(a).binary_search(&b).expect("edge of a face is in the ring");
        for (fi, f) in mesh.faces().iter().enumerate() {
            let area = mesh.face_area(fi);
            if !(area > T::c(1e-14) * scale) {
                return Err(Error::Mesh(format!("face {fi} is degenerate (area {area})")));
            }
            let mut cot = [T::zero(); 3];
            let mut sq = [T::zero(); 3];
            for c in 0..3 {
                let (p, a, b) = (f[c], f[(c + 1) % 3], f[(c + 2) % 3]);
                let (ea, eb) = (mesh.diff(a, p), mesh.diff(b, p));
                cot[c] = dot(&ea, &eb) / (T::c(2.0) * gram_area(&ea, &eb));
                let opp = mesh.diff(a, b);
                sq[c] = dot(&opp, &opp);
            }
            for c in 0..3 {
                let (a, b) = (f[(c + 1) % 3], f[(c + 2) % 3]);
                let (sa, sb) = (slot(a, b), slot(b, a));
                weights[a][sa] += cot[c];
                weights[b][sb] += cot[c];
            }
            let obtuse = (0..3).find(|&c| cot[c] < T::zero());
            for c in 0..3 {
                let p = f[c];
                areas[p] += match obtuse {
                    None => {
                        // Voronoi region: (|PQ|² cot R + |PR|² cot Q)/8.
                        let (q, r) = ((c + 1) % 3, (c + 2) % 3);
                        (sq[r] * cot[r] + sq[q] * cot[q]) / T::c(8.0)
                    }
                    Some(o) if o == c => area / T::c(2.0),
                    Some(_) => area / T::c(4.0),
                };
            }
        }
        Ok(Self { areas, weights })
    }

    /// `(Δf)_i = (1/(2A_i)) Σ_j w_ij (f_j − f_i)` for vector data with
    /// `dim` components per vertex.
    pub fn apply(&self, mesh: &MeshImmersion<T>, f: &[T], dim: usize) -> Vec<T> {
        let mut out = vec![T::zero(); f.len()];
        for v in 0..self.areas.len() {
            let c = T::one() / (T::c(2.0) * self.areas[v]);
            for (&w, &u) in self.weights[v].iter().zip(mesh.ring(v)) {
                for a in 0..dim {
                    out[v * dim + a] += c * w * (f[u * dim + a] - f[v * dim + a]);
                }
            }
        }
        out
    }
}

/// `H⃗ = Δ_M φ` at every vertex, vertex-major with `m` components.
pub fn mean_curvature_vector<T: Real>(mesh: &MeshImmersion<T>) -> Result<Vec<T>> {
    let lap = CotanLaplacian::new(mesh)?;
    Ok(lap.apply(mesh, &mesh.positions, mesh.ambient_dim()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshScheme {
    /// `φ ← φ + dt·H⃗`, stable for `dt ≤ (min edge)²/4`.
    Explicit,
    /// `(A + dt·K) φ' = A φ` with the Laplacian frozen at the current mesh.
    SemiImplicit,
}

/// Faces whose longest edge squared exceeds this multiple of twice their
/// area end the run.
pub const MAX_ASPECT_RATIO: f64 = 25.0;

/// One mean curvature flow step.
pub fn mcf_step<T: Real>(mesh: &MeshImmersion<T>, dt: T, scheme: MeshScheme) -> Result<MeshImmersion<T>> {
    let limit = mesh.min_edge().powi(2) / T::c(4.0);
    if !(dt > T::zero()) || (scheme == MeshScheme::Explicit && dt > limit) {
        return Err(Error::Parameter(format!("dt = {dt} outside (0, (min edge)²/4 = {limit}]")));
    }
    let aspect = mesh.max_aspect_ratio();
    if aspect > T::c(MAX_ASPECT_RATIO) {
        return Err(Error::Mesh(format!("mesh quality collapsed (aspect ratio {aspect}); remesh or stop the run")));
    }
    let lap = CotanLaplacian::new(mesh)?;
    let m = mesh.ambient_dim();
    let next = match scheme {
        MeshScheme::Explicit => {
            let h = lap.apply(mesh, &mesh.positions, m);
            mesh.positions.iter().zip(&h).map(|(&x, &hx)| x + dt * hx).collect()
        }
        MeshScheme::SemiImplicit => semi_implicit(mesh, &lap, dt)?,
    };
    mesh.with_positions(next)
}

/// Conjugate gradients on `(A + dt·K) x = A x₀`, one coordinate at a time;
/// `K x = −A Δx` is symmetric.
fn semi_implicit<T: Real>(mesh: &MeshImmersion<T>, lap: &CotanLaplacian<T>, dt: T) -> Result<Vec<T>> {
    let nv = mesh.vertex_count();
    let m = mesh.ambient_dim();
    let half = T::c(0.5);
    let op = |x: &[T]| -> Vec<T> {
        (0..nv)
            .map(|v| {
                let k: T = lap.weights[v].iter().zip(mesh.ring(v)).map(|(&w, &u)| half * w * (x[v] - x[u])).sum();
                lap.areas[v] * x[v] + dt * k
            })
            .collect()
    };
    let mut out = mesh.positions.clone();
    for a in 0..m {
        let x0: Vec<T> = (0..nv).map(|v| mesh.positions[v * m + a]).collect();
        let b: Vec<T> = (0..nv).map(|v| lap.areas[v] * x0[v]).collect();
        let mut x = x0.clone();
        let ax = op(&x);
        let mut r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        let target = (T::epsilon() * T::c(10.0)).powi(2) * dot(&b, &b).max(T::min_positive_value());
        let mut iters = 0;
        while rr > target {
            if iters >= 10 * nv {
                return Err(Error::NonConvergence { what: "semi-implicit solve".into(), best: rr.sqrt().f64() });
            }
            let ap = op(&p);
            let alpha = rr / dot(&p, &ap);
            for i in 0..nv {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            for i in 0..nv {
                p[i] = r[i] + beta * p[i];
            }
            rr = rr_new;
            iters += 1;
        }
        for v in 0..nv {
            out[v * m + a] = x[v];
        }
    }
    Ok(out)
}
