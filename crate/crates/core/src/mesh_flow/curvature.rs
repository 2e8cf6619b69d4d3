//! Second fundamental form estimation by local quadric fits, and the
//! pinching monitors built on it.

use rayon::prelude::*;
use serde::Serialize;

use super::laplacian::CotanLaplacian;
use super::mesh::MeshImmersion;
use crate::curvature_algebra::SecondFundamentalForm;
use crate::error::{Error, Result};
use crate::linalg::{dot, gram_schmidt, least_squares, norm, symmetric_eigen};
use crate::real::Real;

/// Fitted second fundamental form at one vertex with its frames.
#[derive(Debug, Clone)]
pub struct VertexFit<T> {
    pub h: SecondFundamentalForm<T>,
    pub tangent: [Vec<T>; 2],
    pub normals: Vec<Vec<T>>,
    /// RMS fit residual over the stencil.
    pub residual: T,
}

fn two_ring<T: Real>(mesh: &MeshImmersion<T>, v: usize) -> Vec<usize> {
    let mut out: Vec<usize> = mesh.ring(v).to_vec();
    for &u in mesh.ring(v) {
        out.extend(mesh.ring(u).iter().copied());
    }
    out.sort_unstable();
    out.dedup();
    out.retain(|&u| u != v);
    out
}

const COLS: usize = 9;

fn monomials<T: Real>(s: T, t: T) -> [T; COLS] {
    let half = T::c(0.5);
    [s, t, half * s * s, s * t, half * t * t, s * s * s, s * s * t, s * t * t, t * t * t]
}

fn complete_frame<T: Real>(tangent: &[Vec<T>; 2], m: usize) -> Option<([Vec<T>; 2], Vec<Vec<T>>)> {
    let mut basis = vec![tangent[0].clone(), tangent[1].clone()];
    for a in 0..m {
        let mut e = vec![T::zero(); m];
        e[a] = T::one();
        basis.push(e);
    }
    gram_schmidt(&mut basis, T::c(1e-6));
    if basis.len() != m {
        return None;
    }
    let normals = basis.split_off(2);
    let t1 = basis.pop()?;
    let t0 = basis.pop()?;
    Some(([t0, t1], normals))
}

/// `h_{ijα}` at `v` from a cubic least-squares fit of the normal offsets
/// of the 2-ring over tangent coordinates. The tangent plane starts from
/// the principal directions of the one-ring edges and is tilted by the
/// fitted gradients until they vanish.
pub fn estimate_h<T: Real>(mesh: &MeshImmersion<T>, v: usize) -> Result<VertexFit<T>> {
    let m = mesh.ambient_dim();
    let stencil = two_ring(mesh, v);
    if stencil.len() < COLS.max(6) {
        return Err(Error::Precondition(format!("vertex {v}: 2-ring has {} vertices", stencil.len())));
    }
    let offsets: Vec<Vec<T>> = stencil.iter().map(|&u| mesh.diff(u, v)).collect();
    let mut cov = vec![T::zero(); m * m];
    for &u in mesh.ring(v) {
        let d = mesh.diff(u, v);
        for a in 0..m {
            for b in 0..m {
                cov[a * m + b] += d[a] * d[b];
            }
        }
    }
    let (_, vecs) = symmetric_eigen(&mut cov, m);
    let (mut tangent, mut normals) = complete_frame(&[vecs[0].clone(), vecs[1].clone()], m)
        .ok_or_else(|| Error::Fit(format!("vertex {v}: degenerate one-ring")))?;
    let rows = offsets.len();
    let k = m - 2;
    let mut coef = vec![vec![T::zero(); COLS]; k];
    let mut residual = T::zero();
    for _ in 0..4 {
        let mut a = Vec::with_capacity(rows * COLS);
        for d in &offsets {
            a.extend(monomials(dot(d, &tangent[0]), dot(d, &tangent[1])));
        }
        let mut sq = T::zero();
        for (alpha, nu) in normals.iter().enumerate() {
            let w: Vec<T> = offsets.iter().map(|d| dot(d, nu)).collect();
            let c = least_squares(&a, rows, COLS, &w)
                .ok_or_else(|| Error::Fit(format!("vertex {v}: rank-deficient quadric fit")))?;
            for (r, wr) in w.iter().enumerate() {
                let pred: T = (0..COLS).map(|j| a[r * COLS + j] * c[j]).sum();
                sq += (pred - *wr) * (pred - *wr);
            }
            coef[alpha] = c;
        }
        residual = (sq / T::of(rows * k)).sqrt();
        let tilt = coef.iter().map(|c| c[0].abs().max(c[1].abs())).fold(T::zero(), T::max);
        if tilt <= T::epsilon() * T::c(100.0) {
            break;
        }
        let mut t0 = tangent[0].clone();
        let mut t1 = tangent[1].clone();
        for (c, nu) in coef.iter().zip(&normals) {
            for x in 0..m {
                t0[x] += c[0] * nu[x];
                t1[x] += c[1] * nu[x];
            }
        }
        let (t, n) = complete_frame(&[t0, t1], m).ok_or_else(|| Error::Fit(format!("vertex {v}: frame collapsed")))?;
        tangent = t;
        normals = n;
    }
    let h = SecondFundamentalForm::from_fn(2, k, |i, j, alpha| {
        let c = &coef[alpha];
        match (i, j) {
            (0, 0) => c[2],
            (1, 1) => c[4],
            _ => c[3],
        }
    });
    Ok(VertexFit { h, tangent, normals, residual })
}

/// Per-vertex invariants used by the integral monitors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexCurvature<T> {
    pub h_sq: T,
    pub mean_sq: T,
    /// Mixed Voronoi area.
    pub area: T,
    /// `|tr h − H⃗_Δ|/|H⃗_Δ|` against the cotangent Laplacian.
    pub trace_residual: T,
    /// The fit failed; the vertex is excluded from integrals.
    pub flagged: bool,
}

/// Fits every vertex in parallel.
pub fn vertex_curvatures<T: Real>(mesh: &MeshImmersion<T>) -> Result<Vec<VertexCurvature<T>>> {
    let lap = CotanLaplacian::new(mesh)?;
    let m = mesh.ambient_dim();
    let hvec = lap.apply(mesh, &mesh.positions, m);
    Ok((0..mesh.vertex_count())
        .into_par_iter()
        .map(|v| match estimate_h(mesh, v) {
            Ok(fit) => {
                let hm = fit.h.mean_curvature();
                let mut trace = vec![T::zero(); m];
                for (c, nu) in hm.iter().zip(&fit.normals) {
                    for x in 0..m {
                        trace[x] += *c * nu[x];
                    }
                }
                let lap_h = &hvec[v * m..(v + 1) * m];
                let diff: Vec<T> = trace.iter().zip(lap_h).map(|(&a, &b)| a - b).collect();
                VertexCurvature {
                    h_sq: fit.h.norm_sq(),
                    mean_sq: fit.h.mean_curvature_sq(),
                    area: lap.areas[v],
                    trace_residual: norm(&diff) / norm(lap_h),
                    flagged: false,
                }
            }
            Err(_) => VertexCurvature {
                h_sq: T::nan(),
                mean_sq: T::nan(),
                area: lap.areas[v],
                trace_residual: T::nan(),
                flagged: true,
            },
        })
        .collect())
}

/// `∫ f_σ^p dμ` with `f_σ = (|h|² − |H|²/n)/|H|^{2(1−σ)}` and the curvature
/// summary it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FsigmaIntegral {
    pub value: f64,
    pub sigma: f64,
    pub p: f64,
    pub area: f64,
    pub max_ratio: f64,
    pub max_h_sq: f64,
    pub flagged: usize,
    pub max_trace_residual: f64,
}

pub fn f_sigma_integral<T: Real>(mesh: &MeshImmersion<T>, sigma: f64, p: f64) -> Result<FsigmaIntegral> {
    let vc = vertex_curvatures(mesh)?;
    f_sigma_from(&vc, sigma, p)
}

pub fn f_sigma_from<T: Real>(vc: &[VertexCurvature<T>], sigma: f64, p: f64) -> Result<FsigmaIntegral> {
    if !(sigma >= 0.0 && sigma < 1.0 + 1e-12 && p > 0.0) {
        return Err(Error::Parameter(format!("need 0 <= sigma <= 1 and p > 0, got sigma = {sigma}, p = {p}")));
    }
    let mut out = FsigmaIntegral {
        value: 0.0,
        sigma,
        p,
        area: 0.0,
        max_ratio: 0.0,
        max_h_sq: 0.0,
        flagged: 0,
        max_trace_residual: 0.0,
    };
    for (v, c) in vc.iter().enumerate() {
        out.area += c.area.f64();
        if c.flagged {
            out.flagged += 1;
            continue;
        }
        let (hs, ms) = (c.h_sq.f64(), c.mean_sq.f64());
        if !(ms > 0.0) {
            return Err(Error::Degenerate(format!("|H| vanishes at vertex {v}")));
        }
        let f = ((hs - ms / 2.0) / ms.powf(1.0 - sigma)).max(0.0);
        out.value += c.area.f64() * f.powf(p);
        out.max_ratio = out.max_ratio.max(hs / ms);
        out.max_h_sq = out.max_h_sq.max(hs);
        out.max_trace_residual = out.max_trace_residual.max(c.trace_residual.f64());
    }
    Ok(out)
}

/// Largest `|h|²/|H⃗|²` against `C₀`; a vertex with `H⃗ = 0` reports an
/// infinite ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinchingCheck {
    pub max_ratio: f64,
    pub vertex: usize,
    pub max_h_sq: f64,
    pub c0: f64,
    pub violated: bool,
}

pub fn pinching_check<T: Real>(mesh: &MeshImmersion<T>, c0: f64) -> Result<PinchingCheck> {
    let vc = vertex_curvatures(mesh)?;
    Ok(pinching_from(&vc, c0))
}

pub fn pinching_from<T: Real>(vc: &[VertexCurvature<T>], c0: f64) -> PinchingCheck {
    let mut out = PinchingCheck { max_ratio: 0.0, vertex: 0, max_h_sq: 0.0, c0, violated: false };
    for (v, c) in vc.iter().enumerate().filter(|(_, c)| !c.flagged) {
        let (hs, ms) = (c.h_sq.f64(), c.mean_sq.f64());
        let ratio = if ms > 0.0 { hs / ms } else { f64::INFINITY };
        if ratio > out.max_ratio {
            out.max_ratio = ratio;
            out.vertex = v;
        }
        out.max_h_sq = out.max_h_sq.max(hs);
    }
    out.violated = !(out.max_ratio < c0);
    out
}
