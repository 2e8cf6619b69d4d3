//! Closed triangle meshes immersed in `R^m`, fixtures and text IO.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::real::Real;

/// A closed oriented triangle mesh with vertices in `R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshImmersion<T> {
    m: usize,
    /// Vertex-major coordinates, `m` per vertex.
    pub positions: Vec<T>,
    faces: Vec<[usize; 3]>,
    /// Sorted one-ring of every vertex.
    rings: Vec<Vec<usize>>,
}

impl<T: Real> MeshImmersion<T> {
    /// Checks that every edge is shared by exactly two consistently
    /// oriented faces and that every vertex is used.
    pub fn new(m: usize, positions: Vec<T>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if m < 3 {
            return Err(Error::Mesh(format!("ambient dimension {m} must be at least 3")));
        }
        if positions.len() % m != 0 {
            return Err(Error::Mesh(format!("{} coordinates do not split into rows of {m}", positions.len())));
        }
        let nv = positions.len() / m;
        if let Some(i) = positions.iter().position(|x| !x.is_finite()) {
            return Err(Error::Mesh(format!("non-finite coordinate at vertex {}", i / m)));
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * faces.len());
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v >= nv) || f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::Mesh(format!("face {fi} {f:?} is invalid for {nv} vertices")));
            }
            for e in 0..3 {
                let key = (f[e], f[(e + 1) % 3]);
                if directed.insert(key, fi).is_some() {
                    return Err(Error::Mesh(format!("directed edge {key:?} appears twice (orientation or non-manifold)")));
                }
            }
        }
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) {
                return Err(Error::Mesh(format!("edge ({a}, {b}) lies on a boundary; the mesh must be closed")));
            }
        }
        let mut rings = vec![Vec::new(); nv];
        for &(a, b) in directed.keys() {
            rings[a].push(b);
        }
        for (v, r) in rings.iter_mut().enumerate() {
            if r.is_empty() {
                return Err(Error::Mesh(format!("vertex {v} belongs to no face")));
            }
            r.sort_unstable();
        }
        Ok(Self { m, positions, faces, rings })
    }

    /// Ambient dimension `m`.
    pub fn ambient_dim(&self) -> usize {
        self.m
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len() / self.m
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn ring(&self, v: usize) -> &[usize] {
        &self.rings[v]
    }

    pub fn vertex(&self, v: usize) -> &[T] {
        &self.positions[v * self.m..(v + 1) * self.m]
    }

    pub fn edge_count(&self) -> usize {
        self.rings.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.faces.len() as i64
    }

    /// Same connectivity, new coordinates.
    pub fn with_positions(&self, positions: Vec<T>) -> Result<Self> {
        if positions.len() != self.positions.len() {
            return Err(Error::Shape(format!("expected {} coordinates, got {}", self.positions.len(), positions.len())));
        }
        if let Some(i) = positions.iter().position(|x| !x.is_finite()) {
            return Err(Error::Mesh(format!("non-finite coordinate at vertex {}", i / self.m)));
        }
        Ok(Self { m: self.m, positions, faces: self.faces.clone(), rings: self.rings.clone() })
    }

    pub(crate) fn diff(&self, a: usize, b: usize) -> Vec<T> {
        self.vertex(a).iter().zip(self.vertex(b)).map(|(&x, &y)| x - y).collect()
    }

    /// Area of face `f` from the Gram determinant of two edges.
    pub fn face_area(&self, f: usize) -> T {
        let [a, b, c] = self.faces[f];
        let (e1, e2) = (self.diff(b, a), self.diff(c, a));
        gram_area(&e1, &e2)
    }

    pub fn area(&self) -> T {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn min_edge(&self) -> T {
        let mut min = T::infinity();
        for (a, r) in self.rings.iter().enumerate() {
            for &b in r {
                if a < b {
                    min = min.min(crate::linalg::norm(&self.diff(a, b)));
                }
            }
        }
        min
    }

    /// Largest `longest edge² / (2·area)` over faces; `2/√3` for equilateral
    /// triangles.
    pub fn max_aspect_ratio(&self) -> T {
        let mut worst = T::zero();
        for (fi, f) in self.faces.iter().enumerate() {
            let mut long = T::zero();
            for e in 0..3 {
                long = long.max(crate::linalg::dot(&self.diff(f[e], f[(e + 1) % 3]), &self.diff(f[e], f[(e + 1) % 3])));
            }
            worst = worst.max(long / (T::c(2.0) * self.face_area(fi)));
        }
        worst
    }

    pub fn centroid(&self) -> Vec<T> {
        let nv = T::of(self.vertex_count());
        (0..self.m).map(|a| (0..self.vertex_count()).map(|v| self.vertex(v)[a]).sum::<T>() / nv).collect()
    }

    /// Mean distance of the vertices from their centroid.
    pub fn mean_radius(&self) -> T {
        let c = self.centroid();
        let s: T = (0..self.vertex_count())
            .map(|v| self.vertex(v).iter().zip(&c).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt())
            .sum();
        s / T::of(self.vertex_count())
    }

    /// Vertices reachable from vertex 0 equal all vertices.
    pub fn is_connected(&self) -> bool {
        let nv = self.vertex_count();
        let mut seen = vec![false; nv];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.rings[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == nv
    }

    /// Applies the orthogonal matrix `q` (row-major `m×m`) and translation.
    pub fn transformed(&self, q: &[T], shift: &[T]) -> Result<Self> {
        let m = self.m;
        if q.len() != m * m || shift.len() != m {
            return Err(Error::Shape("rigid motion does not match the ambient dimension".into()));
        }
        let mut p = Vec::with_capacity(self.positions.len());
        for v in 0..self.vertex_count() {
            let x = self.vertex(v);
            for a in 0..m {
                p.push((0..m).map(|b| q[a * m + b] * x[b]).sum::<T>() + shift[a]);
            }
        }
        self.with_positions(p)
    }
}

/// `√(|a|²|b|² − (a·b)²)/2`, valid in any dimension.
pub(crate) fn gram_area<T: Real>(a: &[T], b: &[T]) -> T {
    let (aa, bb, ab) = (crate::linalg::dot(a, a), crate::linalg::dot(b, b), crate::linalg::dot(a, b));
    (aa * bb - ab * ab).max(T::zero()).sqrt() * T::c(0.5)
}

/// Icosphere of radius `r` with `subdivisions` loop-style refinements,
/// vertices projected to the sphere and padded with zeros to `R^m`.
/// Four subdivisions give 2562 vertices.
pub fn icosphere<T: Real>(subdivisions: usize, r: f64, m: usize) -> Result<MeshImmersion<T>> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let unit = |p: [f64; 3]| {
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        [p[0] / n, p[1] / n, p[2] / n]
    };
    for v in verts.iter_mut() {
        *v = unit(*v);
    }
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let (p, q) = (verts[a], verts[b]);
                verts.push(unit([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                verts.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let mut positions = Vec::with_capacity(verts.len() * m);
    for v in &verts {
        for a in 0..m {
            positions.push(T::c(if a < 3 { r * v[a] } else { 0.0 }));
        }
    }
    MeshImmersion::new(m, positions, faces)
}

/// Unit icosphere in `R³ ⊂ R⁴` with the bump `amplitude·P₂(z)` in the
/// fourth coordinate, `P₂(z) = (3z² − 1)/2`.
pub fn perturbed_icosphere<T: Real>(subdivisions: usize, amplitude: f64) -> Result<MeshImmersion<T>> {
    let mut mesh = icosphere::<T>(subdivisions, 1.0, 4)?;
    for v in 0..mesh.vertex_count() {
        let z = mesh.positions[4 * v + 2].f64();
        mesh.positions[4 * v + 3] = T::c(amplitude * (3.0 * z * z - 1.0) / 2.0);
    }
    Ok(mesh)
}

/// Torus of revolution with radii `big > small` in `R³ ⊂ R^m`, on a
/// `nu × nv` grid.
pub fn torus<T: Real>(big: f64, small: f64, nu: usize, nv: usize, m: usize) -> Result<MeshImmersion<T>> {
    if !(big > small && small > 0.0) || nu < 3 || nv < 3 {
        return Err(Error::Parameter("torus needs big > small > 0 and at least 3 cells each way".into()));
    }
    let mut positions = Vec::with_capacity(nu * nv * m);
    for i in 0..nu {
        let u = 2.0 * std::f64::consts::PI * i as f64 / nu as f64;
        for j in 0..nv {
            let w = 2.0 * std::f64::consts::PI * j as f64 / nv as f64;
            let rho = big + small * w.cos();
            let p = [rho * u.cos(), rho * u.sin(), small * w.sin()];
            for a in 0..m {
                positions.push(T::c(if a < 3 { p[a] } else { 0.0 }));
            }
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    MeshImmersion::new(m, positions, faces)
}

/// Writes `dim m`, then `V F`, vertex rows of `m` coordinates and face rows
/// `3 a b c`.
pub fn write_mesh<T: Real>(mesh: &MeshImmersion<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dim {}", mesh.m);
    let _ = writeln!(out, "{} {}", mesh.vertex_count(), mesh.faces.len());
    for v in 0..mesh.vertex_count() {
        let row: Vec<String> = mesh.vertex(v).iter().map(|x| format!("{:.16e}", x.f64())).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out
}

pub fn read_mesh<T: Real>(text: &str) -> Result<MeshImmersion<T>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let bad = |m: String| Error::Mesh(m);
    let header = lines.next().ok_or_else(|| bad("empty mesh file".into()))?;
    let m: usize = header
        .strip_prefix("dim ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| bad(format!("expected `dim m`, found `{header}`")))?;
    let counts = lines.next().ok_or_else(|| bad("missing vertex and face counts".into()))?;
    let nums: Vec<usize> = counts.split_whitespace().map(|s| s.parse()).collect::<Result<_, _>>().map_err(|_| {
        bad(format!("bad counts line `{counts}`"))
    })?;
    let [nv, nf] = nums[..] else {
        return Err(bad(format!("bad counts line `{counts}`")));
    };
    let mut positions = Vec::with_capacity(nv * m);
    for v in 0..nv {
        let line = lines.next().ok_or_else(|| bad(format!("missing vertex {v}")))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(format!("bad vertex row {v}")))?;
        if row.len() != m {
            return Err(bad(format!("vertex {v} has {} coordinates, expected {m}", row.len())));
        }
        positions.extend(row.into_iter().map(T::c));
    }
    let mut faces = Vec::with_capacity(nf);
    for f in 0..nf {
        let line = lines.next().ok_or_else(|| bad(format!("missing face {f}")))?;
        let row: Vec<usize> = line
            .split_whitespace()
            .map(|s| s.parse())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(format!("bad face row {f}")))?;
        match row[..] {
            [3, a, b, c] => faces.push([a, b, c]),
            _ => return Err(bad(format!("face {f} is not a triangle row `3 a b c`"))),
        }
    }
    MeshImmersion::new(m, positions, faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts() {
        let s = icosphere::<f64>(4, 1.0, 4).unwrap();
        assert_eq!(s.vertex_count(), 2562);
        assert_eq!(s.faces().len(), 5120);
        assert_eq!(s.euler_characteristic(), 2);
        assert!(s.is_connected());
        let area = s.area();
        assert!((area - 4.0 * std::f64::consts::PI).abs() / (4.0 * std::f64::consts::PI) < 3e-3);
    }

    #[test]
    fn torus_is_closed_genus_one() {
        let t = torus::<f64>(1.0, 0.6, 24, 16, 4).unwrap();
        assert_eq!(t.euler_characteristic(), 0);
    }

    #[test]
    fn open_mesh_is_rejected() {
        let p = vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        assert!(MeshImmersion::<f64>::new(3, p, vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let s = perturbed_icosphere::<f64>(1, 0.05).unwrap();
        let text = write_mesh(&s);
        assert!(text.starts_with("dim 4\n42 80\n"));
        let back = read_mesh::<f64>(&text).unwrap();
        assert_eq!(back, s);
        assert!(read_mesh::<f64>("dim 4\n1 0\n0 0 0\n").is_err());
    }
}
