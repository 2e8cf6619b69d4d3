//! Graph-geodesic diameter estimates.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::mesh::MeshImmersion;
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::real::Real;

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Mesh edges plus the segment joining the two apexes across every edge,
/// weighted by Euclidean length. The extra chords shorten the zig-zag of
/// edge paths across the triangle strip.
fn graph<T: Real>(mesh: &MeshImmersion<T>) -> Vec<Vec<(usize, f64)>> {
    let nv = mesh.vertex_count();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nv];
    let mut apex = std::collections::HashMap::with_capacity(3 * mesh.faces().len());
    let len = |a: usize, b: usize| norm(&mesh.diff(a, b)).f64();
    for f in mesh.faces() {
        for e in 0..3 {
            let (a, b, c) = (f[e], f[(e + 1) % 3], f[(e + 2) % 3]);
            apex.insert((a, b), c);
        }
    }
    for v in 0..nv {
        for &u in mesh.ring(v) {
            adj[v].push((u, len(v, u)));
        }
    }
    for (&(a, b), &c) in &apex {
        if a < b {
            if let Some(&d) = apex.get(&(b, a)) {
                let l = len(c, d);
                adj[c].push((d, l));
                adj[d].push((c, l));
            }
        }
    }
    adj
}

fn dijkstra(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Entry(0.0, src));
    while let Some(Entry(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(u, w) in &adj[v] {
            let nd = d + w;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(Entry(nd, u));
            }
        }
    }
    dist
}

/// Largest shortest-path distance found from a sample of sources: repeated
/// farthest-point sweeps plus evenly strided vertices.
pub fn intrinsic_diameter<T: Real>(mesh: &MeshImmersion<T>) -> Result<f64> {
    if !mesh.is_connected() {
        return Err(Error::Mesh("mesh is disconnected; the diameter is infinite".into()));
    }
    let adj = graph(mesh);
    let nv = adj.len();
    let mut best = 0.0f64;
    let far = |src: usize, best: &mut f64| -> usize {
        let d = dijkstra(&adj, src);
        let (i, &m) = d.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
        *best = best.max(m);
        i
    };
    let mut src = 0;
    for _ in 0..4 {
        src = far(src, &mut best);
    }
    let stride = (nv / 8).max(1);
    for s in (0..nv).step_by(stride) {
        far(s, &mut best);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::super::mesh::icosphere;
    use super::*;

    #[test]
    fn sphere_diameter_is_half_circumference() {
        for r in [1.0, 2.0] {
            let s = icosphere::<f64>(4, r, 4).unwrap();
            let d = intrinsic_diameter(&s).unwrap();
            let want = std::f64::consts::PI * r;
            assert!((d - want).abs() / want < 0.05, "{d} vs {want}");
        }
    }

    #[test]
    fn disconnected_mesh_is_an_error() {
        let a = icosphere::<f64>(0, 1.0, 3).unwrap();
        let mut pos = a.positions.clone();
        pos.extend(a.positions.iter().map(|x| x + 5.0));
        let mut faces = a.faces().to_vec();
        faces.extend(a.faces().iter().map(|f| [f[0] + 12, f[1] + 12, f[2] + 12]));
        let two = MeshImmersion::new(3, pos, faces).unwrap();
        assert!(intrinsic_diameter(&two).is_err());
    }
}
