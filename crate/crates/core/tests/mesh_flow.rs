use curvlab::mesh_flow::*;
use proptest::prelude::*;

/// Orthogonal `m×m` matrix from Gram–Schmidt on the rows of `a`.
fn orthogonal(m: usize, a: &[f64]) -> Vec<f64> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    for i in 0..m {
        let mut v = a[i * m..(i + 1) * m].to_vec();
        for u in &q {
            let d: f64 = v.iter().zip(u).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        q.push(v.into_iter().map(|x| x / n).collect());
    }
    q.concat()
}

#[test]
fn fixture_topology() {
    let s = icosphere::<f64>(3, 1.0, 3).unwrap();
    assert_eq!((s.vertex_count(), s.euler_characteristic()), (642, 2));
    assert!(s.is_connected());
    let t = torus::<f64>(2.0, 0.5, 32, 16, 4).unwrap();
    assert_eq!((t.vertex_count(), t.edge_count(), t.euler_characteristic()), (512, 1536, 0));
    assert_eq!(t.ambient_dim(), 4);
}

#[test]
fn mesh_text_round_trips_exactly() {
    let m = perturbed_icosphere::<f64>(2, 0.05).unwrap();
    let back: MeshImmersion<f64> = read_mesh(&write_mesh(&m)).unwrap();
    assert_eq!(back.faces(), m.faces());
    for v in 0..m.vertex_count() {
        assert_eq!(back.vertex(v), m.vertex(v));
    }
    assert!(read_mesh::<f64>("dim 3\n1 1\n0 0 0\n3 0 0 5\n").is_err());
    assert!(read_mesh::<f64>("3 1\n").is_err());
}

#[test]
fn sphere_curvature_in_higher_codimension() {
    let s = icosphere::<f64>(3, 2.0, 5).unwrap();
    for vc in vertex_curvatures(&s).unwrap() {
        assert!(!vc.flagged);
        assert!((vc.h_sq - 0.5).abs() < 0.05 * 0.5, "{}", vc.h_sq);
        assert!((vc.mean_sq - 1.0).abs() < 0.05, "{}", vc.mean_sq);
        assert!((vc.h_sq / vc.mean_sq - 0.5).abs() < 1e-3);
    }
    let hv = mean_curvature_vector(&s).unwrap();
    for v in 0..s.vertex_count() {
        // H⃗ = −(2/r) x/r.
        let x = s.vertex(v);
        for a in 0..5 {
            assert!((hv[v * 5 + a] + 0.5 * x[a]).abs() < 2e-2, "vertex {v}");
        }
    }
    // Graph geodesics overestimate slightly.
    let want = 2.0 * std::f64::consts::PI;
    assert!((intrinsic_diameter(&s).unwrap() - want).abs() < 0.02 * want);
}

#[test]
fn quadric_fit_converges_at_second_order_on_a_torus() {
    // Vertex 0 sits on the outer equator: κ = 1/r and 1/(R + r).
    let want = 2.0f64.powi(2) + 0.4f64.powi(2);
    let err: Vec<f64> = [(48, 24), (96, 48), (192, 96)]
        .iter()
        .map(|&(nu, nv)| {
            let t = torus::<f64>(2.0, 0.5, nu, nv, 3).unwrap();
            (estimate_h(&t, 0).unwrap().h.norm_sq() - want).abs()
        })
        .collect();
    for w in err.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.3, "{err:?}");
    }
    assert!(err[2] < 1e-2 * want);
}

#[test]
fn round_sphere_follows_the_shrinking_law() {
    let mut c = MeshRunConfig::new(MeshFixture::Icosphere { subdivisions: 2, radius: 1.0, ambient: 3 });
    c.record_every = 10;
    let run = mesh_run::<f64>(&c).unwrap();
    let last = run.records.last().unwrap();
    assert!(last.radius <= 0.5 * run.records[0].radius + 1e-12);
    // r² = 1 − 4t.
    for r in &run.records {
        assert!((r.radius.powi(2) - (1.0 - 4.0 * r.t)).abs() < 2e-2, "t = {}", r.t);
    }
    assert!(monitor_csv(&run.records).starts_with(MONITOR_HEADER));
}

#[test]
fn explicit_step_limit_is_enforced() {
    let s = icosphere::<f64>(1, 1.0, 3).unwrap();
    let limit = s.min_edge().powi(2) / 4.0;
    assert!(mcf_step(&s, 1.01 * limit, MeshScheme::Explicit).is_err());
    assert!(mcf_step(&s, 0.5 * limit, MeshScheme::Explicit).is_ok());
    assert!(mcf_step(&s, 4.0 * limit, MeshScheme::SemiImplicit).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn curvature_invariants_are_rigid_motion_invariant(a in prop::collection::vec(-1.0f64..1.0, 16), shift in prop::collection::vec(-5.0f64..5.0, 4)) {
        let m = perturbed_icosphere::<f64>(2, 0.05).unwrap();
        let q = orthogonal(4, &a);
        prop_assume!(q.iter().all(|x| x.is_finite()));
        let moved = m.transformed(&q, &shift).unwrap();
        let (p, r) = (vertex_curvatures(&m).unwrap(), vertex_curvatures(&moved).unwrap());
        for (x, y) in p.iter().zip(&r) {
            prop_assert!((x.h_sq - y.h_sq).abs() < 1e-8 * x.h_sq.max(1.0));
            prop_assert!((x.mean_sq - y.mean_sq).abs() < 1e-8 * x.mean_sq.max(1.0));
            prop_assert!((x.area - y.area).abs() < 1e-10);
        }
        prop_assert!((m.area() - moved.area()).abs() < 1e-10);
    }
}
