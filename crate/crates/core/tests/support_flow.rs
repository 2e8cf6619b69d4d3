use std::f64::consts::PI;

use curvlab::speed_functions::builtin;
use curvlab::support_flow::io::snapshot_csv;
use curvlab::support_flow::*;
use proptest::prelude::*;

fn config(name: &str, geometry: Geometry, initial: InitialShape, n_grid: usize) -> FlowRunConfig {
    let f = builtin(name, geometry.dim(), None, None).unwrap();
    let mut c = FlowRunConfig::new(f, geometry, initial);
    c.n_grid = n_grid;
    c.stop_inradius = 0.2;
    c.record_every = 20;
    c
}

/// Arc length of the ellipse by a fine midpoint rule.
fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let m = 200_000;
    let h = 2.0 * PI / m as f64;
    (0..m).map(|i| (i as f64 + 0.5) * h).map(|t| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt() * h).sum()
}

#[test]
fn circle_shrinks_in_half_unit_time() {
    let run = evolve::<f64>(&config("H", Geometry::Planar, InitialShape::Sphere { radius: 1.0 }, 64)).unwrap();
    assert_eq!(run.stop, StopReason::Extinction);
    let ext = run.extinction.unwrap();
    assert!((ext.t_ext - 0.5).abs() < 1e-6, "{}", ext.t_ext);
    assert!(!ext.flagged);
    for r in &run.records {
        assert!((r.rho_plus - (1.0 - 2.0 * r.t).sqrt()).abs() < 1e-8);
    }
}

#[test]
fn sphere_under_mean_curvature_extinguishes_at_one_quarter() {
    let mut c = config("H", Geometry::Axisymmetric, InitialShape::Sphere { radius: 1.0 }, 128);
    c.dt_safety = 0.4;
    let run = evolve::<f64>(&c).unwrap();
    assert!((run.extinction.unwrap().t_ext - 0.25).abs() < 1e-6);
}

#[test]
fn single_precision_circle() {
    let run = evolve::<f32>(&config("H", Geometry::Planar, InitialShape::Sphere { radius: 1.0 }, 64)).unwrap();
    assert!((run.extinction.unwrap().t_ext - 0.5).abs() < 1e-3);
}

#[test]
fn ellipse_geometry() {
    let s = SupportState::<f64>::ellipse(256, 2.0, 1.0).unwrap();
    let r = radii(&s).unwrap();
    assert!((r.rho_minus - 1.0).abs() < 1e-6 && (r.rho_plus - 2.0).abs() < 1e-6, "{r:?}");
    assert!((s.body_volume().unwrap() - 2.0 * PI).abs() < 1e-10);
    assert!((s.surface_measure().unwrap() - ellipse_perimeter(2.0, 1.0)).abs() < 1e-8);
    assert!((pinching_ratio(&s).unwrap() - 2.0).abs() < 1e-8);
}

#[test]
fn spheroid_geometry() {
    let s = SupportState::<f64>::spheroid(256, 1.5, 1.0).unwrap();
    assert!((s.body_volume().unwrap() - 4.0 / 3.0 * PI * 1.5).abs() < 1e-7);
    // Axial extremes fall between cell centres.
    let r = radii(&s).unwrap();
    assert!((r.rho_minus - 1.0).abs() < 1e-4 && (r.rho_plus - 1.5).abs() < 1e-4, "{r:?}");
    let sphere = SupportState::<f64>::sphere(Geometry::Axisymmetric, 128, 2.0).unwrap();
    assert!((sphere.surface_measure().unwrap() - 16.0 * PI).abs() < 1e-9);
}

#[test]
fn curve_shortening_loses_area_at_rate_two_pi() {
    let mut c = config("H", Geometry::Planar, InitialShape::Ellipse { a: 1.5, b: 1.0 }, 256);
    c.t_max = Some(0.1);
    let s0 = c.initial.build::<f64>(c.geometry, c.n_grid, 0).unwrap();
    let run = evolve_from(&c, s0.clone()).unwrap();
    assert_eq!(run.stop, StopReason::TimeLimit);
    let lost = s0.body_volume().unwrap() - run.last.body_volume().unwrap();
    assert!((lost - 0.2 * PI).abs() < 1e-8, "{lost}");
}

#[test]
fn snapshot_csv_round_trips() {
    let mut c = config("H", Geometry::Planar, InitialShape::Ellipse { a: 1.2, b: 1.0 }, 64);
    c.snapshot_every = Some(100);
    let run = evolve::<f64>(&c).unwrap();
    assert!(run.snapshots.len() >= 2);
    let (_, s) = &run.snapshots[1];
    let csv = snapshot_csv(s);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("angle,u"));
    let u: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(u, s.u);
}

#[test]
fn bad_configs_are_rejected() {
    let mut c = config("H", Geometry::Planar, InitialShape::Sphere { radius: 1.0 }, 32);
    assert!(evolve::<f64>(&c).is_err());
    c.n_grid = 64;
    c.dt_safety = 0.9;
    assert!(evolve::<f64>(&c).is_err());
    let c = config("H", Geometry::Axisymmetric, InitialShape::Ellipse { a: 1.0, b: 2.0 }, 64);
    assert!(evolve::<f64>(&c).is_err());
    let mut c = config("H", Geometry::Planar, InitialShape::Sphere { radius: 1.0 }, 64);
    c.speed = builtin("H", 2, None, None).unwrap();
    assert!(evolve::<f64>(&c).is_err());
}

/// Fourier coefficients for modes `1..=5`, small enough that
/// `Σ (k²−1)(|a_k| + |b_k|) < 1` keeps the curve convex.
fn fourier_state() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    let damp = |v: Vec<f64>| v.iter().enumerate().map(|(i, x)| x / ((i + 1) * (i + 1)) as f64).collect::<Vec<_>>();
    (prop::collection::vec(-0.1f64..0.1, 5), prop::collection::vec(-0.1f64..0.1, 5)).prop_map(move |(a, b)| (damp(a), damp(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steiner_point_is_translation_equivariant((cos, sin) in fourier_state(), zx in -2.0f64..2.0, zy in -2.0f64..2.0) {
        let s = InitialShape::Fourier { mean: 1.0, cos, sin }.build::<f64>(Geometry::Planar, 128, 0).unwrap();
        let z = [zx, zy];
        let (p, q) = (s.steiner_point(), s.translated(&z).steiner_point());
        prop_assert!((q[0] - p[0] - zx).abs() < 1e-12 && (q[1] - p[1] - zy).abs() < 1e-12);
        let (a, b) = (radii(&s).unwrap(), radii(&s.translated(&z)).unwrap());
        prop_assert!((a.rho_minus - b.rho_minus).abs() < 1e-7 && (a.rho_plus - b.rho_plus).abs() < 1e-7);
        prop_assert!(a.rho_minus <= a.rho_plus);
    }

    #[test]
    fn speed_field_is_translation_invariant_and_homogeneous((cos, _) in fourier_state(), z in -1.0f64..1.0, c in 0.5f64..2.0) {
        let s = InitialShape::Fourier { mean: 1.0, cos, sin: vec![] }.build::<f64>(Geometry::Axisymmetric, 64, 0).unwrap();
        let f = builtin("Sk_ratio", 2, None, Some(2)).unwrap();
        let (v, _) = speed_field(&s, &f).unwrap();
        let (w, _) = speed_field(&s.translated(&[z]), &f).unwrap();
        let (x, _) = speed_field(&s.scaled(c), &f).unwrap();
        // Fourth-order differences in the polar angle.
        for j in 0..v.len() {
            prop_assert!((v[j] - w[j]).abs() < 1e-6 * v[j], "{j}: {} vs {}", v[j], w[j]);
            prop_assert!((x[j] * c - v[j]).abs() < 1e-12 * v[j]);
        }
    }
}
