use curvlab::entropy_gcf::*;
use curvlab::support_flow::{Geometry, InitialShape, SupportState};
use proptest::prelude::*;

#[test]
fn unit_balls_have_zero_entropy() {
    for g in [Geometry::Planar, Geometry::Axisymmetric] {
        let s = SupportState::<f64>::sphere(g, 128, 1.0).unwrap();
        for beta in [0.25, 1.0 / 3.0, 0.5, 1.0, 2.0] {
            let e = entropy_point(&s, beta).unwrap();
            assert!(e.value.abs() < 1e-12, "{g:?} beta {beta}: {}", e.value);
            assert!(e.center.iter().all(|c| c.abs() < 1e-9));
        }
        let r = SupportState::<f64>::sphere(g, 128, 2.5).unwrap();
        assert!((entropy_point(&r, 0.5).unwrap().value - 2.5f64.ln()).abs() < 1e-12);
        assert!(tau_from_volume(g, unit_ball_volume(g)).abs() < 1e-15);
    }
}

#[test]
fn ellipse_entropies_in_closed_form() {
    for (a, b) in [(2.0, 0.5), (1.5, 1.0), (3.0, 0.9)] {
        let s = SupportState::<f64>::ellipse(256, a, b).unwrap();
        // (1/2π)∫ log u dθ = log((a+b)/2) and (1/2π)∫ u⁻² dθ = 1/(ab).
        let log = entropy_point(&s, 1.0).unwrap();
        assert!((log.value - ((a + b) / 2.0).ln()).abs() < 1e-10, "{a} {b}");
        assert_eq!(log.branch, EntropyBranch::Log);
        let affine = entropy_point(&s, 1.0 / 3.0).unwrap();
        assert!((affine.value - 0.5 * (a * b).ln()).abs() < 1e-10, "{a} {b}");
        assert!(log.center.iter().chain(&affine.center).all(|c| c.abs() < 1e-9));
    }
}

#[test]
fn threshold_needs_research_flag() {
    assert_eq!(beta_threshold(Geometry::Planar), 1.0 / 3.0);
    assert_eq!(beta_threshold(Geometry::Axisymmetric), 0.25);
    let mut c = GcfRunConfig::new(Geometry::Planar, InitialShape::Sphere { radius: 1.0 }, 0.2, 1.0);
    assert!(c.validate().is_err());
    c.research = true;
    assert!(c.validate().is_ok());
    c.beta = 1.0 / 3.0;
    c.research = false;
    assert!(c.validate().is_ok());
}

#[test]
fn short_run_is_monotone_and_keeps_volume() {
    let mut c = GcfRunConfig::new(Geometry::Planar, InitialShape::Ellipse { a: 1.5, b: 1.0 }, 1.0, 0.5);
    c.n_grid = 64;
    c.record_every = 10;
    let run = gcf_rescaled_run::<f64>(&c).unwrap();
    assert!(run.max_entropy_increase <= 1e-9, "{}", run.max_entropy_increase);
    assert!(run.max_slope_excess <= 1e-9);
    let target = unit_ball_volume(Geometry::Planar);
    assert!(run.records.iter().all(|r| (r.volume - target).abs() < 1e-9 * target));
    let csv = entropy_series_csv(&run.records);
    assert!(csv.starts_with(ENTROPY_HEADER));
    assert_eq!(csv.lines().count(), run.records.len() + 1);
}

fn state() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    let damp = |v: Vec<f64>| v.iter().enumerate().map(|(i, x)| x / ((i + 2) * (i + 2)) as f64).collect::<Vec<_>>();
    (prop::collection::vec(-0.3f64..0.3, 3), prop::collection::vec(-0.3f64..0.3, 3)).prop_map(move |(a, b)| (damp(a), damp(b)))
}

fn build(cos: Vec<f64>, sin: Vec<f64>) -> SupportState<f64> {
    let pad = |v: Vec<f64>| std::iter::once(0.0).chain(v).collect::<Vec<_>>();
    InitialShape::Fourier { mean: 1.0, cos: pad(cos), sin: pad(sin) }.build(Geometry::Planar, 128, 0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn entropy_point_is_a_maximum((cos, sin) in state(), dx in -0.2f64..0.2, dy in -0.2f64..0.2, beta in 0.34f64..2.0) {
        let s = build(cos, sin);
        let e = entropy_point(&s, beta).unwrap();
        let z = [e.center[0] + dx, e.center[1] + dy];
        let off = entropy(&s, &z, beta).unwrap();
        prop_assert!(off.value <= e.value + 1e-12);
    }

    #[test]
    fn entropy_is_translation_invariant((cos, sin) in state(), zx in -3.0f64..3.0, zy in -3.0f64..3.0, beta in 0.34f64..2.0) {
        let s = build(cos, sin);
        let (p, q) = (entropy_point(&s, beta).unwrap(), entropy_point(&s.translated(&[zx, zy]), beta).unwrap());
        prop_assert!((p.value - q.value).abs() < 1e-10);
        prop_assert!((q.center[0] - p.center[0] - zx).abs() < 1e-7 && (q.center[1] - p.center[1] - zy).abs() < 1e-7);
    }

    #[test]
    fn non_round_bodies_have_positive_entropy((cos, sin) in state(), beta in 0.34f64..2.0) {
        prop_assume!(cos.iter().chain(&sin).any(|c| c.abs() > 1e-3));
        let s = build(cos, sin);
        let v = s.body_volume().unwrap();
        let normalized = s.scaled((unit_ball_volume(Geometry::Planar) / v).sqrt());
        prop_assert!(entropy_point(&normalized, beta).unwrap().value > 0.0);
    }
}
