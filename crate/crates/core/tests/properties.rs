use proptest::prelude::*;

use nscontract_core::contraction::{compose_eval, iterate_nonstationary, NonstationaryPolicy};
use nscontract_core::fiber::{skew_compose_eval, SkewSystem};
use nscontract_core::maps::{FnFiber, FnMap, FnSequence, Shifted};
use nscontract_core::probe::{estimate_lipschitz, SamplingPlan};
use nscontract_core::scenarios::{build_smooth_graph_demo, CosineGraphFamily};
use nscontract_core::{Point, Space};
use std::sync::Arc;

fn coords(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Point> {
    prop::collection::vec(lo..hi, n).prop_map(Point::new)
}

fn metric_axioms(space: &Space, p: &Point, q: &Point, r: &Point) -> Result<(), TestCaseError> {
    let d = |a: &Point, b: &Point| space.distance(a, b).unwrap();
    prop_assert_eq!(d(p, p), 0.0);
    prop_assert!(d(p, q) >= 0.0);
    prop_assert_eq!(d(p, q), d(q, p));
    let slack = 1e-12 * (1.0 + d(p, q) + d(q, r));
    prop_assert!(d(p, r) <= d(p, q) + d(q, r) + slack);
    if p != q {
        prop_assert!(d(p, q) > 0.0);
    }
    Ok(())
}

fn triples(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = (Point, Point, Point)> {
    (coords(n, lo, hi), coords(n, lo, hi), coords(n, lo, hi))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn real_line_is_a_metric((p, q, r) in triples(1, -1e6, 1e6)) {
        metric_axioms(&Space::RealLine, &p, &q, &r)?;
    }

    #[test]
    fn euclidean_is_a_metric((p, q, r) in triples(3, -1e3, 1e3)) {
        metric_axioms(&Space::Euclidean { dim: 3 }, &p, &q, &r)?;
    }

    #[test]
    fn grid_is_a_metric((p, q, r) in triples(8, -10.0, 10.0)) {
        metric_axioms(&Space::grid(8, 0.0, 1.0), &p, &q, &r)?;
    }

    #[test]
    fn slope_is_a_metric((p, q, r) in triples(1, 0.5, 2.0)) {
        metric_axioms(&Space::Slope { lo: 0.5, hi: 2.0 }, &p, &q, &r)?;
    }

    #[test]
    fn product_is_a_metric((p, q, r) in triples(3, -50.0, 50.0)) {
        let space = Space::product(Space::RealLine, Space::Euclidean { dim: 2 });
        metric_axioms(&space, &p, &q, &r)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_lipschitz_estimate_is_exact(a in -0.99f64..0.99, b in -5.0f64..5.0, seed in any::<u64>()) {
        let f = FnMap::new(Space::RealLine, move |x: &Point| Point::scalar(a * x.value() + b));
        let plan = SamplingPlan::Random { lo: -3.0, hi: 3.0, count: 12, seed };
        let est = estimate_lipschitz(&f, &plan).unwrap();
        prop_assert!((est.value - a.abs()).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn composition_telescopes(a in -0.9f64..0.9, n in 1usize..12, k in 1usize..12, x in -10.0f64..10.0) {
        let seq = FnSequence::new(Space::RealLine, move |i, x: &Point| {
            Point::scalar(a * x.value() + (i as f64).sin())
        });
        let x = Point::scalar(x);
        let whole = compose_eval(&seq, n + k, &x).unwrap();
        let tail = compose_eval(&Shifted { inner: &seq, offset: k }, n, &x).unwrap();
        let split = compose_eval(&seq, k, &tail).unwrap();
        prop_assert!((whole.value() - split.value()).abs() <= 1e-12 * (1.0 + whole.value().abs()));
    }

    #[test]
    fn limit_is_start_independent(a in 0.0f64..0.8, x in -20.0f64..20.0, y in -20.0f64..20.0) {
        let seq = FnSequence::new(Space::RealLine, move |i, x: &Point| {
            Point::scalar(a * x.value() + 0.5f64.powi(i as i32))
        }).with_declared_mu(a);
        let policy = NonstationaryPolicy::default();
        let x0 = Point::scalar(0.0);
        let p = iterate_nonstationary(&seq, &x0, &Point::scalar(x), &policy).unwrap().point;
        let q = iterate_nonstationary(&seq, &x0, &Point::scalar(y), &policy).unwrap().point;
        prop_assert!((p.value() - q.value()).abs() <= 2.0 * policy.tol);
    }

    #[test]
    fn certified_bound_holds_on_every_row(a in 0.05f64..0.9, c in -3.0f64..3.0, x in -10.0f64..10.0) {
        let seq = FnSequence::new(Space::RealLine, move |i, x: &Point| {
            Point::scalar(a * x.value() + c * (i as f64).cos())
        }).with_declared_mu(a);
        let policy = NonstationaryPolicy::default();
        let r = iterate_nonstationary(&seq, &Point::scalar(0.0), &Point::scalar(x), &policy).unwrap();
        let reference = compose_eval(&seq, 10 * r.n_used, &Point::scalar(x)).unwrap();
        for row in &r.trace.rows {
            let err = (row.point.value() - reference.value()).abs();
            prop_assert!(err <= row.bound.unwrap() + 1e-12, "n = {}: {} > {:?}", row.n, err, row.bound);
        }
    }

    #[test]
    fn skew_projects_onto_base(n in 1usize..=12, x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let base = Arc::new(FnSequence::new(Space::RealLine, |i, x: &Point| {
            Point::scalar(0.5 * x.value() + 1.0 / i as f64)
        }));
        let fiber = Arc::new(FnFiber::new(Space::RealLine, Space::RealLine, |i, x: &Point, y: &Point| {
            Point::scalar(0.3 * y.value() + (x.value() * i as f64).sin())
        }));
        let sys = SkewSystem::new(base.clone(), fiber, Point::scalar(0.0), Point::scalar(0.0)).unwrap();
        let (px, _) = skew_compose_eval(&sys, n, &(Point::scalar(x), Point::scalar(y))).unwrap();
        let bx = compose_eval(&*base, n, &Point::scalar(x)).unwrap();
        prop_assert!((px.value() - bx.value()).abs() <= 1e-12 * (1.0 + bx.value().abs()));
    }

    #[test]
    fn graph_fiber_contracts_in_v(
        n in 1usize..50,
        u in coords(16, -3.0, 3.0),
        v in coords(16, -3.0, 3.0),
        w in coords(16, -3.0, 3.0),
    ) {
        let s = build_smooth_graph_demo(16, CosineGraphFamily::default()).unwrap();
        let sys = s.skew().unwrap();
        let space = sys.fiber_space();
        let lambda = sys.fiber.declared_lambda().unwrap();
        let hv = sys.fiber.apply(n, &u, &v);
        let hw = sys.fiber.apply(n, &u, &w);
        let d = space.distance(&v, &w).unwrap();
        prop_assert!(space.distance(&hv, &hw).unwrap() <= lambda * d + 1e-12);
    }
}
