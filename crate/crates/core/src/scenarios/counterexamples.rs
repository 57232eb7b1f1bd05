//! Systems showing that each boundedness/continuity hypothesis is needed.

use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{Expected, Limit, Oracle, Scenario, Start, System};
use crate::contraction::powi;
use crate::fiber::SkewSystem;
use crate::maps::{FnFiber, FnSequence};
use crate::metric::{Point, Space};

/// Depth of precomputed partial sums for the divergent scenarios.
const SERIES_TERMS: usize = 40;

/// `Σ_{i=1}^n 3^i / 2^(i−1)`.
pub fn geometric_partial_sum(n: usize) -> f64 {
    (1..=n).map(|i| powi(3.0, i) / powi(2.0, i - 1)).sum()
}

fn halving() -> FnSequence<impl Fn(usize, &Point) -> Point + Send + Sync> {
    FnSequence::new(Space::RealLine, |_, x: &Point| Point::scalar(0.5 * x.value())).with_declared_mu(0.5)
}

/// `f_n(x) = x/2 + 3ⁿ` on the real line: uniformly contracting, but
/// `d(f_n(0), 0)` is unbounded.
pub fn build_remark_counterexample() -> Scenario {
    let seq = FnSequence::new(Space::RealLine, |n, x: &Point| {
        Point::scalar(0.5 * x.value() + powi(3.0, n))
    })
    .with_declared_mu(0.5);
    Scenario {
        name: "remark1".into(),
        system: System::Sequence(Arc::new(seq)),
        x0: Point::scalar(0.0),
        start: Start::Base(Point::scalar(0.0)),
        oracle: Some(Oracle::PartialSums(
            (1..=SERIES_TERMS).map(geometric_partial_sum).collect(),
        )),
        oracle_note: "f_1∘⋯∘f_n(0) = Σ_{i≤n} 3^i / 2^(i−1)".into(),
        expected: Expected::Diverges,
        raw_cap: SERIES_TERMS,
        notes: Vec::new(),
    }
}

/// `f_n(x) = x/2`, `h_n^x(y) = y/2 + 3ⁿ`: the base converges, the fiber
/// offsets are unbounded.
pub fn build_condition2_counterexample() -> Scenario {
    let fiber = FnFiber::new(Space::RealLine, Space::RealLine, |n, _: &Point, y: &Point| {
        Point::scalar(0.5 * y.value() + powi(3.0, n))
    })
    .with_declared_lambda(0.5);
    let system = SkewSystem::new(
        Arc::new(halving()),
        Arc::new(fiber),
        Point::scalar(0.0),
        Point::scalar(0.0),
    )
    .expect("scalar anchors");
    Scenario {
        name: "cond2".into(),
        system: System::Skew(system),
        x0: Point::scalar(0.0),
        start: Start::Skew((Point::scalar(0.0), Point::scalar(0.0))),
        oracle: Some(Oracle::PartialSums(
            (1..=SERIES_TERMS).map(geometric_partial_sum).collect(),
        )),
        oracle_note: "π_Y F_1∘⋯∘F_n(0, 0) = Σ_{i≤n} 3^i / 2^(i−1)".into(),
        expected: Expected::Diverges,
        raw_cap: SERIES_TERMS,
        notes: Vec::new(),
    }
}

/// `f_n(x) = x/2` with a fiber map that is `0` over `x = 0` and
/// `(y − 1/4)/2 + 1/4` elsewhere: discontinuous in `x`, so the limit
/// depends on whether the start lies over `0`.
pub fn build_condition3_counterexample() -> Scenario {
    let fiber = FnFiber::new(Space::RealLine, Space::RealLine, |_, x: &Point, y: &Point| {
        Point::scalar(if x.value() == 0.0 {
            0.0
        } else {
            0.5 * (y.value() - 0.25) + 0.25
        })
    })
    .with_declared_lambda(0.5);
    let system = SkewSystem::new(
        Arc::new(halving()),
        Arc::new(fiber),
        Point::scalar(0.0),
        Point::scalar(0.0),
    )
    .expect("scalar anchors");
    let p = |x: f64, y: f64| (Point::scalar(x), Point::scalar(y));
    Scenario {
        name: "cond3".into(),
        system: System::Skew(system),
        x0: Point::scalar(0.0),
        start: Start::Skew(p(1.0, 1.0)),
        oracle: Some(Oracle::Limit(Limit::Pair(p(0.0, 0.25)))),
        oracle_note: "limit (0, 0) over x = 0, (0, 1/4) over x ≠ 0".into(),
        expected: Expected::SplitLimit {
            starts: (p(0.0, 1.0), p(1.0, 1.0)),
            limits: (p(0.0, 0.0), p(0.0, 0.25)),
        },
        // 2^-n stays a normal double (so never 0) for n well past this
        raw_cap: 900,
        notes: vec![(
            "base orbit from x = 1".to_string(),
            "2^-n, nonzero for n <= 900".to_string(),
        )],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::compose_eval;
    use crate::fiber::{raw_skew_orbit, skew_apply, skew_compose_eval};
    use crate::probe::{probe_base_boundedness, BoundednessRule, Verdict};

    #[test]
    fn remark_partial_sums() {
        let s = build_remark_counterexample();
        let seq = s.sequence().unwrap();
        let want = [3.0, 7.5, 14.25];
        for (n, w) in want.iter().enumerate() {
            let got = compose_eval(&**seq, n + 1, &Point::scalar(0.0)).unwrap().value();
            assert!((got - w).abs() <= 1e-12);
            assert!((geometric_partial_sum(n + 1) - w).abs() <= 1e-12);
        }
        let r = probe_base_boundedness(&**seq, &s.x0, 40, &BoundednessRule::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn condition2_fiber_matches_series() {
        let s = build_condition2_counterexample();
        let sys = s.skew().unwrap();
        let zero = (Point::scalar(0.0), Point::scalar(0.0));
        assert_eq!(skew_compose_eval(sys, 2, &zero).unwrap().1.value(), 7.5);
        let from_one = (Point::scalar(1.0), Point::scalar(0.0));
        assert_eq!(skew_compose_eval(sys, 10, &from_one).unwrap().0.value(), 1.0 / 1024.0);
    }

    #[test]
    fn condition3_branches() {
        let s = build_condition3_counterexample();
        let sys = s.skew().unwrap();
        let p = |x: f64, y: f64| (Point::scalar(x), Point::scalar(y));
        assert_eq!(skew_apply(sys, 1, &p(0.0, 1.0)).unwrap(), p(0.0, 0.0));
        let over_zero = raw_skew_orbit(sys, &p(0.0, 1.0), 900, Some((1e-12, 10))).unwrap();
        assert_eq!(over_zero.last_pair().unwrap(), p(0.0, 0.0));
        let off_zero = raw_skew_orbit(sys, &p(1.0, 1.0), 900, Some((1e-12, 10))).unwrap();
        let (x, y) = off_zero.last_pair().unwrap();
        assert!(x.value().abs() <= 1e-9 && x.value() > 0.0);
        assert!((y.value() - 0.25).abs() <= 1e-9);
    }
}
