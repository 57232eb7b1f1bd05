use alloc::format;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{Expected, Limit, Oracle, Scenario, Start, System};
use crate::error::{Error, Result};
use crate::maps::FnSequence;
use crate::metric::{Point, Space};

/// `[[a, b], [c, d]]`
pub type Matrix2 = [[i64; 2]; 2];

/// Depth of the renormalized product used as the oracle.
const ORACLE_DEPTH: usize = 60;

/// Slope of `A_1 A_2 ⋯ A_n (1, 1)`, renormalizing after every factor.
pub fn product_direction_slope(matrices: &[Matrix2], n: usize) -> f64 {
    let mut v = [1.0_f64, 1.0];
    for k in (1..=n).rev() {
        let [[a, b], [c, d]] = matrices[(k - 1) % matrices.len()].map(|r| r.map(|e| e as f64));
        v = [a * v[0] + b * v[1], c * v[0] + d * v[1]];
        let s = v[0].abs().max(v[1].abs());
        v = [v[0] / s, v[1] / s];
    }
    v[1] / v[0]
}

/// Slope maps `s ↦ (c + d·s)/(a + b·s)` of a periodic sequence of positive
/// matrices, acting on the invariant interval spanned by the column slopes.
pub fn build_projective_cocycle_demo(matrices: Vec<Matrix2>) -> Result<Scenario> {
    if matrices.is_empty() {
        return Err(Error::InvalidParameter("cocycle needs at least one matrix".into()));
    }
    if let Some(m) = matrices.iter().find(|m| m.iter().flatten().any(|e| *e <= 0)) {
        return Err(Error::InvalidParameter(format!("matrix {m:?} has a nonpositive entry")));
    }
    let as_f = |m: &Matrix2| m.map(|r| r.map(|e| e as f64));
    // s ↦ (c + d s)/(a + b s) is monotone on [0, ∞] between c/a and d/b
    let (lo, hi) = matrices
        .iter()
        .map(as_f)
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), [[a, b], [c, d]]| {
            (lo.min(c / a).min(d / b), hi.max(c / a).max(d / b))
        });
    // |f'(s)| = |ad − bc| / (a + b s)², largest at the left end of the interval
    let mu = matrices
        .iter()
        .map(as_f)
        .map(|[[a, b], [c, d]]| (a * d - b * c).abs() / ((a + b * lo) * (a + b * lo)))
        .fold(0.0_f64, f64::max);
    if !(mu < 1.0) {
        return Err(Error::Domain { rate: mu });
    }
    let oracle = product_direction_slope(&matrices, ORACLE_DEPTH);
    let space = Space::Slope { lo, hi };
    let mats = matrices.clone();
    let seq = FnSequence::new(space, move |n, s: &Point| {
        let [[a, b], [c, d]] = as_f(&mats[(n - 1) % mats.len()]);
        let s = s.value();
        Point::scalar((c + d * s) / (a + b * s))
    })
    .with_declared_mu(mu);
    let start = Point::scalar(1.0_f64.clamp(lo, hi));
    let lim = Limit::Point(Point::scalar(oracle));
    Ok(Scenario {
        name: "cocycle".into(),
        system: System::Sequence(Arc::new(seq)),
        x0: start.clone(),
        start: Start::Base(start),
        oracle: Some(Oracle::Limit(lim.clone())),
        oracle_note: format!("slope of A_1⋯A_{ORACLE_DEPTH}·(1, 1), renormalized per factor"),
        expected: Expected::Converges(Some(lim)),
        raw_cap: 200,
        notes: vec![
            ("invariant slope interval".to_string(), format!("[{lo}, {hi}]")),
            ("declared rate".to_string(), format!("{mu}")),
            ("period".to_string(), format!("{}", matrices.len())),
        ],
    })
}
