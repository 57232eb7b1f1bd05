use alloc::format;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use super::{Expected, Limit, Oracle, Scenario, Start, System};
use crate::error::{Error, Result};
use crate::fiber::SkewSystem;
use crate::maps::{FnFiber, FnSequence};
use crate::metric::{Point, Space};

/// Offsets `b_n` of an affine sequence `f_n(x) = a·x + b_n`.
#[derive(Clone, Debug, PartialEq)]
pub enum OffsetSpec {
    /// `b_n = c`
    Constant(f64),
    /// `b_n = rⁿ`
    Geometric(f64),
    /// `b_n = odd` for odd `n`, `even` otherwise.
    Alternating { odd: f64, even: f64 },
    /// `b_n = values[(n − 1) mod len]`
    Cycle(Vec<f64>),
    /// `b_n = amplitude · sin(n)`
    Sine { amplitude: f64 },
}

impl OffsetSpec {
    pub fn at(&self, n: usize) -> f64 {
        match self {
            OffsetSpec::Constant(c) => *c,
            OffsetSpec::Geometric(r) => libm::pow(*r, n as f64),
            OffsetSpec::Alternating { odd, even } => {
                if n % 2 == 1 {
                    *odd
                } else {
                    *even
                }
            }
            OffsetSpec::Cycle(v) => v[(n - 1) % v.len()],
            OffsetSpec::Sine { amplitude } => amplitude * libm::sin(n as f64),
        }
    }

    /// `sup_n |b_n|`, or an error when the offsets are unbounded.
    pub fn sup(&self) -> Result<f64> {
        let s = match self {
            OffsetSpec::Constant(c) => c.abs(),
            OffsetSpec::Geometric(r) if r.abs() <= 1.0 => r.abs(),
            OffsetSpec::Geometric(r) => {
                return Err(Error::InvalidParameter(format!(
                    "offsets r^n with |r| = {} > 1 are unbounded",
                    r.abs()
                )))
            }
            OffsetSpec::Alternating { odd, even } => odd.abs().max(even.abs()),
            OffsetSpec::Cycle(v) if v.is_empty() => return Err(Error::InvalidParameter("empty offset list".into())),
            OffsetSpec::Cycle(v) => v.iter().fold(0.0_f64, |m, b| m.max(b.abs())),
            OffsetSpec::Sine { amplitude } => amplitude.abs(),
        };
        if !s.is_finite() {
            return Err(Error::InvalidParameter("non-finite offsets".into()));
        }
        Ok(s)
    }
}

impl FromStr for OffsetSpec {
    type Err = Error;

    /// `const:<c>`, `geom:<r>`, `alt:<odd>:<even>`, `list:<b1>,<b2>,…`, `sin:<amplitude>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unrecognised offset spec `{s}`"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let spec = match kind {
            "const" => OffsetSpec::Constant(num(rest)?),
            "geom" => OffsetSpec::Geometric(num(rest)?),
            "alt" => {
                let (o, e) = rest.split_once(':').ok_or_else(bad)?;
                OffsetSpec::Alternating {
                    odd: num(o)?,
                    even: num(e)?,
                }
            }
            "list" => OffsetSpec::Cycle(rest.split(',').map(num).collect::<Result<_>>()?),
            "sin" => OffsetSpec::Sine { amplitude: num(rest)? },
            _ => return Err(bad()),
        };
        spec.sup()?;
        Ok(spec)
    }
}

/// `Σ_{i≥1} a^(i−1) b_i`, summed until the tail `|a|ⁿ·sup|b|/(1−|a|)` drops below `1e-14`.
fn affine_limit(a: f64, b: &OffsetSpec, sup: f64) -> f64 {
    let mut sum = 0.0;
    let mut weight = 1.0;
    let mut i = 1;
    loop {
        sum += weight * b.at(i);
        weight *= a;
        if weight.abs() * sup / (1.0 - a.abs()) < 1e-14 || i > 100_000 {
            return sum;
        }
        i += 1;
    }
}

/// `f_n(x) = a·x + b_n` on the real line.
pub fn build_affine_scenario(a: f64, b: OffsetSpec) -> Result<Scenario> {
    if !(a.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "affine slope must satisfy |a| < 1, got {a}"
        )));
    }
    let sup = b.sup()?;
    let limit = affine_limit(a, &b, sup);
    let note = format!("Σ a^(i−1) b_i with a = {a}, b = {b:?}");
    let seq = FnSequence::new(Space::RealLine, move |n, x: &Point| {
        Point::scalar(a * x.value() + b.at(n))
    })
    .with_declared_mu(a.abs());
    let lim = Limit::Point(Point::scalar(limit));
    Ok(Scenario {
        name: "affine".into(),
        system: System::Sequence(Arc::new(seq)),
        x0: Point::scalar(0.0),
        start: Start::Base(Point::scalar(0.0)),
        oracle: Some(Oracle::Limit(lim.clone())),
        oracle_note: note,
        expected: Expected::Converges(Some(lim)),
        raw_cap: 200,
        notes: vec![("sup |b_n|".to_string(), format!("{sup}"))],
    })
}

/// `f_n(x) = x/2`, `h_n^x(y) = y/2 + x`, anchored at `(x₀, y₀) = (1, 0)`.
pub fn build_affine_skew_demo() -> Scenario {
    let base = FnSequence::new(Space::RealLine, |_, x: &Point| Point::scalar(0.5 * x.value())).with_declared_mu(0.5);
    let fiber = FnFiber::new(Space::RealLine, Space::RealLine, |_, x: &Point, y: &Point| {
        Point::scalar(0.5 * y.value() + x.value())
    })
    .with_declared_lambda(0.5);
    let system = SkewSystem::new(Arc::new(base), Arc::new(fiber), Point::scalar(1.0), Point::scalar(0.0))
        .expect("scalar anchors");
    let origin = (Point::scalar(0.0), Point::scalar(0.0));
    Scenario {
        name: "affine-skew".into(),
        system: System::Skew(system),
        x0: Point::scalar(1.0),
        start: Start::Skew((Point::scalar(1.0), Point::scalar(0.0))),
        oracle: Some(Oracle::Limit(Limit::Pair(origin.clone()))),
        oracle_note: "fiber coordinate of F_1∘⋯∘F_n(x, y) is n·2^(1−n)·x + 2^(−n)·y".into(),
        expected: Expected::Converges(Some(Limit::Pair(origin))),
        raw_cap: 200,
        notes: Vec::new(),
    }
}
