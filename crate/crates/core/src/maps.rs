//! Map families: single self-maps, sequences `n ↦ f_n`, and base-parametrized
//! fiber families `(n, x) ↦ h_n^x`.
//!
//! Implementations must be pure: the engines evaluate the same `(n, x)` many
//! times and expect identical answers, possibly from several threads.

use alloc::format;

use crate::error::{Error, Result};
use crate::metric::{Point, Space};

/// A self-map of a metric space.
pub trait SelfMap {
    fn space(&self) -> &Space;
    fn apply(&self, x: &Point) -> Point;
}

/// An indexed family `n ↦ f_n` of self-maps, `n ≥ 1`.
pub trait MapSequence {
    fn space(&self) -> &Space;
    fn apply(&self, n: usize, x: &Point) -> Point;

    /// User-asserted `sup_n Lip(f_n)`.
    fn declared_mu(&self) -> Option<f64> {
        None
    }
}

/// A family of fiber self-maps parametrized by a base point.
pub trait FiberMap {
    fn base_space(&self) -> &Space;
    fn fiber_space(&self) -> &Space;
    fn apply(&self, x: &Point, y: &Point) -> Point;

    fn declared_lambda(&self) -> Option<f64> {
        None
    }
}

/// An indexed, base-parametrized family `(n, x) ↦ h_n^x`.
pub trait FiberFamily {
    fn base_space(&self) -> &Space;
    fn fiber_space(&self) -> &Space;
    fn apply(&self, n: usize, x: &Point, y: &Point) -> Point;

    /// User-asserted `sup_n sup_x Lip(h_n^x)`.
    fn declared_lambda(&self) -> Option<f64> {
        None
    }
}

/// Closure-backed [`SelfMap`].
#[derive(Clone)]
pub struct FnMap<F> {
    space: Space,
    f: F,
}

impl<F: Fn(&Point) -> Point> FnMap<F> {
    pub fn new(space: Space, f: F) -> Self {
        FnMap { space, f }
    }
}

impl<F: Fn(&Point) -> Point> SelfMap for FnMap<F> {
    fn space(&self) -> &Space {
        &self.space
    }

    fn apply(&self, x: &Point) -> Point {
        (self.f)(x)
    }
}

/// Closure-backed [`MapSequence`].
#[derive(Clone)]
pub struct FnSequence<F> {
    space: Space,
    f: F,
    declared_mu: Option<f64>,
}

impl<F: Fn(usize, &Point) -> Point> FnSequence<F> {
    pub fn new(space: Space, f: F) -> Self {
        FnSequence {
            space,
            f,
            declared_mu: None,
        }
    }

    pub fn with_declared_mu(mut self, mu: f64) -> Self {
        self.declared_mu = Some(mu);
        self
    }
}

impl<F: Fn(usize, &Point) -> Point> MapSequence for FnSequence<F> {
    fn space(&self) -> &Space {
        &self.space
    }

    fn apply(&self, n: usize, x: &Point) -> Point {
        (self.f)(n, x)
    }

    fn declared_mu(&self) -> Option<f64> {
        self.declared_mu
    }
}

/// Closure-backed [`FiberFamily`].
#[derive(Clone)]
pub struct FnFiber<F> {
    base: Space,
    fiber: Space,
    h: F,
    declared_lambda: Option<f64>,
}

impl<F: Fn(usize, &Point, &Point) -> Point> FnFiber<F> {
    pub fn new(base: Space, fiber: Space, h: F) -> Self {
        FnFiber {
            base,
            fiber,
            h,
            declared_lambda: None,
        }
    }

    pub fn with_declared_lambda(mut self, lambda: f64) -> Self {
        self.declared_lambda = Some(lambda);
        self
    }
}

impl<F: Fn(usize, &Point, &Point) -> Point> FiberFamily for FnFiber<F> {
    fn base_space(&self) -> &Space {
        &self.base
    }

    fn fiber_space(&self) -> &Space {
        &self.fiber
    }

    fn apply(&self, n: usize, x: &Point, y: &Point) -> Point {
        (self.h)(n, x, y)
    }

    fn declared_lambda(&self) -> Option<f64> {
        self.declared_lambda
    }
}

/// Closure-backed [`FiberMap`].
#[derive(Clone)]
pub struct FnFiberMap<F> {
    base: Space,
    fiber: Space,
    h: F,
}

impl<F: Fn(&Point, &Point) -> Point> FnFiberMap<F> {
    pub fn new(base: Space, fiber: Space, h: F) -> Self {
        FnFiberMap { base, fiber, h }
    }
}

impl<F: Fn(&Point, &Point) -> Point> FiberMap for FnFiberMap<F> {
    fn base_space(&self) -> &Space {
        &self.base
    }

    fn fiber_space(&self) -> &Space {
        &self.fiber
    }

    fn apply(&self, x: &Point, y: &Point) -> Point {
        (self.h)(x, y)
    }
}

/// The constant sequence `f_n = f`.
pub struct Stationary<M>(pub M);

impl<M: SelfMap> MapSequence for Stationary<M> {
    fn space(&self) -> &Space {
        self.0.space()
    }

    fn apply(&self, _n: usize, x: &Point) -> Point {
        self.0.apply(x)
    }
}

/// The constant fiber family `h_n^x = h^x`.
pub struct StationaryFiber<H>(pub H);

impl<H: FiberMap> FiberFamily for StationaryFiber<H> {
    fn base_space(&self) -> &Space {
        self.0.base_space()
    }

    fn fiber_space(&self) -> &Space {
        self.0.fiber_space()
    }

    fn apply(&self, _n: usize, x: &Point, y: &Point) -> Point {
        self.0.apply(x, y)
    }

    fn declared_lambda(&self) -> Option<f64> {
        self.0.declared_lambda()
    }
}

/// `shift(seq, k).at(i) = seq.at(k + i)`.
pub struct Shifted<'a, S: ?Sized> {
    pub inner: &'a S,
    pub offset: usize,
}

impl<S: MapSequence + ?Sized> MapSequence for Shifted<'_, S> {
    fn space(&self) -> &Space {
        self.inner.space()
    }

    fn apply(&self, n: usize, x: &Point) -> Point {
        self.inner.apply(self.offset + n, x)
    }

    fn declared_mu(&self) -> Option<f64> {
        self.inner.declared_mu()
    }
}

/// The single map `f_n` of a sequence.
pub struct NthMap<'a, S: ?Sized> {
    pub seq: &'a S,
    pub n: usize,
}

impl<S: MapSequence + ?Sized> SelfMap for NthMap<'_, S> {
    fn space(&self) -> &Space {
        self.seq.space()
    }

    fn apply(&self, x: &Point) -> Point {
        self.seq.apply(self.n, x)
    }
}

/// The fiber map `y ↦ h_n^x(y)` for fixed `n` and `x`.
pub struct FiberSlice<'a, H: ?Sized> {
    pub family: &'a H,
    pub n: usize,
    pub x: &'a Point,
}

impl<H: FiberFamily + ?Sized> SelfMap for FiberSlice<'_, H> {
    fn space(&self) -> &Space {
        self.family.fiber_space()
    }

    fn apply(&self, y: &Point) -> Point {
        self.family.apply(self.n, self.x, y)
    }
}

/// Checks that a map output lives in `space` and is finite.
pub(crate) fn checked(space: &Space, out: Point, n: usize, coordinate: &'static str) -> Result<Point> {
    if out.len() != space.dim() {
        return Err(Error::Evaluation {
            n,
            coordinate,
            detail: format!("expected {} coordinates, got {}", space.dim(), out.len()),
        });
    }
    if !out.is_finite() {
        return Err(Error::Evaluation {
            n,
            coordinate,
            detail: format!("non-finite output {out}"),
        });
    }
    Ok(out)
}

/// `f_n(x)` with output validation.
pub fn eval_seq<S: MapSequence + ?Sized>(seq: &S, n: usize, x: &Point) -> Result<Point> {
    checked(seq.space(), seq.apply(n, x), n, "base")
}

/// `h_n^x(y)` with output validation.
pub fn eval_fiber<H: FiberFamily + ?Sized>(family: &H, n: usize, x: &Point, y: &Point) -> Result<Point> {
    checked(family.fiber_space(), family.apply(n, x, y), n, "fiber")
}
