//! Metric spaces the engines run on.
//!
//! Every space is finite dimensional, so completeness is inherited from
//! the reals. Points are plain coordinate vectors interpreted by the
//! owning [`Space`].

use alloc::boxed::Box;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Index;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Distances at or below this are treated as "the same point".
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// Descriptor of a complete metric space.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Space {
    /// The real line with `|p - q|`.
    RealLine,
    /// `R^dim` with the Euclidean norm.
    Euclidean { dim: usize },
    /// Functions sampled at `size` uniform nodes of `[lo, hi]`, sup metric.
    Grid { size: usize, lo: f64, hi: f64 },
    /// Slopes restricted to `[lo, hi]`, absolute difference.
    Slope { lo: f64, hi: f64 },
    /// `left × right` with the max metric.
    Product(Box<Space>, Box<Space>),
}

impl Space {
    pub fn grid(size: usize, lo: f64, hi: f64) -> Self {
        Space::Grid { size, lo, hi }
    }

    pub fn product(left: Space, right: Space) -> Self {
        Space::Product(Box::new(left), Box::new(right))
    }

    /// Number of coordinates a point of this space carries.
    pub fn dim(&self) -> usize {
        match self {
            Space::RealLine | Space::Slope { .. } => 1,
            Space::Euclidean { dim } => *dim,
            Space::Grid { size, .. } => *size,
            Space::Product(l, r) => l.dim() + r.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Space::RealLine => "RealLine",
            Space::Euclidean { .. } => "EuclideanVector",
            Space::Grid { .. } => "GridFunction",
            Space::Slope { .. } => "SlopeInterval",
            Space::Product(..) => "Product",
        }
    }

    /// Grid nodes, including both endpoints. Empty for non-grid spaces.
    pub fn nodes(&self) -> Vec<f64> {
        match *self {
            Space::Grid { size, lo, hi } => grid_nodes(size, lo, hi),
            _ => Vec::new(),
        }
    }

    /// Checks coordinate count, finiteness and slope bounds.
    pub fn validate(&self, p: &Point, role: &'static str) -> Result<()> {
        self.check_dim(p, role)?;
        match (self, p.coords()) {
            (Space::Slope { lo, hi }, [v]) if !(*lo..=*hi).contains(v) => Err(Error::OutOfRange {
                space: self.to_string(),
                value: *v,
                lo: *lo,
                hi: *hi,
            }),
            (Space::Product(l, r), c) => {
                let (a, b) = c.split_at(l.dim());
                l.validate(&Point::from(a), role)?;
                r.validate(&Point::from(b), role)
            }
            _ => Ok(()),
        }
    }

    fn check_dim(&self, p: &Point, role: &'static str) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                space: self.to_string(),
                expected: self.dim(),
                got: p.len(),
                role,
            });
        }
        Ok(())
    }

    /// The metric of this space.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_dim(p, "first point")?;
        self.check_dim(q, "second point")?;
        Ok(self.raw_distance(p.coords(), q.coords()))
    }

    pub(crate) fn raw_distance(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            Space::RealLine | Space::Slope { .. } => libm::fabs(p[0] - q[0]),
            Space::Euclidean { .. } => {
                let s: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                libm::sqrt(s)
            }
            Space::Grid { .. } => sup_distance(p, q),
            Space::Product(l, r) => {
                let k = l.dim();
                let dl = l.raw_distance(&p[..k], &q[..k]);
                let dr = r.raw_distance(&p[k..], &q[k..]);
                dl.max(dr)
            }
        }
    }

    /// Projects a point onto the nearest point of the space (slopes are clamped).
    pub fn clamp(&self, p: &mut Point) {
        match self {
            Space::Slope { lo, hi } => {
                for c in p.0.iter_mut() {
                    *c = c.clamp(*lo, *hi);
                }
            }
            Space::Product(l, r) => {
                let k = l.dim();
                let (mut a, mut b) = (Point::from(&p.0[..k]), Point::from(&p.0[k..]));
                l.clamp(&mut a);
                r.clamp(&mut b);
                *p = Point::join(&a, &b);
            }
            _ => {}
        }
    }
}

/// Max metric on `left × right`: `max(d_X(x, x'), d_Y(y, y'))`.
pub fn product_distance(left: &Space, right: &Space, a: (&Point, &Point), b: (&Point, &Point)) -> Result<f64> {
    let dx = left.distance(a.0, b.0)?;
    let dy = right.distance(a.1, b.1)?;
    Ok(dx.max(dy))
}

pub(crate) fn sup_distance(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).fold(0.0_f64, |m, (a, b)| m.max(libm::fabs(a - b)))
}

pub(crate) fn grid_nodes(size: usize, lo: f64, hi: f64) -> Vec<f64> {
    match size {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let h = (hi - lo) / (size - 1) as f64;
            (0..size)
                .map(|i| if i + 1 == size { hi } else { lo + h * i as f64 })
                .collect()
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::RealLine => write!(f, "real"),
            Space::Euclidean { dim } => write!(f, "euclid:{dim}"),
            Space::Grid { size, lo, hi } => write!(f, "grid:{size}:{lo}:{hi}"),
            Space::Slope { lo, hi } => write!(f, "slope:{lo}:{hi}"),
            Space::Product(l, r) => write!(f, "product({l},{r})"),
        }
    }
}

impl FromStr for Space {
    type Err = Error;

    /// Parses `real`, `euclid:<dim>`, `grid:<size>:<lo>:<hi>`,
    /// `slope:<lo>:<hi>` and `product(<space>,<space>)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("unrecognised space descriptor `{s}`"));
        if let Some(inner) = s.strip_prefix("product(").and_then(|r| r.strip_suffix(')')) {
            let mut depth = 0usize;
            let split = inner.char_indices().find(|&(_, c)| {
                match c {
                    '(' => depth += 1,
                    ')' => depth = depth.saturating_sub(1),
                    ',' if depth == 0 => return true,
                    _ => {}
                }
                false
            });
            let (i, _) = split.ok_or_else(bad)?;
            return Ok(Space::product(inner[..i].parse()?, inner[i + 1..].parse()?));
        }
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let int = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["real"] => Ok(Space::RealLine),
            ["euclid", d] => Ok(Space::Euclidean { dim: int(d)? }),
            ["grid", n, lo, hi] => Ok(Space::grid(int(n)?, num(lo)?, num(hi)?)),
            ["slope", lo, hi] => {
                let (lo, hi) = (num(lo)?, num(hi)?);
                if lo > hi {
                    return Err(bad());
                }
                Ok(Space::Slope { lo, hi })
            }
            _ => Err(bad()),
        }
    }
}

/// A point: a finite coordinate vector.
#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn scalar(v: f64) -> Self {
        Point(alloc::vec![v])
    }

    pub fn constant(dim: usize, v: f64) -> Self {
        Point(alloc::vec![v; dim])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// First coordinate; the value of a one-dimensional point.
    pub fn value(&self) -> f64 {
        self.0[0]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Concatenation `(x, y)` as a point of a product space.
    pub fn join(x: &Point, y: &Point) -> Point {
        let mut c = x.0.clone();
        c.extend_from_slice(&y.0);
        Point(c)
    }

    /// Coordinate-wise `self + t`.
    pub fn offset(&self, t: f64) -> Point {
        Point(self.0.iter().map(|c| c + t).collect())
    }
}

impl From<&[f64]> for Point {
    fn from(c: &[f64]) -> Self {
        Point(c.to_vec())
    }
}

impl From<Vec<f64>> for Point {
    fn from(c: Vec<f64>) -> Self {
        Point(c)
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
