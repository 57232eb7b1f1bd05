//! Packaged systems: the three counterexamples, an affine oracle family,
//! the affine skew demo, a smooth invariant-graph demo and a projective
//! cocycle demo.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::fiber::{Pair, SkewSystem};
use crate::maps::MapSequence;
use crate::metric::Point;

mod affine;
mod cocycle;
mod counterexamples;
mod graph;

pub use affine::{build_affine_scenario, build_affine_skew_demo, OffsetSpec};
pub use cocycle::{build_projective_cocycle_demo, product_direction_slope, Matrix2};
pub use counterexamples::{
    build_condition2_counterexample, build_condition3_counterexample, build_remark_counterexample,
    geometric_partial_sum,
};
pub use graph::{build_smooth_graph_demo, derivative_mismatch, CosineGraphFamily, GraphFamily};

/// The system a scenario runs.
#[derive(Clone)]
pub enum System {
    Sequence(Arc<dyn MapSequence + Send + Sync>),
    Skew(SkewSystem),
}

impl core::fmt::Debug for System {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            System::Sequence(s) => write!(f, "Sequence({})", s.space()),
            System::Skew(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Limit {
    Point(Point),
    Pair(Pair),
}

/// What the engines should observe.
#[derive(Clone, Debug, PartialEq)]
pub enum Expected {
    /// Certified convergence, to the given limit when it is known in closed form.
    Converges(Option<Limit>),
    /// A hypothesis probe fails and the raw orbit grows without bound.
    Diverges,
    /// Raw runs from the two designated starts reach different limits.
    SplitLimit { starts: (Pair, Pair), limits: (Pair, Pair) },
}

/// Independent reference for a scenario.
#[derive(Clone, Debug, PartialEq)]
pub enum Oracle {
    Limit(Limit),
    /// `partial_sums[k]` is the raw orbit value at depth `k + 1`.
    PartialSums(Vec<f64>),
    /// The fiber limit is the grid derivative of the base limit.
    DerivativeOfBase,
}

/// Start point of a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Start {
    Base(Point),
    Skew(Pair),
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub system: System,
    /// Reference anchor `x₀` for sequence scenarios (skew systems carry their own).
    pub x0: Point,
    pub start: Start,
    pub oracle: Option<Oracle>,
    pub oracle_note: String,
    pub expected: Expected,
    /// Depth cap for uncertified raw orbits.
    pub raw_cap: usize,
    /// Construction details worth reporting (derived intervals, rates).
    pub notes: Vec<(String, String)>,
}

impl Scenario {
    pub fn sequence(&self) -> Option<&Arc<dyn MapSequence + Send + Sync>> {
        match &self.system {
            System::Sequence(s) => Some(s),
            System::Skew(_) => None,
        }
    }

    pub fn skew(&self) -> Option<&SkewSystem> {
        match &self.system {
            System::Skew(s) => Some(s),
            System::Sequence(_) => None,
        }
    }
}
