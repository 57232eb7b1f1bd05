use alloc::boxed::Box;
use alloc::string::String;

use crate::contraction::IterationTrace;
use crate::fiber::FiberTrace;
use crate::probe::{Condition, ProbeReport, Verdict};

/// Errors produced by the metric layer, the probes and the engines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A point does not have the coordinate count its space requires.
    #[error("{space}: expected {expected} coordinates, got {got} ({role})")]
    DimensionMismatch {
        space: String,
        expected: usize,
        got: usize,
        role: &'static str,
    },

    /// A slope coordinate fell outside its interval.
    #[error("{space}: coordinate {value} lies outside [{lo}, {hi}]")]
    OutOfRange {
        space: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// A map returned a point of the wrong shape or with non-finite coordinates.
    #[error("map evaluation failed at n = {n} ({coordinate}): {detail}")]
    Evaluation {
        n: usize,
        coordinate: &'static str,
        detail: String,
    },

    /// A contraction rate was not strictly below one.
    #[error("contraction rate {rate} is not < 1; certificate inapplicable")]
    Domain { rate: f64 },

    /// A declared rate is contradicted by a sampled Lipschitz estimate.
    #[error("declared rate {declared} violated at n = {n}: sampled Lip {estimate}")]
    DeclaredRateViolated { n: usize, declared: f64, estimate: f64 },

    /// Every sampled pair was closer than the degeneracy cutoff.
    #[error("all sampled pairs are degenerate (distance <= 1e-9); widen the sampling plan")]
    DegenerateSamples,

    /// A probe or plan was asked to work with an empty set.
    #[error("empty sample set: {0}")]
    EmptySamples(&'static str),

    /// A hypothesis probe did not pass, so certification is refused.
    #[error("certification refused: condition {} probe returned {verdict:?}", condition.label())]
    Refusal {
        condition: Condition,
        verdict: Verdict,
        report: Box<ProbeReport>,
    },

    /// The stationary or base engine ran out of iterations.
    #[error("no convergence within {max_iter} iterations")]
    NonConvergence {
        max_iter: usize,
        trace: Box<IterationTrace>,
    },

    /// The fiber engine ran out of recompositions.
    #[error("no fiber convergence within {max_n} recompositions")]
    FiberNonConvergence { max_n: usize, trace: Box<FiberTrace> },

    /// Invalid argument or parameter.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
