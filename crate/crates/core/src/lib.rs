//! Contraction iteration engines with certified error bounds.
//!
//! * [`metric`]: finite-dimensional complete metric spaces and their points.
//! * [`probe`]: sampled Lipschitz constants and hypothesis probes.
//! * [`contraction`]: stationary iteration and non-stationary composition
//!   `f_1∘⋯∘f_n(x)` stopped by an a-priori tail bound.
//! * [`fiber`]: skew products over a non-stationary base.
//! * [`scenarios`]: packaged systems with closed-form or brute-force oracles.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]
// `!(x < 1.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod contraction;
pub mod error;
pub mod fiber;
pub mod maps;
pub mod metric;
pub mod probe;
pub mod scenarios;

pub use contraction::{
    apriori_bound, compose_eval, iterate_nonstationary, iterate_stationary, ContractionCertificate, IterationTrace,
    NonstatResult, NonstationaryPolicy,
};
pub use error::{Error, Result};
pub use fiber::{
    convergence_diagnostics, iterate_fiber_nonstationary, iterate_fiber_stationary, skew_apply, skew_compose_eval,
    ConvergencePlan, DiagnosticTable, FiberPolicy, FiberResult, Pair, SkewSystem,
};
pub use maps::{FiberFamily, FiberMap, MapSequence, SelfMap};
pub use metric::{product_distance, Point, Space};
pub use probe::{Condition, LipEstimate, ProbeReport, ProbeSettings, SamplingPlan, Verdict};
