//! Stationary and non-stationary contraction iteration.
//!
//! The non-stationary engine stops on the a-priori tail bound
//! `μⁿ·M/(1−μ) + μⁿ·d(x, x₀)`, which is known before the orbit is computed.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::maps::{checked, eval_seq, MapSequence, SelfMap};
use crate::metric::Point;
use crate::probe::{
    estimate_sequence_rate, probe_base_boundedness, ProbeReport, ProbeSettings, RateEstimate, SamplingPlan, Verdict,
};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceRow {
    pub n: usize,
    pub point: Point,
    /// `d(x_n, x_{n-1})`, with `x_0` the start point.
    pub step_distance: f64,
    pub bound: Option<f64>,
}

/// Per-step record of an orbit.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
    /// `d(f(x*), x*)` for stationary runs.
    pub residual: Option<f64>,
}

impl IterationTrace {
    pub fn last_point(&self) -> Option<&Point> {
        self.rows.last().map(|r| &r.point)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointResult {
    pub point: Point,
    pub iterations: usize,
    pub trace: IterationTrace,
}

/// Iterates `f` from `x` until the step size certifies `tol`.
///
/// With a rate estimate `mu_hat < 1` the stop is the a-posteriori test
/// `μ̂·d(x_n, x_{n−1})/(1−μ̂) ≤ tol`; otherwise plain `d(x_n, x_{n−1}) ≤ tol`.
pub fn iterate_stationary<M: SelfMap + ?Sized>(
    f: &M,
    x: &Point,
    tol: f64,
    max_iter: usize,
    mu_hat: Option<f64>,
) -> Result<FixedPointResult> {
    check_tolerance(tol, max_iter)?;
    let space = f.space();
    space.validate(x, "start")?;
    let mu = mu_hat.filter(|m| (0.0..1.0).contains(m));
    let mut trace = IterationTrace::default();
    let mut prev = x.clone();
    for n in 1..=max_iter {
        let next = checked(space, f.apply(&prev), n, "base")?;
        let step = space.raw_distance(next.coords(), prev.coords());
        let bound = mu.map(|m| m * step / (1.0 - m));
        let done = bound.map_or(step <= tol, |b| b <= tol);
        trace.rows.push(TraceRow {
            n,
            point: next.clone(),
            step_distance: step,
            bound,
        });
        if done {
            let image = checked(space, f.apply(&next), n + 1, "base")?;
            trace.residual = Some(space.raw_distance(image.coords(), next.coords()));
            return Ok(FixedPointResult {
                point: next,
                iterations: n,
                trace,
            });
        }
        prev = next;
    }
    Err(Error::NonConvergence {
        max_iter,
        trace: trace.into(),
    })
}

/// `f_1 ∘ ⋯ ∘ f_n (x)`, innermost first: exactly `n` applications.
pub fn compose_eval<S: MapSequence + ?Sized>(seq: &S, n: usize, x: &Point) -> Result<Point> {
    if n == 0 {
        return Err(Error::InvalidParameter("composition depth must be >= 1".into()));
    }
    let mut z = x.clone();
    for k in (1..=n).rev() {
        z = eval_seq(seq, k, &z)?;
    }
    Ok(z)
}

/// `μⁿ·M/(1−μ)`, the tail of the Cauchy estimate.
pub fn apriori_bound(mu: f64, m: f64, n: usize) -> Result<f64> {
    if !(mu < 1.0) || mu.is_nan() {
        return Err(Error::Domain { rate: mu });
    }
    if mu < 0.0 || !(m >= 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "need mu >= 0 and M >= 0, got mu = {mu}, M = {m}"
        )));
    }
    Ok(powi(mu, n) * m / (1.0 - mu))
}

pub(crate) fn powi(base: f64, n: usize) -> f64 {
    libm::pow(base, n as f64)
}

/// `(μ, M, x₀)` with the tail bound at depth `n`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContractionCertificate {
    pub mu: f64,
    /// Observed `sup d(f_n(x₀), x₀)`; empirical, not proven.
    pub m: f64,
    pub x0: Point,
    pub n: usize,
    /// `μⁿ·M/(1−μ)`.
    pub bound: f64,
    pub mu_declared: bool,
}

impl ContractionCertificate {
    pub fn new(mu: f64, m: f64, x0: Point, n: usize, mu_declared: bool) -> Result<Self> {
        Ok(ContractionCertificate {
            bound: apriori_bound(mu, m, n)?,
            mu,
            m,
            x0,
            n,
            mu_declared,
        })
    }

    /// Bound on `d(f_1∘⋯∘f_n(x), x*)` for a start at distance `start_offset` from `x₀`.
    pub fn total_bound(&self, start_offset: f64) -> f64 {
        self.bound + powi(self.mu, self.n) * start_offset
    }
}

/// Outcome of the probe phase for a base sequence.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BaseHypotheses {
    pub x0: Point,
    pub rate: RateEstimate,
    pub boundedness: ProbeReport,
}

impl BaseHypotheses {
    pub fn mu(&self) -> f64 {
        self.rate.value
    }

    /// Empirical `M`.
    pub fn m(&self) -> f64 {
        self.boundedness.bound.unwrap_or(0.0)
    }

    /// Bound on `d(f_k∘⋯∘f_l(x₀), x₀)` over all `k ≤ l`: `M/(1−μ)`.
    pub fn composition_radius(&self) -> f64 {
        self.m() / (1.0 - self.mu())
    }

    pub fn certificate(&self, n: usize) -> Result<ContractionCertificate> {
        ContractionCertificate::new(self.mu(), self.m(), self.x0.clone(), n, self.rate.declared)
    }
}

/// Runs the boundedness probe, then the rate probe. Anything but a boundedness
/// `Pass` is a refusal; a rate `≥ 1` is a domain error.
pub fn certify_base<S: MapSequence + ?Sized>(seq: &S, x0: &Point, settings: &ProbeSettings) -> Result<BaseHypotheses> {
    let boundedness = probe_base_boundedness(seq, x0, settings.horizon, &settings.boundedness)?;
    if boundedness.verdict != Verdict::Pass {
        return Err(Error::Refusal {
            condition: boundedness.condition,
            verdict: boundedness.verdict,
            report: boundedness.into(),
        });
    }
    let m = boundedness.bound.unwrap_or(0.0);
    let plan = SamplingPlan::Ball {
        center: x0.clone(),
        radius: settings.radius.max(m),
        count: settings.samples,
        seed: settings.seed,
    };
    let rate = estimate_sequence_rate(seq, &plan, settings.rate_probes, settings.inflation)?;
    Ok(BaseHypotheses {
        x0: x0.clone(),
        rate,
        boundedness: ProbeReport {
            seed: Some(settings.seed),
            ..boundedness
        },
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonstationaryPolicy {
    pub tol: f64,
    pub max_n: usize,
    pub probe: ProbeSettings,
}

impl Default for NonstationaryPolicy {
    fn default() -> Self {
        NonstationaryPolicy {
            tol: 1e-10,
            max_n: 2000,
            probe: ProbeSettings::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonstatResult {
    pub point: Point,
    pub n_used: usize,
    pub certificate: ContractionCertificate,
    pub hypotheses: BaseHypotheses,
    pub trace: IterationTrace,
}

/// Probes the sequence, then runs [`run_certified`].
pub fn iterate_nonstationary<S: MapSequence + ?Sized>(
    seq: &S,
    x0: &Point,
    x: &Point,
    policy: &NonstationaryPolicy,
) -> Result<NonstatResult> {
    check_tolerance(policy.tol, policy.max_n)?;
    let hyp = certify_base(seq, x0, &policy.probe)?;
    run_certified(seq, hyp, x, policy.tol, policy.max_n)
}

/// Least `n ≥ 1` with `μⁿ·(M/(1−μ) + d(x, x₀)) ≤ tol`, if any is `≤ max_n`.
pub fn stopping_depth(mu: f64, m: f64, start_offset: f64, tol: f64, max_n: usize) -> Result<Option<usize>> {
    for n in 1..=max_n {
        if apriori_bound(mu, m, n)? + powi(mu, n) * start_offset <= tol {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Composes `f_1∘⋯∘f_n(x)` for `n = 1, 2, …` until the certificate drops below `tol`.
pub fn run_certified<S: MapSequence + ?Sized>(
    seq: &S,
    hyp: BaseHypotheses,
    x: &Point,
    tol: f64,
    max_n: usize,
) -> Result<NonstatResult> {
    check_tolerance(tol, max_n)?;
    let space = seq.space();
    space.validate(x, "start")?;
    let offset = space.raw_distance(x.coords(), hyp.x0.coords());
    let stop = stopping_depth(hyp.mu(), hyp.m(), offset, tol, max_n)?;
    let depth = stop.unwrap_or(max_n);
    let mut trace = IterationTrace::default();
    let mut prev = x.clone();
    for n in 1..=depth {
        let point = compose_eval(seq, n, x)?;
        let cert = hyp.certificate(n)?;
        trace.rows.push(TraceRow {
            n,
            step_distance: space.raw_distance(point.coords(), prev.coords()),
            bound: Some(cert.total_bound(offset)),
            point: point.clone(),
        });
        prev = point;
    }
    match stop {
        Some(n) => Ok(NonstatResult {
            point: prev,
            n_used: n,
            certificate: hyp.certificate(n)?,
            hypotheses: hyp,
            trace,
        }),
        None => Err(Error::NonConvergence {
            max_iter: max_n,
            trace: trace.into(),
        }),
    }
}

/// Uncertified orbit `f_1∘⋯∘f_n(x)`, `n = 1..=n_max`, with no bound column.
pub fn raw_orbit<S: MapSequence + ?Sized>(seq: &S, x: &Point, n_max: usize) -> Result<IterationTrace> {
    let space = seq.space();
    space.validate(x, "start")?;
    let mut trace = IterationTrace::default();
    let mut prev = x.clone();
    for n in 1..=n_max {
        let point = compose_eval(seq, n, x)?;
        trace.rows.push(TraceRow {
            n,
            step_distance: space.raw_distance(point.coords(), prev.coords()),
            bound: None,
            point: point.clone(),
        });
        prev = point;
    }
    Ok(trace)
}

fn check_tolerance(tol: f64, max: usize) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    if max == 0 {
        return Err(Error::InvalidParameter("iteration cap must be >= 1".into()));
    }
    Ok(())
}
