//! Skew products `F_n(x, y) = (f_n(x), h_n^x(y))`: stationary and
//! non-stationary fiber contraction, plus numerical bookkeeping of the
//! `A_j`, `B_j`, `C_j` quantities from the Cauchy argument for the fiber
//! coordinate.
//!
//! The base coordinate is certified by the a-priori bound. No geometric
//! rate is available for the fiber coordinate, so its stop is a
//! stability-window heuristic and results are labelled accordingly.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contraction::{certify_base, powi, BaseHypotheses, ContractionCertificate};
use crate::error::{Error, Result};
use crate::maps::{checked, eval_fiber, eval_seq, FiberFamily, FiberMap, MapSequence, SelfMap};
use crate::metric::{Point, Space};
use crate::probe::{
    estimate_fiber_rate, probe_equicontinuity, probe_fiber_boundedness, BasePair, ProbeReport, ProbeSettings,
    RateEstimate, SamplingPlan, Verdict,
};

/// A point of `X × Y`.
pub type Pair = (Point, Point);

/// Base sequence, fiber family and the reference anchors `(x₀, y₀)`.
#[derive(Clone)]
pub struct SkewSystem {
    pub base: Arc<dyn MapSequence + Send + Sync>,
    pub fiber: Arc<dyn FiberFamily + Send + Sync>,
    pub x0: Point,
    pub y0: Point,
}

impl core::fmt::Debug for SkewSystem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SkewSystem")
            .field("base_space", self.base.space())
            .field("fiber_space", self.fiber.fiber_space())
            .field("x0", &self.x0)
            .field("y0", &self.y0)
            .finish()
    }
}

impl SkewSystem {
    pub fn new(
        base: Arc<dyn MapSequence + Send + Sync>,
        fiber: Arc<dyn FiberFamily + Send + Sync>,
        x0: Point,
        y0: Point,
    ) -> Result<Self> {
        if base.space() != fiber.base_space() {
            return Err(Error::InvalidParameter(format!(
                "base space {} differs from fiber family base space {}",
                base.space(),
                fiber.base_space()
            )));
        }
        base.space().validate(&x0, "x0")?;
        fiber.fiber_space().validate(&y0, "y0")?;
        Ok(SkewSystem { base, fiber, x0, y0 })
    }

    pub fn base_space(&self) -> &Space {
        self.base.space()
    }

    pub fn fiber_space(&self) -> &Space {
        self.fiber.fiber_space()
    }

    pub fn validate(&self, p: &Pair) -> Result<()> {
        self.base_space().validate(&p.0, "base coordinate")?;
        self.fiber_space().validate(&p.1, "fiber coordinate")
    }

    pub fn distance(&self, a: &Pair, b: &Pair) -> f64 {
        let dx = self.base_space().raw_distance(a.0.coords(), b.0.coords());
        let dy = self.fiber_space().raw_distance(a.1.coords(), b.1.coords());
        dx.max(dy)
    }
}

/// `F_n(x, y) = (f_n(x), h_n^x(y))`.
pub fn skew_apply(system: &SkewSystem, n: usize, p: &Pair) -> Result<Pair> {
    let x = eval_seq(&*system.base, n, &p.0)?;
    let y = eval_fiber(&*system.fiber, n, &p.0, &p.1)?;
    Ok((x, y))
}

/// `F_1 ∘ ⋯ ∘ F_n (p)`, innermost first.
pub fn skew_compose_eval(system: &SkewSystem, n: usize, p: &Pair) -> Result<Pair> {
    if n == 0 {
        return Err(Error::InvalidParameter("composition depth must be >= 1".into()));
    }
    let mut z = p.clone();
    for k in (1..=n).rev() {
        z = skew_apply(system, k, &z)?;
    }
    Ok(z)
}

/// All suffix compositions `F_j ∘ ⋯ ∘ F_n (p)` for `j = n+1` (the identity) down to `1`.
/// Entry `j` of the result is `F_j∘⋯∘F_n(p)`; entry `n + 1` is `p`.
fn suffix_orbit(system: &SkewSystem, n: usize, p: &Pair) -> Result<Vec<Pair>> {
    let mut out = alloc::vec![p.clone(); n + 2];
    for k in (1..=n).rev() {
        out[k] = skew_apply(system, k, &out[k + 1])?;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FiberRow {
    pub n: usize,
    pub base: Point,
    pub fiber: Point,
    pub base_bound: Option<f64>,
    /// `d_Y(y_n, y_{n−1})`.
    pub fiber_step: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FiberTrace {
    pub rows: Vec<FiberRow>,
}

impl FiberTrace {
    pub fn last_pair(&self) -> Option<Pair> {
        self.rows.last().map(|r| (r.base.clone(), r.fiber.clone()))
    }

    /// `true` once the last `window` fiber values are pairwise within `tol`.
    fn fiber_settled(&self, space: &Space, window: usize, tol: f64) -> bool {
        let w = window.max(1);
        if self.rows.len() < w {
            return false;
        }
        let tail = &self.rows[self.rows.len() - w..];
        tail.iter().enumerate().all(|(i, a)| {
            tail[i + 1..]
                .iter()
                .all(|b| space.raw_distance(a.fiber.coords(), b.fiber.coords()) <= tol)
        })
    }

    fn diameter(&self, system: &SkewSystem) -> f64 {
        let mut d = 0.0_f64;
        for (i, a) in self.rows.iter().enumerate() {
            for b in &self.rows[i + 1..] {
                let dx = system.base_space().raw_distance(a.base.coords(), b.base.coords());
                let dy = system.fiber_space().raw_distance(a.fiber.coords(), b.fiber.coords());
                d = d.max(dx).max(dy);
            }
        }
        d
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryFiberOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Rate estimate for `f`.
    pub mu_hat: f64,
    /// Rate estimate for `y ↦ h^x(y)`, uniform in `x`.
    pub lambda_hat: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryFiberResult {
    pub pair: Pair,
    pub iterations: usize,
    /// `d(F(p*, q*), (p*, q*))`.
    pub residual: f64,
    pub trace: FiberTrace,
}

/// Iterates the single skew map `F(x, y) = (f(x), h^x(y))` until both
/// coordinates move less than `tol·(1 − max(μ̂, λ̂))` in one step.
pub fn iterate_fiber_stationary<M, H>(
    f: &M,
    h: &H,
    start: &Pair,
    opts: &StationaryFiberOptions,
) -> Result<StationaryFiberResult>
where
    M: SelfMap + ?Sized,
    H: FiberMap + ?Sized,
{
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::InvalidParameter("need tol > 0 and max_iter >= 1".into()));
    }
    let rate = opts.mu_hat.max(opts.lambda_hat);
    if !(rate < 1.0) {
        return Err(Error::Domain { rate });
    }
    let (bs, fs) = (f.space(), h.fiber_space());
    bs.validate(&start.0, "start base")?;
    fs.validate(&start.1, "start fiber")?;
    let threshold = opts.tol * (1.0 - rate);
    let apply = |p: &Pair, n: usize| -> Result<Pair> {
        let x = checked(bs, f.apply(&p.0), n, "base")?;
        let y = checked(fs, h.apply(&p.0, &p.1), n, "fiber")?;
        Ok((x, y))
    };
    let mut trace = FiberTrace::default();
    let mut cur = start.clone();
    for n in 1..=opts.max_iter {
        let next = apply(&cur, n)?;
        let dx = bs.raw_distance(next.0.coords(), cur.0.coords());
        let dy = fs.raw_distance(next.1.coords(), cur.1.coords());
        trace.rows.push(FiberRow {
            n,
            base: next.0.clone(),
            fiber: next.1.clone(),
            base_bound: None,
            fiber_step: dy,
        });
        cur = next;
        if dx < threshold && dy < threshold {
            let image = apply(&cur, n + 1)?;
            let residual = bs
                .raw_distance(image.0.coords(), cur.0.coords())
                .max(fs.raw_distance(image.1.coords(), cur.1.coords()));
            return Ok(StationaryFiberResult {
                pair: cur,
                iterations: n,
                residual,
                trace,
            });
        }
    }
    Err(Error::FiberNonConvergence {
        max_n: opts.max_iter,
        trace: trace.into(),
    })
}

/// Probe-phase outcome for a skew system.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SkewHypotheses {
    pub base: BaseHypotheses,
    pub lambda: RateEstimate,
    pub fiber_bounded: ProbeReport,
    pub equicontinuity: ProbeReport,
}

impl SkewHypotheses {
    pub fn lambda(&self) -> f64 {
        self.lambda.value
    }

    /// Empirical `S`.
    pub fn s(&self) -> f64 {
        self.fiber_bounded.bound.unwrap_or(0.0)
    }

    /// `L = S/(1 − λ)`.
    pub fn l(&self) -> f64 {
        self.s() / (1.0 - self.lambda())
    }

    /// Certification plan for tolerance `epsilon`, taking `δ` from the
    /// equicontinuity modulus table.
    pub fn plan(&self, epsilon: f64) -> Result<ConvergencePlan> {
        let delta = self
            .equicontinuity
            .modulus
            .iter()
            .filter(|r| r.observed <= epsilon)
            .map(|r| r.delta)
            .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))))
            .ok_or_else(|| Error::InvalidParameter(format!("no δ bucket has observed sup <= ε = {epsilon}")))?;
        ConvergencePlan::derive(
            epsilon,
            self.lambda(),
            self.l(),
            self.base.mu(),
            self.base.composition_radius(),
            delta,
        )
    }
}

fn refuse(report: ProbeReport) -> Error {
    Error::Refusal {
        condition: report.condition,
        verdict: report.verdict,
        report: report.into(),
    }
}

/// Runs every hypothesis probe for a skew system, refusing on any non-`Pass`.
pub fn certify_skew(system: &SkewSystem, settings: &ProbeSettings) -> Result<SkewHypotheses> {
    let base = certify_base(&*system.base, &system.x0, settings)?;
    let (bs, fs) = (system.base_space(), system.fiber_space());
    let radius = settings.radius.max(base.composition_radius());
    let base_points = SamplingPlan::Ball {
        center: system.x0.clone(),
        radius,
        count: settings.samples.max(1),
        seed: settings.seed,
    }
    .points(bs);

    let region: Vec<Pair> = base_points.iter().map(|x| (x.clone(), system.y0.clone())).collect();
    let mut fiber_bounded = probe_fiber_boundedness(
        &*system.fiber,
        &region,
        &system.y0,
        settings.horizon,
        &settings.boundedness,
    )?;
    fiber_bounded.seed = Some(settings.seed);
    if fiber_bounded.verdict != Verdict::Pass {
        return Err(refuse(fiber_bounded));
    }
    let s = fiber_bounded.bound.unwrap_or(0.0);

    let k = settings.equicontinuity_points.max(1).min(base_points.len());
    let fiber_plan = SamplingPlan::Ball {
        center: system.y0.clone(),
        radius: settings.radius.max(s),
        count: settings.samples.max(2),
        seed: settings.seed.wrapping_add(1),
    };
    let lambda = estimate_fiber_rate(
        &*system.fiber,
        &base_points[..k],
        &fiber_plan,
        settings.rate_probes,
        settings.inflation,
    )?;
    let l = s / (1.0 - lambda.value);

    let fiber_samples = SamplingPlan::Ball {
        center: system.y0.clone(),
        radius: settings.radius.max(l),
        count: k,
        seed: settings.seed.wrapping_add(2),
    }
    .points(fs);
    let pairs = base_pairs(bs, &base_points[..k], &settings.deltas, settings.seed.wrapping_add(3));
    let mut equicontinuity = probe_equicontinuity(
        &*system.fiber,
        settings.equicontinuity_depth,
        &fiber_samples,
        &pairs,
        &settings.equicontinuity,
    )?;
    equicontinuity.seed = Some(settings.seed);
    if equicontinuity.verdict != Verdict::Pass {
        return Err(refuse(equicontinuity));
    }
    Ok(SkewHypotheses {
        base,
        lambda,
        fiber_bounded,
        equicontinuity,
    })
}

/// For each δ and base point `x`, a partner `x' = x + δ·u` with `u` random in
/// the unit sup-sphere.
fn base_pairs(space: &Space, points: &[Point], deltas: &[f64], seed: u64) -> Vec<BasePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sorted = deltas.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut out = Vec::with_capacity(points.len() * sorted.len());
    for &delta in &sorted {
        for x in points {
            let dim = x.len();
            let mut u: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
            if dim > 0 {
                let i = rng.random_range(0..dim);
                u[i] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            }
            let mut xp = Point::new(x.coords().iter().zip(&u).map(|(c, v)| c + delta * v).collect());
            space.clamp(&mut xp);
            out.push(BasePair {
                x: x.clone(),
                x_prime: xp,
                delta,
            });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberPolicy {
    pub tol: f64,
    pub max_n: usize,
    /// Number of consecutive recompositions whose fiber values must agree within `tol`.
    pub stability_window: usize,
    pub probe: ProbeSettings,
    /// ε for the diagnostic table attached to results; `None` skips it.
    pub diagnostic_epsilon: Option<f64>,
    /// Re-run from a perturbed start and record the discrepancy.
    pub verify_start: bool,
}

impl Default for FiberPolicy {
    fn default() -> Self {
        FiberPolicy {
            tol: 1e-10,
            max_n: 900,
            stability_window: 10,
            probe: ProbeSettings::default(),
            diagnostic_epsilon: Some(1e-3),
            verify_start: true,
        }
    }
}

/// Second run from a perturbed start.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StartCheck {
    pub start: Pair,
    /// `None` if the perturbed run did not settle within `max_n`.
    pub pair: Option<Pair>,
    /// Product distance between the two final pairs.
    pub discrepancy: Option<f64>,
    /// `discrepancy ≤ 5·tol`.
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberResult {
    pub pair: Pair,
    pub n_used: usize,
    pub base_certificate: ContractionCertificate,
    pub hypotheses: SkewHypotheses,
    /// Always `"certified base / heuristic fiber"`.
    pub certification: &'static str,
    pub plan: Option<ConvergencePlan>,
    pub diagnostics: Option<DiagnosticTable>,
    pub start_check: Option<StartCheck>,
    pub trace: FiberTrace,
}

pub const FIBER_CERTIFICATION: &str = "certified base / heuristic fiber";

/// Probes the system, then recomposes `F_1∘⋯∘F_n(p)` for growing `n` until
/// the base bound is below `tol` and the fiber coordinate has settled.
pub fn iterate_fiber_nonstationary(system: &SkewSystem, start: &Pair, policy: &FiberPolicy) -> Result<FiberResult> {
    if !(policy.tol > 0.0) || policy.max_n == 0 {
        return Err(Error::InvalidParameter("need tol > 0 and max_n >= 1".into()));
    }
    system.validate(start)?;
    let hypotheses = certify_skew(system, &policy.probe)?;
    let (n_used, trace) = run_fiber(system, &hypotheses.base, start, policy)?;
    let pair = trace.last_pair().expect("at least one row");

    let start_check = if policy.verify_start {
        let off = 0.1 * trace.diameter(system);
        let off = if off > 0.0 { off } else { 0.1 };
        let mut p = (start.0.offset(off), start.1.offset(off));
        system.base_space().clamp(&mut p.0);
        system.fiber_space().clamp(&mut p.1);
        let other = run_fiber(system, &hypotheses.base, &p, policy)
            .ok()
            .and_then(|(_, t)| t.last_pair());
        let discrepancy = other.as_ref().map(|o| system.distance(o, &pair));
        Some(StartCheck {
            start: p,
            agrees: discrepancy.is_some_and(|d| d <= 5.0 * policy.tol),
            pair: other,
            discrepancy,
        })
    } else {
        None
    };

    let plan = policy.diagnostic_epsilon.and_then(|eps| hypotheses.plan(eps).ok());
    let diagnostics = match &plan {
        Some(plan) => {
            let n = plan.n0 + plan.n1 + 1;
            Some(convergence_diagnostics(system, plan, 2 * n, n)?)
        }
        None => None,
    };

    Ok(FiberResult {
        pair,
        n_used,
        base_certificate: hypotheses.base.certificate(n_used)?,
        hypotheses,
        certification: FIBER_CERTIFICATION,
        plan,
        diagnostics,
        start_check,
        trace,
    })
}

fn run_fiber(
    system: &SkewSystem,
    base: &BaseHypotheses,
    start: &Pair,
    policy: &FiberPolicy,
) -> Result<(usize, FiberTrace)> {
    let offset = system.base_space().raw_distance(start.0.coords(), base.x0.coords());
    let mut trace = FiberTrace::default();
    let mut prev_y = start.1.clone();
    for n in 1..=policy.max_n {
        let (x, y) = skew_compose_eval(system, n, start)?;
        let bound = base.certificate(n)?.total_bound(offset);
        let step = system.fiber_space().raw_distance(y.coords(), prev_y.coords());
        prev_y = y.clone();
        trace.rows.push(FiberRow {
            n,
            base: x,
            fiber: y,
            base_bound: Some(bound),
            fiber_step: step,
        });
        if bound <= policy.tol && trace.fiber_settled(system.fiber_space(), policy.stability_window, policy.tol) {
            return Ok((n, trace));
        }
    }
    Err(Error::FiberNonConvergence {
        max_n: policy.max_n,
        trace: trace.into(),
    })
}

/// Uncertified recomposition of `F_1∘⋯∘F_n(p)` for `n = 1..=n_max`, stopping
/// early once the fiber coordinate has settled within `tol` over `window`
/// recompositions (when `settle` is given).
pub fn raw_skew_orbit(
    system: &SkewSystem,
    start: &Pair,
    n_max: usize,
    settle: Option<(f64, usize)>,
) -> Result<FiberTrace> {
    system.validate(start)?;
    let mut trace = FiberTrace::default();
    let mut prev_y = start.1.clone();
    for n in 1..=n_max {
        let (x, y) = skew_compose_eval(system, n, start)?;
        let step = system.fiber_space().raw_distance(y.coords(), prev_y.coords());
        prev_y = y.clone();
        trace.rows.push(FiberRow {
            n,
            base: x,
            fiber: y,
            base_bound: None,
            fiber_step: step,
        });
        if let Some((tol, window)) = settle {
            if trace.fiber_settled(system.fiber_space(), window, tol) {
                break;
            }
        }
    }
    Ok(trace)
}

/// The existential choices `N₀`, `N₁`, `δ` of the Cauchy argument, made concrete.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergencePlan {
    pub epsilon: f64,
    pub n0: usize,
    pub n1: usize,
    pub delta: f64,
    /// `S/(1−λ)`.
    pub l: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Bound on base compositions started at `x₀`.
    pub m: f64,
    pub derivation_log: String,
}

impl ConvergencePlan {
    /// Minimal `N₀ ≥ 1` with `2λ^(N₀−1)L < ε` and minimal `N₁ ≥ 0` with `μ^N₁·M < δ`.
    pub fn derive(epsilon: f64, lambda: f64, l: f64, mu: f64, m: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need ε > 0 and δ > 0, got {epsilon}, {delta}"
            )));
        }
        if !(lambda < 1.0) || lambda < 0.0 {
            return Err(Error::Domain { rate: lambda });
        }
        if !(mu < 1.0) || mu < 0.0 {
            return Err(Error::Domain { rate: mu });
        }
        const CAP: usize = 100_000;
        let n0 = (1..CAP)
            .find(|&k| 2.0 * powi(lambda, k - 1) * l < epsilon)
            .ok_or_else(|| Error::InvalidParameter("N0 search exhausted".into()))?;
        let n1 = (0..CAP)
            .find(|&k| powi(mu, k) * m < delta)
            .ok_or_else(|| Error::InvalidParameter("N1 search exhausted".into()))?;
        let derivation_log = format!(
            "L = {l:e}; N0 = {n0}: 2*{lambda}^{} * L = {:e} < eps = {epsilon:e}; \
             delta = {delta:e}; N1 = {n1}: {mu}^{n1} * M = {:e} < delta (M = {m:e})",
            n0 - 1,
            2.0 * powi(lambda, n0 - 1) * l,
            powi(mu, n1) * m,
        );
        let plan = ConvergencePlan {
            epsilon,
            n0,
            n1,
            delta,
            l,
            lambda,
            mu,
            m,
            derivation_log,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2.0 * powi(self.lambda, self.n0.saturating_sub(1)) * self.l < self.epsilon) || self.n0 == 0 {
            return Err(Error::InvalidParameter(format!(
                "plan violates 2 λ^(N0-1) L < ε with N0 = {}",
                self.n0
            )));
        }
        if !(powi(self.mu, self.n1) * self.m < self.delta) {
            return Err(Error::InvalidParameter(format!(
                "plan violates μ^N1 M < δ with N1 = {}",
                self.n1
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Inequalities {
    /// `C_j ≤ A_j + B_j`
    #[cfg_attr(feature = "serde", serde(rename = "CAB"))]
    pub cab: bool,
    /// `A_j ≤ λ·C_{j+1}`
    #[cfg_attr(feature = "serde", serde(rename = "AC"))]
    pub ac: bool,
    /// `B_j < ε`
    #[cfg_attr(feature = "serde", serde(rename = "Beps"))]
    pub beps: bool,
    /// `C_j ≤ 2L`
    #[cfg_attr(feature = "serde", serde(rename = "C2L"))]
    pub c2l: bool,
}

impl Inequalities {
    pub fn all(&self) -> bool {
        self.cab && self.ac && self.beps && self.c2l
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticRow {
    pub j: usize,
    #[cfg_attr(feature = "serde", serde(rename = "A"))]
    pub a: f64,
    #[cfg_attr(feature = "serde", serde(rename = "B"))]
    pub b: f64,
    #[cfg_attr(feature = "serde", serde(rename = "C"))]
    pub c: f64,
    pub inequalities: Inequalities,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticTable {
    pub m: usize,
    pub n: usize,
    pub rows: Vec<DiagnosticRow>,
}

impl DiagnosticTable {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.inequalities.all())
    }
}

fn le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + 1e-12 * (1.0 + libm::fabs(rhs))
}

/// Evaluates `A_j`, `B_j`, `C_j` for `j = 1..=N₀` on the reference orbit from
/// `(x₀, y₀)`, comparing depths `m ≥ n > N₀ + N₁`.
///
/// With `P_j^k = π_Y F_j∘⋯∘F_k(x₀, y₀)` and `X_j^k = π_X F_j∘⋯∘F_k(x₀, y₀)`:
/// `A_j = d(P_j^m, h_j^{X_{j+1}^m}(P_{j+1}^n))`,
/// `B_j = d(h_j^{X_{j+1}^m}(P_{j+1}^n), P_j^n)`,
/// `C_j = d(P_j^m, P_j^n)`.
pub fn convergence_diagnostics(
    system: &SkewSystem,
    plan: &ConvergencePlan,
    m: usize,
    n: usize,
) -> Result<DiagnosticTable> {
    plan.validate()?;
    if m < n {
        return Err(Error::InvalidParameter(format!("need m >= n, got m = {m}, n = {n}")));
    }
    if n <= plan.n0 + plan.n1 {
        return Err(Error::InvalidParameter(format!(
            "need n > N0 + N1 = {}, got n = {n}",
            plan.n0 + plan.n1
        )));
    }
    let anchor = (system.x0.clone(), system.y0.clone());
    let long = suffix_orbit(system, m, &anchor)?;
    let short = suffix_orbit(system, n, &anchor)?;
    let fs = system.fiber_space();
    let d = |a: &Point, b: &Point| fs.raw_distance(a.coords(), b.coords());
    let c: Vec<f64> = (0..=plan.n0 + 1)
        .map(|j| if j == 0 { 0.0 } else { d(&long[j].1, &short[j].1) })
        .collect();
    let mut rows = Vec::with_capacity(plan.n0);
    for j in 1..=plan.n0 {
        let mixed = eval_fiber(&*system.fiber, j, &long[j + 1].0, &short[j + 1].1)?;
        let a = d(&long[j].1, &mixed);
        let b = d(&mixed, &short[j].1);
        rows.push(DiagnosticRow {
            j,
            a,
            b,
            c: c[j],
            inequalities: Inequalities {
                cab: le(c[j], a + b),
                ac: le(a, plan.lambda * c[j + 1]),
                beps: b < plan.epsilon,
                c2l: le(c[j], 2.0 * plan.l),
            },
        });
    }
    Ok(DiagnosticTable { m, n, rows })
}
