//! Sampling probes for Lipschitz constants and for the boundedness and
//! equicontinuity hypotheses of the skew-product convergence result.
//!
//! A probe is a falsifier. `Pass` means no violation was found at the
//! sampled resolution, never a proof.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::maps::{checked, eval_fiber, eval_seq, FiberFamily, FiberSlice, MapSequence, NthMap, SelfMap};
use crate::metric::{Point, Space};

/// Pairs closer than this are excluded from Lipschitz ratios.
pub const DEGENERATE_DISTANCE: f64 = 1e-9;

/// Which hypothesis a report speaks to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Condition {
    /// `{f_n(x_0)}` bounded in X.
    BaseBounded,
    /// `{h_n^x(y)}` bounded in Y over bounded sets.
    FiberBounded,
    /// `x ↦ h_n^x(y)` uniformly continuous on bounded sets of y.
    Equicontinuous,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::BaseBounded => "(1) base boundedness",
            Condition::FiberBounded => "(2) fiber boundedness",
            Condition::Equicontinuous => "(3) equicontinuity",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// One row of an equicontinuity modulus table.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModulusRow {
    pub delta: f64,
    pub observed: f64,
}

/// Outcome of a hypothesis probe, with the evidence behind it.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbeReport {
    pub condition: Condition,
    pub verdict: Verdict,
    /// `M` for base boundedness, `S` for fiber boundedness.
    pub bound: Option<f64>,
    /// `(δ, observed sup)` rows, equicontinuity only.
    pub modulus: Vec<ModulusRow>,
    /// Sample points backing the verdict.
    pub witnesses: Vec<Point>,
    /// Per-`n` observed distances, boundedness probes only.
    pub series: Vec<f64>,
    pub horizon: usize,
    pub seed: Option<u64>,
    pub note: String,
}

/// Sampled Lipschitz constant.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LipEstimate {
    pub value: f64,
    pub witness_pair: (Point, Point),
    pub sample_count: usize,
}

/// Where the sample points for a probe come from.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplingPlan {
    /// `count` evenly spaced values in `[lo, hi]`, endpoints included;
    /// multi-dimensional points are constant vectors.
    Uniform {
        lo: f64,
        hi: f64,
        count: usize,
    },
    /// Independent uniform coordinates in `[lo, hi]`.
    Random {
        lo: f64,
        hi: f64,
        count: usize,
        seed: u64,
    },
    /// The center plus `count - 1` random points of the sup-ball around it.
    Ball {
        center: Point,
        radius: f64,
        count: usize,
        seed: u64,
    },
    Explicit(Vec<Point>),
}

impl SamplingPlan {
    pub fn seed(&self) -> Option<u64> {
        match self {
            SamplingPlan::Random { seed, .. } | SamplingPlan::Ball { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    /// Points of the plan, clamped into `space`.
    pub fn points(&self, space: &Space) -> Vec<Point> {
        let dim = space.dim();
        let mut pts = match self {
            SamplingPlan::Uniform { lo, hi, count } => crate::metric::grid_nodes(*count, *lo, *hi)
                .into_iter()
                .map(|v| Point::constant(dim, v))
                .collect(),
            SamplingPlan::Random { lo, hi, count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| Point::new((0..dim).map(|_| rng.random_range(*lo..=*hi)).collect()))
                    .collect()
            }
            SamplingPlan::Ball {
                center,
                radius,
                count,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut v = Vec::with_capacity(*count);
                if *count > 0 {
                    v.push(center.clone());
                }
                for _ in 1..*count {
                    let c = center
                        .coords()
                        .iter()
                        .map(|c| c + radius * rng.random_range(-1.0..=1.0))
                        .collect();
                    v.push(Point::new(c));
                }
                v
            }
            SamplingPlan::Explicit(p) => p.clone(),
        };
        for p in &mut pts {
            space.clamp(p);
        }
        pts
    }
}

/// Largest sampled ratio `d(f p, f q) / d(p, q)` over non-degenerate pairs.
pub fn estimate_lipschitz<M: SelfMap + ?Sized>(map: &M, plan: &SamplingPlan) -> Result<LipEstimate> {
    let space = map.space();
    let points = plan.points(space);
    for p in &points {
        space.validate(p, "sample")?;
    }
    let images = points
        .iter()
        .map(|p| checked(space, map.apply(p), 0, "sample image"))
        .collect::<Result<Vec<_>>>()?;
    lipschitz_over(space, &points, &images)
}

fn lipschitz_over(space: &Space, points: &[Point], images: &[Point]) -> Result<LipEstimate> {
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = space.raw_distance(points[i].coords(), points[j].coords());
            if d <= DEGENERATE_DISTANCE {
                continue;
            }
            let r = space.raw_distance(images[i].coords(), images[j].coords()) / d;
            if best.is_none_or(|(b, _, _)| r > b) {
                best = Some((r, i, j));
            }
        }
    }
    let (value, i, j) = best.ok_or(Error::DegenerateSamples)?;
    Ok(LipEstimate {
        value,
        witness_pair: (points[i].clone(), points[j].clone()),
        sample_count: points.len(),
    })
}

/// Verdict rule shared by the two boundedness probes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundednessRule {
    /// Any observation above this is divergence.
    pub divergence_threshold: f64,
    /// Trailing fraction of the horizon examined for stabilization and growth.
    pub window_fraction: f64,
    /// Relative amount the window maximum may exceed the earlier maximum
    /// and still count as stabilized.
    pub stabilization_slack: f64,
}

impl Default for BoundednessRule {
    fn default() -> Self {
        BoundednessRule {
            divergence_threshold: 1e12,
            window_fraction: 0.2,
            stabilization_slack: 0.01,
        }
    }
}

impl BoundednessRule {
    fn window(&self, horizon: usize) -> usize {
        let w = libm::ceil(self.window_fraction * horizon as f64) as usize;
        w.max(2).min(horizon)
    }

    /// Classifies an observed series `s_1..s_H`.
    pub fn classify(&self, series: &[f64]) -> (Verdict, String) {
        let h = series.len();
        if let Some(k) = series
            .iter()
            .position(|s| !s.is_finite() || *s > self.divergence_threshold)
        {
            return (
                Verdict::Fail,
                format!(
                    "observation at n = {} exceeds divergence threshold {:e}",
                    k + 1,
                    self.divergence_threshold
                ),
            );
        }
        let w = self.window(h);
        if w < 1 || h <= w {
            return (Verdict::Inconclusive, "horizon too short to judge stabilization".into());
        }
        // w increments, starting with the step into the window
        let tail = &series[h - w - 1..];
        let inc: Vec<f64> = tail.windows(2).map(|p| p[1] - p[0]).collect();
        let increasing = inc.iter().all(|d| *d > 0.0);
        let accelerating = inc.windows(2).all(|p| p[1] >= p[0] * (1.0 - 1e-9));
        if increasing && accelerating {
            return (
                Verdict::Fail,
                format!("monotone non-decelerating growth over the final {w} steps"),
            );
        }
        let before = series[..h - w].iter().copied().fold(0.0_f64, f64::max);
        let within = series[h - w..].iter().copied().fold(0.0_f64, f64::max);
        if within <= before * (1.0 + self.stabilization_slack) {
            (Verdict::Pass, format!("running max stable over the final {w} steps"))
        } else {
            (
                Verdict::Inconclusive,
                format!("running max still rising in the final {w} steps ({before} -> {within})"),
            )
        }
    }
}

fn argmax(series: &[f64]) -> usize {
    let mut k = 0;
    for (i, s) in series.iter().enumerate() {
        if *s > series[k] {
            k = i;
        }
    }
    k
}

/// Observes `d(f_n(x_0), x_0)` for `n = 1..=horizon`.
pub fn probe_base_boundedness<S: MapSequence + ?Sized>(
    seq: &S,
    x0: &Point,
    horizon: usize,
    rule: &BoundednessRule,
) -> Result<ProbeReport> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("probe horizon must be >= 1".into()));
    }
    let space = seq.space();
    space.validate(x0, "x0")?;
    let mut series = Vec::with_capacity(horizon);
    let mut images = Vec::with_capacity(horizon);
    for n in 1..=horizon {
        let fx = eval_seq(seq, n, x0)?;
        series.push(space.raw_distance(fx.coords(), x0.coords()));
        images.push(fx);
    }
    let (verdict, note) = rule.classify(&series);
    let k = match verdict {
        Verdict::Fail => series
            .iter()
            .position(|s| *s > rule.divergence_threshold)
            .unwrap_or(horizon - 1),
        _ => argmax(&series),
    };
    let bound = (verdict == Verdict::Pass).then(|| series[argmax(&series)]);
    Ok(ProbeReport {
        condition: Condition::BaseBounded,
        verdict,
        bound,
        modulus: Vec::new(),
        witnesses: vec![x0.clone(), images.swap_remove(k)],
        series,
        horizon,
        seed: None,
        note: format!("{note}; witness at n = {}", k + 1),
    })
}

/// Observes `S_n = max d_Y(h_n^x(y), y_0)` over the region for `n = 1..=horizon`.
pub fn probe_fiber_boundedness<H: FiberFamily + ?Sized>(
    family: &H,
    region: &[(Point, Point)],
    y0: &Point,
    horizon: usize,
    rule: &BoundednessRule,
) -> Result<ProbeReport> {
    if region.is_empty() {
        return Err(Error::EmptySamples("fiber boundedness region"));
    }
    if horizon == 0 {
        return Err(Error::InvalidParameter("probe horizon must be >= 1".into()));
    }
    let (bs, fs) = (family.base_space(), family.fiber_space());
    fs.validate(y0, "y0")?;
    for (x, y) in region {
        bs.validate(x, "region base point")?;
        fs.validate(y, "region fiber point")?;
    }
    let mut series = Vec::with_capacity(horizon);
    let mut argmaxes = Vec::with_capacity(horizon);
    for n in 1..=horizon {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, (x, y)) in region.iter().enumerate() {
            let hy = eval_fiber(family, n, x, y)?;
            let d = fs.raw_distance(hy.coords(), y0.coords());
            if d > best.0 {
                best = (d, i);
            }
        }
        series.push(best.0);
        argmaxes.push(best.1);
    }
    let (verdict, note) = rule.classify(&series);
    let k = match verdict {
        Verdict::Fail => series
            .iter()
            .position(|s| *s > rule.divergence_threshold)
            .unwrap_or(horizon - 1),
        _ => argmax(&series),
    };
    let (x, y) = &region[argmaxes[k]];
    let bound = (verdict == Verdict::Pass).then(|| series[argmax(&series)]);
    Ok(ProbeReport {
        condition: Condition::FiberBounded,
        verdict,
        bound,
        modulus: Vec::new(),
        witnesses: vec![x.clone(), y.clone()],
        series,
        horizon,
        seed: None,
        note: format!("{note}; witness at n = {}", k + 1),
    })
}

/// Base pair `(x, x')` labelled with the δ bucket it belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct BasePair {
    pub x: Point,
    pub x_prime: Point,
    pub delta: f64,
}

/// Verdict rule for the equicontinuity probe.
#[derive(Clone, Debug, PartialEq)]
pub struct EquicontinuityRule {
    /// Final bucket sup below this passes outright.
    pub eps_pass: f64,
    /// Sups above this in the two smallest buckets fail.
    pub floor: f64,
    /// A monotone table also passes when the sup shrinks at least like
    /// `δ^trend_exponent` from the first bucket to the last.
    pub trend_exponent: f64,
}

impl Default for EquicontinuityRule {
    fn default() -> Self {
        EquicontinuityRule {
            eps_pass: 1e-4,
            floor: 1e-2,
            trend_exponent: 0.5,
        }
    }
}

impl EquicontinuityRule {
    pub fn classify(&self, table: &[ModulusRow]) -> (Verdict, String) {
        let Some(last) = table.last() else {
            return (Verdict::Inconclusive, "empty modulus table".into());
        };
        let tail = &table[table.len().saturating_sub(2)..];
        if tail.iter().all(|r| r.observed > self.floor) {
            return (
                Verdict::Fail,
                format!(
                    "observed sup stays above floor {:e} down to δ = {:e}",
                    self.floor, last.delta
                ),
            );
        }
        let monotone = table.windows(2).all(|p| p[1].observed <= p[0].observed);
        if monotone && last.observed < self.eps_pass {
            return (
                Verdict::Pass,
                format!("final sup {:e} < {:e}", last.observed, self.eps_pass),
            );
        }
        let first = &table[0];
        if monotone && table.len() >= 2 && first.observed > 0.0 {
            let want = libm::pow(last.delta / first.delta, self.trend_exponent);
            if last.observed / first.observed <= want {
                return (
                    Verdict::Pass,
                    format!("sup shrinks at least like δ^{} across buckets", self.trend_exponent),
                );
            }
        }
        (
            Verdict::Inconclusive,
            "modulus neither vanishing nor stuck above floor".into(),
        )
    }
}

/// Records, per δ bucket, the sup over `n ≤ n_max`, `y ∈ K` and bucket pairs of
/// `d_Y(h_n^x(y), h_n^{x'}(y))`.
pub fn probe_equicontinuity<H: FiberFamily + ?Sized>(
    family: &H,
    n_max: usize,
    fiber_samples: &[Point],
    base_pairs: &[BasePair],
    rule: &EquicontinuityRule,
) -> Result<ProbeReport> {
    if fiber_samples.is_empty() {
        return Err(Error::EmptySamples("equicontinuity fiber set K"));
    }
    if base_pairs.is_empty() {
        return Err(Error::EmptySamples("equicontinuity base pairs"));
    }
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be >= 1".into()));
    }
    if base_pairs.windows(2).any(|p| p[1].delta > p[0].delta) {
        return Err(Error::InvalidParameter(
            "base pairs must be sorted by decreasing δ".into(),
        ));
    }
    let (bs, fs) = (family.base_space(), family.fiber_space());
    for y in fiber_samples {
        fs.validate(y, "fiber sample")?;
    }
    let mut table: Vec<ModulusRow> = Vec::new();
    let mut witness: Vec<(f64, [Point; 3])> = Vec::new();
    for pair in base_pairs {
        bs.validate(&pair.x, "base pair")?;
        bs.validate(&pair.x_prime, "base pair")?;
        if table.last().is_none_or(|r| r.delta != pair.delta) {
            table.push(ModulusRow {
                delta: pair.delta,
                observed: 0.0,
            });
            witness.push((
                f64::NEG_INFINITY,
                [pair.x.clone(), pair.x_prime.clone(), fiber_samples[0].clone()],
            ));
        }
        let row = table.last_mut().unwrap();
        let wit = witness.last_mut().unwrap();
        for n in 1..=n_max {
            for y in fiber_samples {
                let a = eval_fiber(family, n, &pair.x, y)?;
                let b = eval_fiber(family, n, &pair.x_prime, y)?;
                let d = fs.raw_distance(a.coords(), b.coords());
                if d > row.observed {
                    row.observed = d;
                }
                if d > wit.0 {
                    *wit = (d, [pair.x.clone(), pair.x_prime.clone(), y.clone()]);
                }
            }
        }
    }
    let (verdict, note) = rule.classify(&table);
    let (_, [x, xp, y]) = witness.pop().unwrap();
    Ok(ProbeReport {
        condition: Condition::Equicontinuous,
        verdict,
        bound: None,
        modulus: table,
        witnesses: vec![x, xp, y],
        series: Vec::new(),
        horizon: n_max,
        seed: None,
        note,
    })
}

/// Knobs for the probe phase that precedes certified runs.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSettings {
    /// Horizon of the boundedness probes.
    pub horizon: usize,
    /// Number of maps `f_1..f_k` (and `h_1..h_k`) whose Lip is sampled.
    pub rate_probes: usize,
    /// Sample points per Lipschitz estimate.
    pub samples: usize,
    pub seed: u64,
    /// Minimum sampling radius around the anchors.
    pub radius: f64,
    /// Multiplier applied to sampled rates when none is declared.
    pub inflation: f64,
    pub boundedness: BoundednessRule,
    pub equicontinuity: EquicontinuityRule,
    /// `n_max` of the equicontinuity probe.
    pub equicontinuity_depth: usize,
    /// δ buckets, decreasing.
    pub deltas: Vec<f64>,
    /// Base points per δ bucket and fiber points in `K`.
    pub equicontinuity_points: usize,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings {
            horizon: 100,
            rate_probes: 50,
            samples: 16,
            seed: 0,
            radius: 1.0,
            inflation: 1.01,
            boundedness: BoundednessRule::default(),
            equicontinuity: EquicontinuityRule::default(),
            equicontinuity_depth: 20,
            deltas: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            equicontinuity_points: 6,
        }
    }
}

/// A contraction rate and where it came from.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateEstimate {
    /// Rate used by the engines: declared, or sampled max inflated.
    pub value: f64,
    pub declared: bool,
    /// Largest sampled Lip over the probed maps.
    pub sampled_max: f64,
    /// Index `n` of the map achieving `sampled_max`.
    pub witness_n: usize,
}

/// Samples `Lip(f_n)` for `n ≤ n_probe`. A declared rate is checked
/// against the samples (with `1e-9` slack) and used as is; otherwise the
/// sampled max is inflated by `inflation`.
pub fn estimate_sequence_rate<S: MapSequence + ?Sized>(
    seq: &S,
    plan: &SamplingPlan,
    n_probe: usize,
    inflation: f64,
) -> Result<RateEstimate> {
    let mut best = (0.0_f64, 1);
    for n in 1..=n_probe.max(1) {
        let est = estimate_lipschitz(&NthMap { seq, n }, plan).map_err(|e| at_n(e, n))?;
        if est.value > best.0 {
            best = (est.value, n);
        }
    }
    finish_rate(seq.declared_mu(), best, inflation)
}

/// Samples `Lip(y ↦ h_n^x(y))` for `n ≤ n_probe` and each sampled base point.
pub fn estimate_fiber_rate<H: FiberFamily + ?Sized>(
    family: &H,
    base_points: &[Point],
    fiber_plan: &SamplingPlan,
    n_probe: usize,
    inflation: f64,
) -> Result<RateEstimate> {
    if base_points.is_empty() {
        return Err(Error::EmptySamples("fiber rate base points"));
    }
    let mut best = (0.0_f64, 1);
    for n in 1..=n_probe.max(1) {
        for x in base_points {
            let est = estimate_lipschitz(&FiberSlice { family, n, x }, fiber_plan).map_err(|e| at_n(e, n))?;
            if est.value > best.0 {
                best = (est.value, n);
            }
        }
    }
    finish_rate(family.declared_lambda(), best, inflation)
}

fn at_n(e: Error, n: usize) -> Error {
    match e {
        Error::Evaluation { coordinate, detail, .. } => Error::Evaluation { n, coordinate, detail },
        other => other,
    }
}

fn finish_rate(declared: Option<f64>, (sampled, n): (f64, usize), inflation: f64) -> Result<RateEstimate> {
    let value = match declared {
        Some(d) => {
            if sampled > d + 1e-9 {
                return Err(Error::DeclaredRateViolated {
                    n,
                    declared: d,
                    estimate: sampled,
                });
            }
            d
        }
        None => sampled * inflation,
    };
    if !(value < 1.0) {
        return Err(Error::Domain { rate: value });
    }
    Ok(RateEstimate {
        value,
        declared: declared.is_some(),
        sampled_max: sampled,
        witness_n: n,
    })
}
