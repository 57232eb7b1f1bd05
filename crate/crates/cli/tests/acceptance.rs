//! The eleven acceptance criteria, one PASS/FAIL line each. Exits non-zero
//! if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nscontract_core::contraction::{compose_eval, iterate_nonstationary, iterate_stationary, NonstationaryPolicy};
use nscontract_core::fiber::{
    certify_skew, convergence_diagnostics, iterate_fiber_nonstationary, raw_skew_orbit, skew_compose_eval, FiberPolicy,
    Pair,
};
use nscontract_core::maps::{FnMap, FnSequence};
use nscontract_core::probe::{probe_base_boundedness, BoundednessRule, Condition, ProbeSettings, Verdict};
use nscontract_core::scenarios::*;
use nscontract_core::{Error, Point, Space};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scalar_pair(x: f64, y: f64) -> Pair {
    (Point::scalar(x), Point::scalar(y))
}

fn skew_start(s: &Scenario) -> Pair {
    match &s.start {
        Start::Skew(p) => p.clone(),
        Start::Base(_) => panic!("{} is not a skew scenario", s.name),
    }
}

fn base_start(s: &Scenario) -> Point {
    match &s.start {
        Start::Base(x) => x.clone(),
        Start::Skew(_) => panic!("{} is not a sequence scenario", s.name),
    }
}

/// Root of `cos x = x` on `[0, 1]` by bisection.
fn dottie_bisection() -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid.cos() - mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let f = FnMap::new(Space::RealLine, |x: &Point| Point::scalar(x.value().cos()));
    // after one step the orbit lies in [cos 1, 1], where |cos'| ≤ sin 1
    let r = iterate_stationary(&f, &Point::scalar(0.0), 1e-12, 10_000, Some(1f64.sin())).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let err = (r.point.value() - dottie_bisection()).abs();
    ensure(err <= 1e-8, || format!("error {err:e} vs bisection"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "|x - x_bisect| = {err:.1e} after {} steps in {elapsed:.1?}",
        r.iterations
    ))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let seq = FnSequence::new(Space::RealLine, |n, x: &Point| {
        Point::scalar(0.5 * x.value() + 0.5f64.powi(n as i32))
    })
    .with_declared_mu(0.5);
    let policy = NonstationaryPolicy::default();
    let x0 = Point::scalar(0.0);
    let first = iterate_nonstationary(&seq, &x0, &x0, &policy).map_err(|e| e.to_string())?;
    let err = (first.point.value() - 2.0 / 3.0).abs();
    ensure(err <= 1e-10, || format!("limit error {err:e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut spread = 0.0_f64;
    for _ in 0..10 {
        let x = Point::scalar(rng.random_range(-100.0..100.0));
        let r = iterate_nonstationary(&seq, &x0, &x, &policy).map_err(|e| e.to_string())?;
        spread = spread.max((r.point.value() - first.point.value()).abs());
    }
    let elapsed = t.elapsed();
    ensure(spread <= 2.0 * policy.tol, || {
        format!("start spread {spread:e} > 2 tol")
    })?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "|x - 2/3| = {err:.1e}, spread over 10 starts {spread:.1e}, {elapsed:.1?}"
    ))
}

/// Rounding slack for comparing a computed distance with its bound.
fn slack(reference: &Point) -> f64 {
    8.0 * f64::EPSILON * (1.0 + reference.coords().iter().fold(0.0_f64, |m, x| m.max(x.abs())))
}

fn check_sequence_bound(s: &Scenario) -> Result<(usize, f64), String> {
    let seq = s.sequence().unwrap();
    let x = base_start(s);
    let r = iterate_nonstationary(&**seq, &s.x0, &x, &NonstationaryPolicy::default()).map_err(|e| e.to_string())?;
    let reference = compose_eval(&**seq, 10 * r.n_used, &x).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    for row in &r.trace.rows {
        let d = seq.space().distance(&row.point, &reference).unwrap();
        let bound = row.bound.ok_or("row without bound")?;
        ensure(d <= bound + slack(&reference), || {
            format!("{} n = {}: {d:e} > {bound:e}", s.name, row.n)
        })?;
        worst = worst.max(d / bound);
    }
    Ok((r.trace.rows.len(), worst))
}

fn check_skew_bound(s: &Scenario) -> Result<(usize, f64), String> {
    let sys = s.skew().unwrap();
    let start = skew_start(s);
    let r = iterate_fiber_nonstationary(sys, &start, &FiberPolicy::default()).map_err(|e| e.to_string())?;
    let reference = compose_eval(&*sys.base, 10 * r.n_used, &start.0).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    for row in &r.trace.rows {
        let d = sys.base_space().distance(&row.base, &reference).unwrap();
        let bound = row.base_bound.ok_or("row without bound")?;
        ensure(d <= bound + slack(&reference), || {
            format!("{} n = {}: {d:e} > {bound:e}", s.name, row.n)
        })?;
        worst = worst.max(d / bound);
    }
    Ok((r.trace.rows.len(), worst))
}

fn criterion_3() -> Outcome {
    let cat = [[2, 1], [1, 1]];
    let sequences = [
        build_affine_scenario(0.5, OffsetSpec::Constant(1.0)),
        build_affine_scenario(0.5, OffsetSpec::Geometric(0.5)),
        build_affine_scenario(0.9, OffsetSpec::Sine { amplitude: 2.0 }),
        build_affine_scenario(-0.5, OffsetSpec::Alternating { odd: 1.0, even: -2.0 }),
        build_projective_cocycle_demo(vec![cat]),
        build_projective_cocycle_demo(vec![cat, [[1, 1], [1, 2]]]),
    ];
    let (mut rows, mut scenarios, mut worst) = (0, 0, 0.0_f64);
    for s in sequences {
        let s = s.map_err(|e| e.to_string())?;
        let (n, w) = check_sequence_bound(&s)?;
        rows += n;
        scenarios += 1;
        worst = worst.max(w);
    }
    let skews = [
        build_affine_skew_demo(),
        build_smooth_graph_demo(128, CosineGraphFamily::default()).map_err(|e| e.to_string())?,
    ];
    for s in &skews {
        let (n, w) = check_skew_bound(s)?;
        rows += n;
        scenarios += 1;
        worst = worst.max(w);
    }
    Ok(format!(
        "0 violations over {rows} rows in {scenarios} scenarios (max error/bound {worst:.2})"
    ))
}

fn criterion_4() -> Outcome {
    let s = build_remark_counterexample();
    let seq = s.sequence().unwrap();
    for (n, want) in [(1, 3.0), (2, 7.5), (3, 14.25)] {
        let got = compose_eval(&**seq, n, &s.x0).map_err(|e| e.to_string())?.value();
        ensure((got - want).abs() <= 1e-12, || format!("n = {n}: {got} != {want}"))?;
    }
    let p = probe_base_boundedness(&**seq, &s.x0, 40, &BoundednessRule::default()).map_err(|e| e.to_string())?;
    ensure(p.verdict == Verdict::Fail, || format!("probe verdict {:?}", p.verdict))?;
    Ok(format!(
        "partial sums 3, 7.5, 14.25; boundedness probe Fail at horizon 40 ({})",
        p.note
    ))
}

fn expect_refusal(r: Result<nscontract_core::fiber::FiberResult, Error>, want: Condition) -> Result<(), String> {
    match r {
        Err(Error::Refusal { condition, verdict, .. }) if condition == want && verdict == Verdict::Fail => Ok(()),
        Err(e) => Err(format!("expected {} Fail, got {e}", want.label())),
        Ok(_) => Err(format!("expected {} Fail, but the run certified", want.label())),
    }
}

fn criterion_5() -> Outcome {
    let s = build_condition2_counterexample();
    let sys = s.skew().unwrap();
    expect_refusal(
        iterate_fiber_nonstationary(sys, &skew_start(&s), &FiberPolicy::default()),
        Condition::FiberBounded,
    )?;
    let mut worst = 0.0_f64;
    for x in [0.0, 1.0, -7.5] {
        let r = iterate_nonstationary(&*sys.base, &s.x0, &Point::scalar(x), &NonstationaryPolicy::default())
            .map_err(|e| e.to_string())?;
        worst = worst.max(r.point.value().abs());
    }
    ensure(worst <= 1e-10, || format!("base limit off by {worst:e}"))?;
    Ok(format!(
        "(2) fiber boundedness Fail; base certified to 0 within {worst:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let s = build_condition3_counterexample();
    let sys = s.skew().unwrap();
    let mut limits = Vec::new();
    for (start, want) in [
        (scalar_pair(0.0, 1.0), scalar_pair(0.0, 0.0)),
        (scalar_pair(1.0, 1.0), scalar_pair(0.0, 0.25)),
    ] {
        let got = raw_skew_orbit(sys, &start, s.raw_cap, Some((1e-12, 10)))
            .map_err(|e| e.to_string())?
            .last_pair()
            .ok_or("empty orbit")?;
        let d = sys.distance(&got, &want);
        ensure(d <= 1e-9, || format!("from {start:?}: {got:?}, off by {d:e}"))?;
        limits.push(got);
    }
    expect_refusal(
        iterate_fiber_nonstationary(sys, &scalar_pair(1.0, 1.0), &FiberPolicy::default()),
        Condition::Equicontinuous,
    )?;
    let gap = (limits[1].1.value() - limits[0].1.value()).abs();
    ensure((gap - 0.25).abs() <= 1e-9, || format!("fiber gap {gap}"))?;
    Ok(format!(
        "raw limits (0, 0) and (0, 0.25); (3) equicontinuity Fail; gap {gap:.12}"
    ))
}

fn criterion_7() -> Outcome {
    let s = build_affine_skew_demo();
    let sys = s.skew().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let origin = scalar_pair(0.0, 0.0);
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let start = scalar_pair(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let r = iterate_fiber_nonstationary(sys, &start, &FiberPolicy::default()).map_err(|e| e.to_string())?;
        let brute = skew_compose_eval(sys, 200, &start).map_err(|e| e.to_string())?;
        let d = sys.distance(&r.pair, &brute);
        ensure(d <= 1e-8, || {
            format!("from {start:?}: {:?} vs brute force {brute:?}", r.pair)
        })?;
        ensure(sys.distance(&brute, &origin) <= 1e-8, || {
            format!("brute force orbit at {brute:?}")
        })?;
        worst = worst.max(d);
    }
    let mut worst_rel = 0.0_f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=12);
        let start = scalar_pair(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let (px, _) = skew_compose_eval(sys, n, &start).map_err(|e| e.to_string())?;
        let bx = compose_eval(&*sys.base, n, &start.0).map_err(|e| e.to_string())?;
        let rel = (px.value() - bx.value()).abs() / bx.value().abs().max(f64::MIN_POSITIVE);
        ensure(rel <= 1e-12, || {
            format!("n = {n}: projection {} vs base {}", px.value(), bx.value())
        })?;
        worst_rel = worst_rel.max(rel);
    }
    Ok(format!(
        "5 starts within {worst:.1e} of the n = 200 orbit; projection identity worst relative {worst_rel:.1e}"
    ))
}

fn criterion_8() -> Outcome {
    let s = build_affine_skew_demo();
    let sys = s.skew().unwrap();
    let hyp = certify_skew(sys, &ProbeSettings::default()).map_err(|e| e.to_string())?;
    let plan = hyp.plan(1e-3).map_err(|e| e.to_string())?;
    let n = plan.n0 + plan.n1 + 1;
    let table = convergence_diagnostics(sys, &plan, 2 * n, n).map_err(|e| e.to_string())?;
    let rows: Vec<_> = table.rows.iter().filter(|r| r.j <= plan.n0).collect();
    ensure(rows.len() == plan.n0, || {
        format!("{} rows for N0 = {}", rows.len(), plan.n0)
    })?;
    for r in &rows {
        let q = r.inequalities;
        ensure(q.all(), || {
            format!("j = {}: {q:?} (A = {}, B = {}, C = {})", r.j, r.a, r.b, r.c)
        })?;
    }
    Ok(format!(
        "N0 = {}, N1 = {}, δ = {:e}, m = {}, n = {}: all four families hold for j = 1..{}",
        plan.n0, plan.n1, plan.delta, table.m, table.n, plan.n0
    ))
}

fn graph_error(grid: usize) -> Result<(f64, Duration), String> {
    let t = Instant::now();
    let s = build_smooth_graph_demo(grid, CosineGraphFamily::default()).map_err(|e| e.to_string())?;
    let r = iterate_fiber_nonstationary(s.skew().unwrap(), &skew_start(&s), &FiberPolicy::default())
        .map_err(|e| e.to_string())?;
    Ok((derivative_mismatch(&r.pair.0, &r.pair.1, 0.0, 1.0), t.elapsed()))
}

fn criterion_9() -> Outcome {
    let (coarse, _) = graph_error(32)?;
    let (fine, elapsed) = graph_error(128)?;
    ensure(fine <= 1e-3, || format!("grid 128 mismatch {fine:e}"))?;
    ensure(fine < coarse, || {
        format!("grid 128 {fine:e} not below grid 32 {coarse:e}")
    })?;
    ensure(elapsed < Duration::from_secs(30), || {
        format!("grid 128 took {elapsed:?}")
    })?;
    let order = (coarse / fine).ln() / (127.0_f64 / 31.0).ln();
    Ok(format!(
        "mismatch {fine:.2e} at 128 vs {coarse:.2e} at 32 (observed order {order:.2}), {elapsed:.1?}"
    ))
}

fn cocycle_limit(mats: Vec<Matrix2>) -> Result<f64, String> {
    let s = build_projective_cocycle_demo(mats).map_err(|e| e.to_string())?;
    let seq = s.sequence().unwrap();
    let r = iterate_nonstationary(&**seq, &s.x0, &base_start(&s), &NonstationaryPolicy::default())
        .map_err(|e| e.to_string())?;
    Ok(r.point.value())
}

fn criterion_10() -> Outcome {
    let cat = [[2, 1], [1, 1]];
    // unstable eigenvector (1, λ − 2) of the cat matrix, λ = (3 + √5)/2
    let eigen_slope = (3.0 + 5f64.sqrt()) / 2.0 - 2.0;
    let got = cocycle_limit(vec![cat])?;
    let e1 = (got - eigen_slope).abs();
    ensure(e1 <= 1e-10, || format!("cat map slope {got} vs {eigen_slope}"))?;
    let alt = vec![cat, [[1, 1], [1, 2]]];
    let oracle = product_direction_slope(&alt, 60);
    let got = cocycle_limit(alt)?;
    let e2 = (got - oracle).abs();
    ensure(e2 <= 1e-10, || format!("alternating slope {got} vs {oracle}"))?;
    Ok(format!(
        "cat map off 1/φ by {e1:.1e}; alternating off product oracle by {e2:.1e}"
    ))
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_nscontract");
    let cases: [(&str, &[&str], i32); 3] = [
        ("affine", &["--param", "a=0.9", "--param", "b=sin:2", "--seed", "11"], 0),
        ("cond3", &["--start", "x=1,y=1", "--seed", "5", "--format", "json"], 2),
        ("smooth-graph", &["--param", "grid_size=32", "--seed", "3"], 0),
    ];
    let mut sizes = Vec::new();
    for (name, extra, code) in cases {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let path = dir.path().join(format!("{name}-{run}.trace"));
            let status = Command::new(bin)
                .args(["run", "--scenario", name, "--out-trace"])
                .arg(&path)
                .args(extra)
                .env("NSCONTRACT_LOG", "silent")
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.code() == Some(code), || {
                format!(
                    "{name}: exit {:?}, stderr {}",
                    status.status.code(),
                    String::from_utf8_lossy(&status.stderr)
                )
            })?;
            outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        ensure(outputs[0] == outputs[1], || format!("{name}: traces differ"))?;
        ensure(!outputs[0].is_empty(), || format!("{name}: empty trace"))?;
        sizes.push(format!("{name} {} B", outputs[0].len()));
    }
    Ok(format!("identical traces across two runs: {}", sizes.join(", ")))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (
            "stationary reduction: cos iteration reaches the Dottie number",
            criterion_1,
        ),
        ("non-stationary oracle: x/2 + 2^-n converges to 2/3", criterion_2),
        ("certified-bound soundness over convergent scenarios", criterion_3),
        ("remark1 partial sums and boundedness Fail", criterion_4),
        ("cond2: fiber probe fails, base still converges", criterion_5),
        ("cond3: split limits and equicontinuity Fail", criterion_6),
        ("affine skew demo: limit and projected-coordinate identity", criterion_7),
        ("proof diagnostics on the affine skew demo", criterion_8),
        ("smooth graph: fiber limit is the base derivative", criterion_9),
        ("projective cocycle slopes", criterion_10),
        ("determinism of trace files", criterion_11),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {title}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {title}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
