//! Probe phase, engine phase, artifacts and exit status.

use log::{debug, info};
use serde_json::{json, Map, Value};

use nscontract_core::contraction::{iterate_nonstationary, raw_orbit, NonstationaryPolicy};
use nscontract_core::fiber::{iterate_fiber_nonstationary, raw_skew_orbit, FiberPolicy, Pair, SkewSystem};
use nscontract_core::probe::ProbeSettings;
use nscontract_core::scenarios::{derivative_mismatch, Limit, Oracle, Scenario, Start, System};
use nscontract_core::{Error, Point, Space};

use crate::config::RunConfig;
use crate::output::{render_report, render_trace, summary_line, write_atomic, TraceData};
use crate::{registry, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Certified,
    Refused,
    NonConvergence,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Certified => 0,
            Status::Refused => 2,
            Status::NonConvergence => 3,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Certified => "certified",
            Status::Refused => "refused",
            Status::NonConvergence => "non-convergence",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub report: Value,
    pub trace: TraceData,
}

fn parse_coords(space: &Space, text: &str, role: &str) -> Result<Point, CliError> {
    let vals: Vec<f64> = text
        .split(':')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Config(format!("start: bad {role} value `{text}`")))?;
    let p = match vals.as_slice() {
        [v] => Point::constant(space.dim(), *v),
        _ => Point::new(vals),
    };
    space.validate(&p, "start")?;
    Ok(p)
}

/// `x=<v>[,y=<v>]`, where `<v>` is a scalar (broadcast over grid nodes) or
/// a `:`-separated coordinate list.
pub fn parse_start(text: &str, scenario: &Scenario) -> Result<Start, CliError> {
    let mut start = scenario.start.clone();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("start: expected `x=...` or `y=...`, got `{part}`")))?;
        match (k.trim(), &mut start, &scenario.system) {
            ("x", Start::Base(x), System::Sequence(seq)) => *x = parse_coords(seq.space(), v, "x")?,
            ("x", Start::Skew((x, _)), System::Skew(sys)) => *x = parse_coords(sys.base_space(), v, "x")?,
            ("y", Start::Skew((_, y)), System::Skew(sys)) => *y = parse_coords(sys.fiber_space(), v, "y")?,
            ("y", Start::Base(_), _) => {
                return Err(CliError::Config(format!(
                    "start: `{}` has no fiber coordinate",
                    scenario.name
                )))
            }
            (other, _, _) => return Err(CliError::Config(format!("start: unknown coordinate `{other}`"))),
        }
    }
    Ok(start)
}

fn probe_settings(cfg: &RunConfig) -> ProbeSettings {
    ProbeSettings {
        horizon: cfg.policy.probe_horizon,
        seed: cfg.policy.seed,
        ..ProbeSettings::default()
    }
}

fn to_json<T: serde::Serialize + ?Sized>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn pair_json(p: &Pair) -> Value {
    json!([p.0, p.1])
}

fn refusal_json(err: &Error) -> Value {
    match err {
        Error::Refusal {
            condition,
            verdict,
            report,
        } => json!({
            "condition": condition.label(),
            "verdict": to_json(verdict),
            "probe": to_json(report),
        }),
        Error::Domain { rate } => json!({ "condition": "contraction rate", "rate": rate, "detail": err.to_string() }),
        other => json!({ "condition": "contraction rate", "detail": other.to_string() }),
    }
}

fn is_refusal(err: &Error) -> bool {
    matches!(
        err,
        Error::Refusal { .. } | Error::Domain { .. } | Error::DeclaredRateViolated { .. }
    )
}

fn oracle_json(
    scenario: &Scenario,
    limit: Option<&Value>,
    computed: Option<(&Point, Option<&Point>)>,
    raw: &[f64],
) -> Value {
    let mut o = Map::new();
    o.insert("note".into(), json!(scenario.oracle_note));
    match &scenario.oracle {
        Some(Oracle::Limit(l)) => {
            let value = match l {
                Limit::Point(p) => to_json(p),
                Limit::Pair(p) => pair_json(p),
            };
            o.insert("value".into(), value);
            let error = match (l, computed) {
                (Limit::Point(want), Some((got, None))) => Some(sup_diff(want, got)),
                (Limit::Pair((wx, wy)), Some((gx, Some(gy)))) => Some(sup_diff(wx, gx).max(sup_diff(wy, gy))),
                _ => None,
            };
            if let (Some(e), Some(_)) = (error, limit) {
                o.insert("error".into(), json!(e));
            }
        }
        Some(Oracle::PartialSums(sums)) => {
            let k = sums.len().min(raw.len());
            let worst = (0..k).map(|i| ((raw[i] - sums[i]) / sums[i]).abs()).fold(0.0, f64::max);
            o.insert("partial_sums_checked".into(), json!(k));
            o.insert("max_relative_error".into(), json!(worst));
        }
        Some(Oracle::DerivativeOfBase) => {
            if let Some((u, Some(v))) = computed {
                if let System::Skew(sys) = &scenario.system {
                    if let Space::Grid { size, lo, hi } = sys.base_space() {
                        let h = (hi - lo) / (*size as f64 - 1.0);
                        let err = derivative_mismatch(u, v, *lo, *hi);
                        o.insert("grid_spacing".into(), json!(h));
                        o.insert("max_node_mismatch".into(), json!(err));
                        o.insert("observed_constant".into(), json!(err / (h * h)));
                    }
                }
            }
        }
        None => {}
    }
    Value::Object(o)
}

fn sup_diff(a: &Point, b: &Point) -> f64 {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn base_report(cfg: &RunConfig, scenario: &Scenario) -> Map<String, Value> {
    let mut r = Map::new();
    r.insert("scenario".into(), json!(scenario.name));
    r.insert("seed".into(), json!(cfg.policy.seed));
    r.insert("config_echo".into(), json!(cfg.echo()));
    let notes: serde_json::Map<String, Value> = scenario.notes.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    r.insert("notes".into(), Value::Object(notes));
    r
}

fn run_sequence(
    cfg: &RunConfig,
    scenario: &Scenario,
    seq: &(dyn nscontract_core::MapSequence + Send + Sync),
    x: &Point,
    mut r: Map<String, Value>,
) -> Result<Outcome, CliError> {
    let policy = NonstationaryPolicy {
        tol: cfg.policy.tol,
        max_n: cfg.policy.max_n.unwrap_or(NonstationaryPolicy::default().max_n),
        probe: probe_settings(cfg),
    };
    let dim = seq.space().dim();
    info!("{}: probing {} from x = {}", scenario.name, seq.space(), x);
    let (status, trace) = match iterate_nonstationary(seq, &scenario.x0, x, &policy) {
        Ok(res) => {
            info!("certified at n = {} (bound {:e})", res.n_used, res.certificate.bound);
            r.insert("certification".into(), json!("certified"));
            r.insert("limit".into(), to_json(&res.point));
            r.insert("n_used".into(), json!(res.n_used));
            r.insert("certificate".into(), to_json(&res.certificate));
            r.insert("hypotheses".into(), to_json(&res.hypotheses));
            let lim = r["limit"].clone();
            r.insert(
                "oracle".into(),
                oracle_json(scenario, Some(&lim), Some((&res.point, None)), &[]),
            );
            (Status::Certified, res.trace)
        }
        Err(e) if is_refusal(&e) => {
            info!("refused: {e}; computing raw orbit to n = {}", scenario.raw_cap);
            r.insert("refusal".into(), refusal_json(&e));
            r.insert("certification".into(), json!("none"));
            let raw = raw_orbit(seq, x, scenario.raw_cap)?;
            let values: Vec<f64> = raw.rows.iter().map(|row| row.point.coords()[0]).collect();
            if let Some(p) = raw.last_point() {
                r.insert("raw_limit".into(), to_json(p));
                r.insert("raw_depth".into(), json!(raw.rows.len()));
            }
            r.insert("oracle".into(), oracle_json(scenario, None, None, &values));
            (Status::Refused, raw)
        }
        Err(Error::NonConvergence { max_iter, trace }) => {
            info!("no certificate within max_n = {max_iter}");
            r.insert("max_n".into(), json!(max_iter));
            (Status::NonConvergence, *trace)
        }
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome {
        status,
        report: finish(r, status),
        trace: TraceData::Base { dim, trace },
    })
}

fn run_skew(
    cfg: &RunConfig,
    scenario: &Scenario,
    sys: &SkewSystem,
    start: &Pair,
    mut r: Map<String, Value>,
) -> Result<Outcome, CliError> {
    let policy = FiberPolicy {
        tol: cfg.policy.tol,
        max_n: cfg.policy.max_n.unwrap_or(FiberPolicy::default().max_n),
        stability_window: cfg.policy.stability_window,
        probe: probe_settings(cfg),
        ..FiberPolicy::default()
    };
    let (base_dim, fiber_dim) = (sys.base_space().dim(), sys.fiber_space().dim());
    info!(
        "{}: probing skew system over {} x {}",
        scenario.name,
        sys.base_space(),
        sys.fiber_space()
    );
    let (status, trace) = match iterate_fiber_nonstationary(sys, start, &policy) {
        Ok(res) => {
            info!("settled at n = {} ({})", res.n_used, res.certification);
            if let Some(d) = &res.diagnostics {
                debug!("diagnostics m = {}, n = {}: all hold = {}", d.m, d.n, d.all_hold());
            }
            r.insert("certification".into(), json!(res.certification));
            r.insert("limit".into(), pair_json(&res.pair));
            r.insert("n_used".into(), json!(res.n_used));
            r.insert("certificate".into(), to_json(&res.base_certificate));
            r.insert("hypotheses".into(), to_json(&res.hypotheses));
            r.insert("plan".into(), to_json(&res.plan));
            r.insert("diagnostics".into(), to_json(&res.diagnostics));
            r.insert("start_check".into(), to_json(&res.start_check));
            let lim = r["limit"].clone();
            r.insert(
                "oracle".into(),
                oracle_json(scenario, Some(&lim), Some((&res.pair.0, Some(&res.pair.1))), &[]),
            );
            (Status::Certified, res.trace)
        }
        Err(e) if is_refusal(&e) => {
            info!("refused: {e}; computing raw orbit to n = {}", scenario.raw_cap);
            r.insert("refusal".into(), refusal_json(&e));
            r.insert("certification".into(), json!("none"));
            let raw = raw_skew_orbit(
                sys,
                start,
                scenario.raw_cap,
                Some((policy.tol, policy.stability_window)),
            )?;
            let values: Vec<f64> = raw.rows.iter().map(|row| row.fiber.coords()[0]).collect();
            if let Some(p) = raw.last_pair() {
                r.insert("raw_limit".into(), pair_json(&p));
                r.insert("raw_depth".into(), json!(raw.rows.len()));
            }
            r.insert("oracle".into(), oracle_json(scenario, None, None, &values));
            (Status::Refused, raw)
        }
        Err(Error::FiberNonConvergence { max_n, trace }) => {
            info!("fiber did not settle within max_n = {max_n}");
            r.insert("max_n".into(), json!(max_n));
            (Status::NonConvergence, *trace)
        }
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome {
        status,
        report: finish(r, status),
        trace: TraceData::Fiber {
            base_dim,
            fiber_dim,
            trace,
        },
    })
}

fn finish(mut r: Map<String, Value>, status: Status) -> Value {
    r.insert("status".into(), json!(status.label()));
    r.insert("exit_code".into(), json!(status.code()));
    Value::Object(r)
}

/// Runs the configured scenario without touching the file system.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let scenario = registry::build(&cfg.scenario, &cfg.params)?;
    let start = match &cfg.start {
        Some(text) => parse_start(text, &scenario)?,
        None => scenario.start.clone(),
    };
    let r = base_report(cfg, &scenario);
    match (&scenario.system, &start) {
        (System::Sequence(seq), Start::Base(x)) => run_sequence(cfg, &scenario, &**seq, x, r),
        (System::Skew(sys), Start::Skew(p)) => run_skew(cfg, &scenario, sys, p, r),
        _ => Err(CliError::Config(format!(
            "{}: start does not match the system",
            scenario.name
        ))),
    }
}

/// Runs, writes the artifacts and returns the process exit status.
pub fn run(cfg: &RunConfig) -> i32 {
    match run_inner(cfg) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run_inner(cfg: &RunConfig) -> Result<Status, CliError> {
    let outcome = execute(cfg)?;
    if let Some(path) = &cfg.output.trace_path {
        let text = render_trace(&outcome.trace, cfg.output.format, cfg.policy.seed, &cfg.echo())?;
        write_atomic(path, &text)?;
        info!("wrote {} trace rows to {}", outcome.trace.len(), path.display());
    }
    if let Some(path) = &cfg.output.report_path {
        write_atomic(path, &render_report(&outcome.report)?)?;
        info!("wrote report to {}", path.display());
    }
    println!("{}", summary_line(&outcome.report));
    Ok(outcome.status)
}
