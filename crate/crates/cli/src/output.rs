//! Trace and report serialization, written atomically.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use nscontract_core::contraction::IterationTrace;
use nscontract_core::fiber::FiberTrace;
use serde_json::{json, Value};

use crate::config::Format;
use crate::CliError;

/// A trace plus the coordinate counts needed to label its columns.
#[derive(Clone, Debug, PartialEq)]
pub enum TraceData {
    Base {
        dim: usize,
        trace: IterationTrace,
    },
    Fiber {
        base_dim: usize,
        fiber_dim: usize,
        trace: FiberTrace,
    },
}

impl TraceData {
    pub fn len(&self) -> usize {
        match self {
            TraceData::Base { trace, .. } => trace.rows.len(),
            TraceData::Fiber { trace, .. } => trace.rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_row(out: &mut String, cells: impl IntoIterator<Item = String>) {
    let cells: Vec<String> = cells.into_iter().collect();
    out.push_str(&cells.join(","));
    out.push('\n');
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn trace_csv(data: &TraceData) -> String {
    let mut out = String::new();
    match data {
        TraceData::Base { dim, trace } => {
            let header = std::iter::once("n".to_string())
                .chain((0..*dim).map(|i| format!("coord_{i}")))
                .chain(["step_distance".into(), "bound".into()]);
            push_row(&mut out, header);
            for r in &trace.rows {
                let cells = std::iter::once(r.n.to_string())
                    .chain(r.point.coords().iter().map(|x| fmt_float(*x)))
                    .chain([fmt_float(r.step_distance), opt(r.bound)]);
                push_row(&mut out, cells);
            }
        }
        TraceData::Fiber {
            base_dim,
            fiber_dim,
            trace,
        } => {
            let header = std::iter::once("n".to_string())
                .chain((0..*base_dim).map(|i| format!("base_{i}")))
                .chain((0..*fiber_dim).map(|i| format!("fiber_{i}")))
                .chain(["base_bound".into(), "fiber_step".into()]);
            push_row(&mut out, header);
            for r in &trace.rows {
                let cells = std::iter::once(r.n.to_string())
                    .chain(r.base.coords().iter().map(|x| fmt_float(*x)))
                    .chain(r.fiber.coords().iter().map(|x| fmt_float(*x)))
                    .chain([opt(r.base_bound), fmt_float(r.fiber_step)]);
                push_row(&mut out, cells);
            }
        }
    }
    out
}

pub fn trace_json(data: &TraceData, seed: u64, echo: &BTreeMap<String, String>) -> Result<String, CliError> {
    let rows = match data {
        TraceData::Base { trace, .. } => serde_json::to_value(&trace.rows)?,
        TraceData::Fiber { trace, .. } => serde_json::to_value(&trace.rows)?,
    };
    let doc = json!({ "meta": { "seed": seed, "config_echo": echo }, "rows": rows });
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn render_trace(
    data: &TraceData,
    format: Format,
    seed: u64,
    echo: &BTreeMap<String, String>,
) -> Result<String, CliError> {
    match format {
        Format::Csv => Ok(trace_csv(data)),
        Format::Json => trace_json(data, seed, echo),
    }
}

pub fn render_report(report: &Value) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// Writes to a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// One-line human summary of a run, for the terminal.
pub fn summary_line(report: &Value) -> String {
    let mut s = String::new();
    let get = |k: &str| report.get(k).cloned().unwrap_or(Value::Null);
    let _ = write!(
        s,
        "{}: {}",
        get("scenario").as_str().unwrap_or("?"),
        get("status").as_str().unwrap_or("?")
    );
    if let Some(l) = report.get("limit") {
        let _ = write!(s, ", limit {}", compact(l));
    }
    if let Some(n) = report.get("n_used") {
        let _ = write!(s, " at n = {n}");
    }
    if let Some(c) = report.pointer("/refusal/condition") {
        let _ = write!(s, ", refused on {}", c.as_str().unwrap_or("?"));
    }
    if let Some(l) = report.get("raw_limit") {
        let _ = write!(s, ", uncertified raw limit {}", compact(l));
    }
    s
}

/// Long grid vectors are elided in the terminal summary.
fn compact(v: &Value) -> String {
    let text = v.to_string();
    if text.len() > 120 {
        format!("{}…", &text[..text.char_indices().nth(117).map_or(text.len(), |c| c.0)])
    } else {
        text
    }
}
