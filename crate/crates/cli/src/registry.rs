//! Scenario lookup by name, with `param.<name>` parsing.

use std::collections::BTreeMap;

use nscontract_core::scenarios::{
    build_affine_scenario, build_affine_skew_demo, build_condition2_counterexample, build_condition3_counterexample,
    build_projective_cocycle_demo, build_remark_counterexample, build_smooth_graph_demo, CosineGraphFamily, Matrix2,
    OffsetSpec, Scenario,
};

use crate::CliError;

/// `(name, parameters, summary)` for every packaged scenario.
pub const SCENARIOS: &[(&str, &str, &str)] = &[
    (
        "remark1",
        "",
        "f_n(x) = x/2 + 3^n: contracting maps with unbounded offsets",
    ),
    ("cond2", "", "x/2 base, y/2 + 3^n fiber: unbounded fiber offsets"),
    ("cond3", "", "x/2 base, fiber discontinuous at x = 0: split limits"),
    ("affine", "a=0.5 b=const:1", "f_n(x) = a x + b_n with a series oracle"),
    ("affine-skew", "", "x/2 base, y/2 + x fiber, limit (0, 0)"),
    (
        "smooth-graph",
        "grid_size=128 family=default",
        "fiber limit is the derivative of the base limit",
    ),
    ("cocycle", "matrices=2,1,1,1", "slope maps of positive 2x2 matrices"),
];

struct Params<'a> {
    scenario: &'a str,
    map: BTreeMap<&'a str, &'a str>,
}

impl<'a> Params<'a> {
    fn take<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v
                .trim()
                .parse()
                .map_err(|e| CliError::Config(format!("{}: parameter `{key}` = `{v}`: {e}", self.scenario))),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.map.keys().next() {
            None => Ok(()),
            Some(k) => Err(CliError::Config(format!("{}: unknown parameter `{k}`", self.scenario))),
        }
    }
}

/// `a,b,c,d;a,b,c,d;…`, row-major `[[a, b], [c, d]]`.
fn parse_matrices(text: &str) -> Result<Vec<Matrix2>, CliError> {
    let named = match text.trim() {
        "cat" => "2,1,1,1",
        "alternating" => "2,1,1,1;1,1,1,2",
        other => other,
    };
    named
        .split(';')
        .map(|m| {
            let e: Vec<i64> = m
                .split(',')
                .map(|t| t.trim().parse::<i64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Config(format!("cocycle: bad matrix `{m}`")))?;
            match e.as_slice() {
                [a, b, c, d] => Ok([[*a, *b], [*c, *d]]),
                _ => Err(CliError::Config(format!("cocycle: matrix `{m}` needs four entries"))),
            }
        })
        .collect()
}

fn graph_family(name: &str) -> Result<CosineGraphFamily, CliError> {
    match name.trim() {
        "default" => Ok(CosineGraphFamily::default()),
        "theta-free" => Ok(CosineGraphFamily::theta_free()),
        "stationary" => Ok(CosineGraphFamily::stationary()),
        other => Err(CliError::Config(format!(
            "smooth-graph: family must be default, theta-free or stationary, got `{other}`"
        ))),
    }
}

pub fn build(name: &str, params: &BTreeMap<String, String>) -> Result<Scenario, CliError> {
    let mut p = Params {
        scenario: name,
        map: params.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect(),
    };
    let scenario = match name {
        "remark1" => build_remark_counterexample(),
        "cond2" => build_condition2_counterexample(),
        "cond3" => build_condition3_counterexample(),
        "affine-skew" => build_affine_skew_demo(),
        "affine" => {
            let a = p.take("a", 0.5)?;
            let b = p.take("b", OffsetSpec::Constant(1.0))?;
            build_affine_scenario(a, b)?
        }
        "smooth-graph" => {
            let n = p.take("grid_size", 128usize)?;
            let family = graph_family(&p.take("family", String::from("default"))?)?;
            build_smooth_graph_demo(n, family)?
        }
        "cocycle" => {
            let m = parse_matrices(&p.take("matrices", String::from("cat"))?)?;
            build_projective_cocycle_demo(m)?
        }
        other => {
            let names: Vec<&str> = SCENARIOS.iter().map(|s| s.0).collect();
            return Err(CliError::Config(format!(
                "unknown scenario `{other}` (expected one of {})",
                names.join(", ")
            )));
        }
    };
    p.finish()?;
    Ok(scenario)
}
