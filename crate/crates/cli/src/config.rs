//! Run configuration: a flat `key = value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Config(format!("format must be csv or json, got `{other}`"))),
        }
    }
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Policy {
    pub tol: f64,
    /// `None` keeps the engine default (2000 for sequences, 900 for skew systems).
    pub max_n: Option<usize>,
    pub stability_window: usize,
    pub probe_horizon: usize,
    pub seed: u64,
}

impl Default for Policy {
    fn default() -> Self {
        Policy {
            tol: 1e-10,
            max_n: None,
            stability_window: 10,
            probe_horizon: 100,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Output {
    pub trace_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    pub params: BTreeMap<String, String>,
    /// Raw `x=...,y=...` override of the scenario start.
    pub start: Option<String>,
    pub policy: Policy,
    pub output: Output,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value `{value}` for `{key}`")))
}

impl RunConfig {
    /// Parses a flat config file: one `key = value` per line, `#` comments,
    /// scenario parameters as `param.<name>`.
    pub fn from_file_text(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", i + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if let Some(name) = key.strip_prefix("param.") {
            if name.is_empty() {
                return Err(CliError::Config("empty parameter name".into()));
            }
            self.params.insert(name.to_string(), value.to_string());
            return Ok(());
        }
        match key.replace('-', "_").as_str() {
            "scenario" => self.scenario = value.to_string(),
            "tol" => self.policy.tol = parse(key, value)?,
            "max_n" => self.policy.max_n = Some(parse(key, value)?),
            "stability_window" => self.policy.stability_window = parse(key, value)?,
            "probe_horizon" => self.policy.probe_horizon = parse(key, value)?,
            "seed" => self.policy.seed = parse(key, value)?,
            "start" => self.start = Some(value.to_string()),
            "out_trace" => self.output.trace_path = Some(value.into()),
            "out_report" => self.output.report_path = Some(value.into()),
            "format" => self.output.format = value.parse()?,
            _ => return Err(CliError::Config(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.scenario.is_empty() {
            return bad("no scenario given");
        }
        if !self.policy.tol.is_finite() || self.policy.tol <= 0.0 {
            return bad("tol must be a positive number");
        }
        if self.policy.max_n == Some(0) {
            return bad("max_n must be at least 1");
        }
        if self.policy.stability_window == 0 || self.policy.probe_horizon == 0 {
            return bad("stability_window and probe_horizon must be at least 1");
        }
        Ok(())
    }

    /// Resolved settings that determine the run (output locations excluded,
    /// so traces written to different paths stay byte-identical).
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("scenario".into(), self.scenario.clone());
        for (k, v) in &self.params {
            m.insert(format!("param.{k}"), v.clone());
        }
        m.insert("tol".into(), format!("{:e}", self.policy.tol));
        if let Some(n) = self.policy.max_n {
            m.insert("max_n".into(), n.to_string());
        }
        m.insert("stability_window".into(), self.policy.stability_window.to_string());
        m.insert("probe_horizon".into(), self.policy.probe_horizon.to_string());
        m.insert("seed".into(), self.policy.seed.to_string());
        m.insert("format".into(), self.output.format.as_str().into());
        if let Some(s) = &self.start {
            m.insert("start".into(), s.clone());
        }
        m
    }
}
