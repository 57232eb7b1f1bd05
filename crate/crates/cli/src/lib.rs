//! Configuration-driven runner for the packaged contraction scenarios.
//!
//! Exit status: 0 certified, 1 configuration or structural error,
//! 2 refusal (a hypothesis probe did not pass), 3 no convergence within `max_n`.

pub mod config;
pub mod output;
pub mod registry;
pub mod runner;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{Format, RunConfig};
pub use runner::{execute, run, Outcome, Status};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] nscontract_core::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Parser)]
#[command(
    name = "nscontract",
    version,
    about = "Certified iteration of non-stationary contractions and skew products"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probe and run a scenario, writing trace and report files.
    Run(Box<RunArgs>),
    /// List the packaged scenarios and their parameters.
    List,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scenario: Option<String>,
    /// Scenario parameter `k=v` (repeatable).
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_n: Option<usize>,
    #[arg(long)]
    pub stability_window: Option<usize>,
    #[arg(long)]
    pub probe_horizon: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_trace: Option<PathBuf>,
    #[arg(long)]
    pub out_report: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Start override, e.g. `x=1,y=1`.
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
}

impl RunArgs {
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                RunConfig::from_file_text(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(s) = self.scenario {
            cfg.scenario = s;
        }
        for kv in &self.params {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--param expects k=v, got `{kv}`")))?;
            cfg.params.insert(k.trim().to_string(), v.trim().to_string());
        }
        if let Some(t) = self.tol {
            cfg.policy.tol = t;
        }
        if self.max_n.is_some() {
            cfg.policy.max_n = self.max_n;
        }
        if let Some(w) = self.stability_window {
            cfg.policy.stability_window = w;
        }
        if let Some(h) = self.probe_horizon {
            cfg.policy.probe_horizon = h;
        }
        if let Some(s) = self.seed {
            cfg.policy.seed = s;
        }
        if self.out_trace.is_some() {
            cfg.output.trace_path = self.out_trace;
        }
        if self.out_report.is_some() {
            cfg.output.report_path = self.out_report;
        }
        if let Some(f) = self.format {
            cfg.output.format = f;
        }
        if self.start.is_some() {
            cfg.start = self.start;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Maps `NSCONTRACT_LOG` (`silent`, `info`, `debug`) to a log level; default `silent`.
pub fn init_logging() {
    let level = match std::env::var("NSCONTRACT_LOG").as_deref() {
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Off,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .try_init();
}
