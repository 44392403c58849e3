//! Scenario files and the `run`, `sweep` and `oracle-check` commands.

use std::fs;
use std::path::{Path, PathBuf};

use dsapf_core::config::{validate, SystemConfig, ValidatedConfig, FIELD_NAMES};
use dsapf_core::engine::{run, Engine, RunSummary};
use dsapf_core::error::{ConfigError, IoError, OracleError};
use dsapf_core::metrics_io::{sweep_table, write_run, write_sweep, RunPaths, SweepRow};
use dsapf_core::oracle::{track_gap, GapPoint};
use rayon::prelude::*;
use thiserror::Error;

pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: {reason}")]
    Scenario { path: PathBuf, line: usize, reason: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("unknown parameter {0:?}; valid names: {names}", names = FIELD_NAMES.join(", "))]
    UnknownParam(String),
    #[error("bad value list {0:?}")]
    Values(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl CliError {
    /// 2 for anything wrong with the request, 3 for filesystem trouble.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 3,
            _ => 2,
        }
    }
}

/// Parses a flat `key = value` scenario on top of the defaults.
///
/// Blank lines and `#` comments are skipped. Unknown or repeated keys are errors.
pub fn parse_scenario(text: &str, path: &Path) -> Result<SystemConfig, CliError> {
    let mut config = SystemConfig::default();
    let mut seen = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let err = |reason: String| CliError::Scenario {
            path: path.to_path_buf(),
            line: k + 1,
            reason,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
        let key = key.trim();
        if seen.contains(&key) {
            return Err(err(format!("{key} set twice")));
        }
        seen.push(key);
        config.set_field(key, value.trim()).map_err(|e| err(e.to_string()))?;
    }
    Ok(config)
}

/// Reads a scenario file, or the defaults when no path is given.
pub fn load_config(path: Option<&Path>) -> Result<SystemConfig, CliError> {
    match path {
        None => Ok(SystemConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| IoError::io(p, e))?;
            parse_scenario(&text, p)
        }
    }
}

/// Expands `a..b` (inclusive, integers) or a comma list.
pub fn parse_values(list: &str) -> Result<Vec<String>, CliError> {
    let list = list.trim();
    if let Some((lo, hi)) = list.split_once("..") {
        let lo: i64 = lo.trim().parse().map_err(|_| CliError::Values(list.into()))?;
        let hi: i64 = hi.trim().parse().map_err(|_| CliError::Values(list.into()))?;
        if lo > hi {
            return Err(CliError::Values(list.into()));
        }
        return Ok((lo..=hi).map(|v| v.to_string()).collect());
    }
    let values: Vec<String> = list.split(',').map(|v| v.trim().to_string()).collect();
    if values.iter().any(String::is_empty) {
        return Err(CliError::Values(list.into()));
    }
    Ok(values)
}

pub fn parse_seeds(list: &str) -> Result<Vec<u64>, CliError> {
    parse_values(list)?
        .iter()
        .map(|s| s.parse().map_err(|_| CliError::Values(list.into())))
        .collect()
}

/// `key=value` pairs for one run, space separated.
pub fn summary_line(summary: &RunSummary) -> String {
    let c = &summary.config;
    format!(
        "seed={} objective={} n_users={} n_bands={} ell={} n_particles={} pu_busy_prob={} n_slots={} \
         avg_throughput_bps={:.6e} avg_jain={:.6} total_messages={}",
        summary.seed,
        c.objective,
        c.n_users,
        c.n_bands,
        c.max_bands_per_user,
        c.n_particles,
        c.pu_busy_prob,
        summary.n_slots,
        summary.per_user_avg_throughput,
        summary.avg_jain,
        summary.total_messages,
    )
}

pub struct RunOutcome {
    pub summary: RunSummary,
    pub paths: RunPaths,
}

pub fn cmd_run(config: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<RunOutcome, CliError> {
    let mut config = load_config(config)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let (summary, records) = run(validate(config)?);
    let paths = write_run(&records, &summary, out)?;
    Ok(RunOutcome { summary, paths })
}

pub struct SweepRequest<'a> {
    pub config: Option<&'a Path>,
    pub param: &'a str,
    pub values: Vec<String>,
    /// Empty means the scenario's own seed.
    pub seeds: Vec<u64>,
    /// 0 lets rayon choose.
    pub jobs: usize,
    pub out: &'a Path,
}

pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub table: PathBuf,
}

/// Runs every (value, seed) cell, each into `<out>/<param>=<value>/seed=<seed>`,
/// then writes `<out>/sweep.csv`.
pub fn cmd_sweep(req: &SweepRequest<'_>) -> Result<SweepOutcome, CliError> {
    if !FIELD_NAMES.contains(&req.param) {
        return Err(CliError::UnknownParam(req.param.to_string()));
    }
    let base = load_config(req.config)?;
    let seeds = if req.seeds.is_empty() {
        vec![base.seed]
    } else {
        req.seeds.clone()
    };

    let mut cells: Vec<(usize, String, ValidatedConfig)> = Vec::new();
    let mut labels = Vec::new();
    for (k, value) in req.values.iter().enumerate() {
        let mut config = base.clone();
        config.set_field(req.param, value)?;
        let label = config.field(req.param).expect("known field");
        let config = validate(config)?;
        for &seed in &seeds {
            let mut c = config.clone();
            c.set_seed(seed);
            cells.push((k, label.clone(), c));
        }
        labels.push(label);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(req.jobs)
        .build()
        .expect("thread pool");
    let results: Vec<(usize, RunSummary)> = pool.install(|| {
        cells
            .into_par_iter()
            .map(|(k, label, config)| {
                let seed = config.seed;
                let (summary, records) = run(config);
                let dir = req.out.join(format!("{}={label}", req.param)).join(format!("seed={seed}"));
                write_run(&records, &summary, &dir)?;
                Ok((k, summary))
            })
            .collect::<Result<_, IoError>>()
    })?;

    let mut groups: Vec<(String, Vec<RunSummary>)> = labels.into_iter().map(|l| (l, Vec::new())).collect();
    for (k, summary) in results {
        groups[k].1.push(summary);
    }
    let rows = sweep_table(req.param, &groups)?;
    let table = req.out.join(SWEEP_FILE);
    write_sweep(&rows, &table)?;
    Ok(SweepOutcome { rows, table })
}

pub fn cmd_oracle_check(config: Option<&Path>, slots: usize, seed: Option<u64>) -> Result<Vec<GapPoint>, CliError> {
    let mut config = load_config(config)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let mut engine = Engine::new(validate(config)?);
    Ok(track_gap(&mut engine, slots)?)
}
