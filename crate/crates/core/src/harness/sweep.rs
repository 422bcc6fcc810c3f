use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ExperimentConfig;
use super::run::{run_experiment, RunLog, RunSeeds};
use crate::{Error, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "RC_THREADS";

/// A base config plus axes whose cartesian product forms the cells. The
/// first axis varies slowest.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: Value,
    #[serde(default)]
    pub axes: Vec<Axis>,
}

/// A dotted path into the config, e.g. `agent.alpha.constant`, and the
/// values it takes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub path: String,
    pub values: Vec<Value>,
}

fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut node = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let Value::Object(map) = node else {
            return Err(Error::Config(format!("sweep path {path}: {} is not an object", keys[..i].join("."))));
        };
        if i + 1 == keys.len() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        node = map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Err(Error::Config("empty sweep path".into()))
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Expands the grid into validated cell configs.
    pub fn cells(&self) -> Result<Vec<ExperimentConfig>> {
        if let Some(axis) = self.axes.iter().find(|a| a.values.is_empty()) {
            return Err(Error::Config(format!("sweep axis {} has no values", axis.path)));
        }
        let mut docs = vec![self.base.clone()];
        for axis in &self.axes {
            let mut next = Vec::with_capacity(docs.len() * axis.values.len());
            for doc in &docs {
                for v in &axis.values {
                    let mut d = doc.clone();
                    set_path(&mut d, &axis.path, v.clone())?;
                    next.push(d);
                }
            }
            docs = next;
        }
        docs.into_iter()
            .enumerate()
            .map(|(i, d)| {
                let cfg: ExperimentConfig = serde_json::from_value(d)
                    .map_err(|e| Error::Config(format!("sweep cell {i}: {e}")))?;
                cfg.validate().map_err(|e| Error::Config(format!("sweep cell {i}: {e}")))?;
                Ok(cfg)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub run: usize,
    pub message: String,
}

/// Mean and standard error across runs of one cell. Metrics a cell does
/// not produce are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub cell: usize,
    pub config: ExperimentConfig,
    pub n_completed: usize,
    pub auc_mean: Option<f64>,
    pub auc_stderr: Option<f64>,
    pub final_rmsve_mean: Option<f64>,
    pub final_rmsve_stderr: Option<f64>,
    pub rbar_final_mean: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: usize,
    pub config: ExperimentConfig,
    /// Completed runs in run order.
    pub logs: Vec<RunLog>,
    pub failures: Vec<RunFailure>,
    pub summary: SummaryRow,
}

/// Sample mean and `sd / sqrt(n)`; the error is 0 for a single value.
pub fn mean_stderr(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Some((mean, (var / n).sqrt()))
}

/// Aggregates the completed runs of one cell.
pub fn summarize(cell: usize, config: &ExperimentConfig, logs: &[RunLog]) -> SummaryRow {
    let collect = |f: fn(&RunLog) -> Option<f64>| -> Vec<f64> { logs.iter().filter_map(f).collect() };
    let auc = mean_stderr(&collect(RunLog::training_average_reward));
    let rmsve = mean_stderr(&collect(RunLog::final_rmsve));
    let rbar = mean_stderr(&collect(RunLog::final_rbar));
    SummaryRow {
        cell,
        config: config.clone(),
        n_completed: logs.len(),
        auc_mean: auc.map(|x| x.0),
        auc_stderr: auc.map(|x| x.1),
        final_rmsve_mean: rmsve.map(|x| x.0),
        final_rmsve_stderr: rmsve.map(|x| x.1),
        rbar_final_mean: rbar.map(|x| x.0),
    }
}

/// Thread cap from `RC_THREADS`; `None` means all cores.
pub fn thread_limit() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_VAR} must be a positive integer, got {s:?}"))),
        },
    }
}

/// Runs every `(cell, run)` pair, in parallel, with seeds mixed from each
/// cell's base seed. Run failures are recorded, never propagated.
pub fn run_cells(cells: &[ExperimentConfig], threads: Option<usize>) -> Result<Vec<CellResult>> {
    let tasks: Vec<(usize, usize)> = cells
        .iter()
        .enumerate()
        .flat_map(|(c, cfg)| (0..cfg.n_runs).map(move |r| (c, r)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<RunLog>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(c, r)| {
                let cfg = &cells[c];
                run_experiment(cfg, RunSeeds::derive(cfg.base_seed, c, r), r)
            })
            .collect()
    });

    let mut results: Vec<CellResult> = cells
        .iter()
        .enumerate()
        .map(|(c, cfg)| CellResult {
            cell: c,
            config: cfg.clone(),
            logs: Vec::new(),
            failures: Vec::new(),
            summary: summarize(c, cfg, &[]),
        })
        .collect();
    for (&(c, r), outcome) in tasks.iter().zip(outcomes) {
        match outcome {
            Ok(log) => results[c].logs.push(log),
            Err(e) => results[c].failures.push(RunFailure { run: r, message: e.to_string() }),
        }
    }
    for res in &mut results {
        res.summary = summarize(res.cell, &res.config, &res.logs);
    }
    Ok(results)
}
