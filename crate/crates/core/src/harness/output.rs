use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::Value;

use super::config::ExperimentConfig;
use super::run::RunLog;
use super::sweep::{CellResult, SummaryRow};
use crate::Result;

pub const CURVES_HEADER: [&str; 4] = ["run", "step", "metric", "value"];
pub const SUMMARY_METRICS: [&str; 5] =
    ["auc_mean", "auc_stderr", "final_rmsve_mean", "final_rmsve_stderr", "rbar_final_mean"];
pub const FAILURES_HEADER: [&str; 3] = ["cell", "run", "error"];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn write_curves<W: Write>(out: W, logs: &[RunLog]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVES_HEADER)?;
    for log in logs {
        let run = log.run.to_string();
        for r in &log.records {
            w.write_record([run.as_str(), &r.step.to_string(), r.metric.name(), &format_float(r.value)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// The config as written to outputs, with defaulted measurement settings
/// filled in.
pub fn echo_config(cfg: &ExperimentConfig) -> ExperimentConfig {
    let mut cfg = cfg.clone();
    cfg.bin_width = Some(cfg.bin_width());
    cfg.rmsve_every = Some(cfg.rmsve_every());
    cfg
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Dotted-key view of a config; arrays stay as compact JSON.
pub fn flatten_config(cfg: &ExperimentConfig) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    flatten("", &serde_json::to_value(echo_config(cfg))?, &mut out);
    Ok(out)
}

/// One row per cell: `cell`, the union of flattened config keys in first
/// appearance order, then the five summary metrics.
pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let flat = rows.iter().map(|r| flatten_config(&r.config)).collect::<Result<Vec<_>>>()?;
    let mut keys: Vec<String> = Vec::new();
    for f in &flat {
        for (k, _) in f {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["cell".to_string()];
    header.extend(keys.iter().cloned());
    header.extend(SUMMARY_METRICS.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for (row, f) in rows.iter().zip(&flat) {
        let mut record = vec![row.cell.to_string()];
        for k in &keys {
            record.push(f.iter().find(|(key, _)| key == k).map(|(_, v)| v.clone()).unwrap_or_default());
        }
        for x in [row.auc_mean, row.auc_stderr, row.final_rmsve_mean, row.final_rmsve_stderr, row.rbar_final_mean] {
            record.push(format_opt(x));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_failures<W: Write>(out: W, cells: &[CellResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FAILURES_HEADER)?;
    for c in cells {
        for f in &c.failures {
            w.write_record([c.cell.to_string(), f.run.to_string(), f.message.clone()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<fs::File> {
    Ok(fs::File::create(path)?)
}

/// Output of `run`: `config.json`, `curves.csv`, `summary.csv`.
pub fn write_run_outputs(dir: &Path, cell: &CellResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(&echo_config(&cell.config))? + "\n")?;
    write_curves(create(&dir.join("curves.csv"))?, &cell.logs)?;
    write_summary(create(&dir.join("summary.csv"))?, std::slice::from_ref(&cell.summary))?;
    Ok(())
}

/// Output of `sweep`: `summary.csv`, `failures.csv`, and per cell
/// `cells/<i>/config.json` and `cells/<i>/curves.csv`.
pub fn write_sweep_outputs(dir: &Path, cells: &[CellResult]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let rows: Vec<SummaryRow> = cells.iter().map(|c| c.summary.clone()).collect();
    write_summary(create(&dir.join("summary.csv"))?, &rows)?;
    write_failures(create(&dir.join("failures.csv"))?, cells)?;
    for c in cells {
        let cell_dir = dir.join("cells").join(c.cell.to_string());
        fs::create_dir_all(&cell_dir)?;
        fs::write(cell_dir.join("config.json"), serde_json::to_string_pretty(&echo_config(&c.config))? + "\n")?;
        write_curves(create(&cell_dir.join("curves.csv"))?, &c.logs)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(format_float(0.25), "2.5000000000000000e-1");
        let x = 0.1 + 0.2;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        assert_eq!(format_opt(None), "");
    }
}
