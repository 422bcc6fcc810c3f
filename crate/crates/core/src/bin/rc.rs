use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use reward_centering::harness::{
    run_cells, thread_limit, write_run_outputs, write_sweep_outputs, ExperimentConfig, SweepConfig,
};
use reward_centering::mdp::{induce_chain, validate, FiniteMdp, PolicyMatrix};
use reward_centering::solver::{value_report, ValueReport};
use reward_centering::{Error, Result};

#[derive(Parser)]
#[command(name = "rc", version, about = "Reward-centering experiments and exact solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config for all of its runs.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Expand a sweep config into cells and run them all.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact values of a policy on a finite MDP for several discount factors.
    Solve {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        gammas: Vec<f64>,
        /// Where to write the JSON reports.
        #[arg(long, default_value = "value_report.json")]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn run(config: &Path, out: &Path) -> Result<()> {
    let cfg = ExperimentConfig::from_json(&read(config)?)?;
    let mut cells = run_cells(std::slice::from_ref(&cfg), thread_limit()?)?;
    let cell = cells.remove(0);
    // A single experiment has nothing to fall back on, so any failed run
    // fails the command.
    if let Some(f) = cell.failures.first() {
        return Err(rerun_error(&cfg, f.run));
    }
    write_run_outputs(out, &cell)?;
    println!("{} runs of {} steps written to {}", cell.logs.len(), cfg.total_steps, out.display());
    Ok(())
}

/// Recovers the typed error of a failed run so the exit code reflects it.
fn rerun_error(cfg: &ExperimentConfig, run: usize) -> Error {
    use reward_centering::harness::{run_experiment, RunSeeds};
    match run_experiment(cfg, RunSeeds::derive(cfg.base_seed, 0, run), run) {
        Err(e) => e,
        Ok(_) => Error::Domain(format!("run {run} failed nondeterministically")),
    }
}

fn sweep(config: &Path, out: &Path) -> Result<()> {
    let cells = SweepConfig::from_json(&read(config)?)?.cells()?;
    let results = run_cells(&cells, thread_limit()?)?;
    write_sweep_outputs(out, &results)?;
    let failed: usize = results.iter().map(|c| c.failures.len()).sum();
    println!("{} cells written to {} ({failed} failed runs)", results.len(), out.display());
    Ok(())
}

fn table(reports: &[ValueReport]) -> String {
    let n = reports[0].v_diff.len();
    let mut s = String::new();
    let _ = write!(s, "{:<30}", "");
    for i in 0..n {
        let _ = write!(s, "{:>9}", format!("s{i}"));
    }
    s.push('\n');
    let row = |s: &mut String, label: String, v: &[f64]| {
        let _ = write!(s, "{label:<30}");
        for x in v {
            let _ = write!(s, "{x:>9.2}");
        }
        s.push('\n');
    };
    s.push_str("Standard discounted values\n");
    for r in reports {
        if let Some(v) = &r.v_gamma {
            row(&mut s, format!("  gamma={}", r.gamma), v);
        }
    }
    s.push_str("Centered discounted values\n");
    for r in reports {
        row(&mut s, format!("  gamma={}", r.gamma), &r.v_centered);
    }
    row(&mut s, "Differential values".into(), &reports[0].v_diff);
    let _ = writeln!(s, "Average reward {}", reports[0].avg_reward);
    s
}

fn solve(mdp: &Path, policy: &Path, gammas: &[f64], out: &Path) -> Result<()> {
    let mdp: FiniteMdp = serde_json::from_str(&read(mdp)?)?;
    if let Some(v) = validate(&mdp).first() {
        return Err(Error::Config(format!("state {} action {}: {}: {}", v.state, v.action, v.check, v.detail)));
    }
    let policy: PolicyMatrix = serde_json::from_str(&read(policy)?)?;
    if let Some(g) = gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(Error::Config(format!("discount factor {g} outside [0, 1]")));
    }
    let chain = induce_chain(&mdp, &policy)?;
    let reports = gammas.iter().map(|&g| value_report(&chain, g)).collect::<Result<Vec<_>>>()?;
    fs::write(out, serde_json::to_string_pretty(&reports)? + "\n")?;
    print!("{}", table(&reports));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, out } => run(config, out),
        Command::Sweep { config, out } => sweep(config, out),
        Command::Solve { mdp, policy, gammas, out } => solve(mdp, policy, gammas, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
