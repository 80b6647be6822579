//! `towsync` command-line front end.

mod config_file;
mod output;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use config_file::{parse_config, parse_override, parse_value, read_config_file};
use output::{analyze_into, read_json, run_into, sibling_manifest, RunManifest};

#[derive(Parser)]
#[command(
    name = "towsync",
    version,
    about = "Tug-of-war channel selection with phase-coupled scheduling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config file with flat SimConfig keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key (repeatable), e.g. --set K=0.5 --set phi_th=pi/4
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Number of steps
    #[arg(long)]
    steps: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write trace.csv, summary.json and manifest.json
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "towsync-out")]
        out: PathBuf,
    },
    /// Run a parameter grid; `--set KEY=V1,V2,...` adds a grid axis
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// First seed
        #[arg(long)]
        seed: Option<u64>,
        /// Seeds per grid point (seed, seed+1, ...)
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value = "towsync-sweep")]
        out: PathBuf,
    },
    /// Recompute summary.json and phases.csv from a trace
    Analyze {
        trace: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output directory [default: <trace dir>/analysis]
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn overrides(cfg: &ConfigArgs, seed: Option<u64>) -> Vec<String> {
    let mut set = cfg.set.clone();
    if let Some(steps) = cfg.steps {
        set.push(format!("steps={steps}"));
    }
    if let Some(seed) = seed {
        set.push(format!("seed={seed}"));
    }
    set
}

fn cmd_run(cfg: &ConfigArgs, seed: Option<u64>, out: &Path) -> Result<()> {
    let config = parse_config(cfg.config.as_deref(), &overrides(cfg, seed))?;
    let s = run_into(&config, out)?;
    let mean = s.summary.throughput.map(|t| t.mean_success_per_step);
    let groups = s.summary.final_groups.map(|g| g.group_count());
    println!(
        "seed {}: {} steps, mean successes/step {}, groups {}, output in {}",
        config.seed,
        config.steps,
        mean.map_or("-".into(), |m| format!("{m:.4}")),
        groups.map_or("-".into(), |g| g.to_string()),
        out.display()
    );
    Ok(())
}

fn cmd_sweep(
    cfg: &ConfigArgs,
    seed: Option<u64>,
    seeds: u64,
    workers: usize,
    out: &Path,
) -> Result<()> {
    if seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    let mut base = match &cfg.config {
        Some(p) => read_config_file(p)?,
        None => Vec::new(),
    };
    if let Some(steps) = cfg.steps {
        base.push(("steps".into(), Value::from(steps)));
    }
    let mut axes = Vec::new();
    for raw in &cfg.set {
        let (k, v) = parse_override(raw)?;
        let axis = sweep::parse_axis(&k, &v);
        if axis.values.len() == 1 {
            base.push((k, parse_value(&axis.values[0])));
        } else {
            axes.push(axis);
        }
    }
    let first = match seed {
        Some(s) => s,
        None => config_file::build_config(&base)?.seed,
    };
    let seed_list: Vec<u64> = (0..seeds).map(|i| first.wrapping_add(i)).collect();
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let points = sweep::expand(&base, &axes, &seed_list, out)?;
    let total = points.len();
    let rows = sweep::execute(points, workers);
    std::fs::write(out.join("sweep.csv"), sweep::render_csv(&axes, &rows))?;
    let failed: Vec<_> = rows.iter().filter(|r| r.result.is_err()).collect();
    for row in &failed {
        if let Err(e) = &row.result {
            eprintln!("run {} failed: {e:#}", row.point.index);
        }
    }
    println!(
        "{} of {total} runs succeeded, results in {}",
        total - failed.len(),
        out.join("sweep.csv").display()
    );
    if !failed.is_empty() {
        bail!("{} runs failed", failed.len());
    }
    Ok(())
}

fn cmd_analyze(trace: &Path, cfg: &ConfigArgs, out: Option<&Path>) -> Result<()> {
    let explicit = cfg.config.is_some() || !cfg.set.is_empty() || cfg.steps.is_some();
    let config = match sibling_manifest(trace) {
        Some(manifest) if !explicit => read_json::<RunManifest>(&manifest)?.config,
        _ => parse_config(cfg.config.as_deref(), &overrides(cfg, None))?,
    };
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => trace.parent().unwrap_or(Path::new(".")).join("analysis"),
    };
    let s = analyze_into(trace, &config, &dir)?;
    println!(
        "{} steps analyzed, mean successes/step {}, output in {}",
        s.summary.steps,
        s.summary
            .throughput
            .map_or("-".into(), |t| format!("{:.4}", t.mean_success_per_step)),
        dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { cfg, seed, out } => cmd_run(cfg, *seed, out),
        Command::Sweep {
            cfg,
            seed,
            seeds,
            workers,
            out,
        } => cmd_sweep(cfg, *seed, *seeds, *workers, out),
        Command::Analyze { trace, cfg, out } => cmd_analyze(trace, cfg, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
