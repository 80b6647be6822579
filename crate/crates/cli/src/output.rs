//! File layout of a run directory.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use towsync::trace::{CsvTraceSink, PhaseDegreesSink, TraceReader};
use towsync::{run, RunSummary, SimConfig, SummaryBuilder};

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const PHASES_FILE: &str = "phases.csv";

pub const TOOL_VERSION: &str = concat!("towsync ", env!("CARGO_PKG_VERSION"));

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub seed: u64,
    pub config: SimConfig,
    #[serde(flatten)]
    pub summary: RunSummary,
}

/// Contents of `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub config: SimConfig,
    pub seeds: Vec<u64>,
    pub outputs: Vec<String>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))
}

/// Runs one configuration into `dir`, writing the trace, summary and manifest.
pub fn run_into(config: &SimConfig, dir: &Path) -> Result<SummaryFile> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let trace_path = dir.join(TRACE_FILE);
    let file =
        File::create(&trace_path).with_context(|| format!("creating {}", trace_path.display()))?;
    let mut sink = CsvTraceSink::new(BufWriter::new(file))?;
    let out = run(config, &mut [&mut sink])?;
    let summary = SummaryFile {
        seed: config.seed,
        config: config.clone(),
        summary: out.summary,
    };
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    write_json(
        &dir.join(MANIFEST_FILE),
        &RunManifest {
            tool: TOOL_VERSION.to_string(),
            config: config.clone(),
            seeds: vec![config.seed],
            outputs: [TRACE_FILE, SUMMARY_FILE, MANIFEST_FILE]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        },
    )?;
    Ok(summary)
}

/// Recomputes the summary of `trace` and writes `summary.json` and
/// `phases.csv` into `dir`.
pub fn analyze_into(trace: &Path, config: &SimConfig, dir: &Path) -> Result<SummaryFile> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let input = File::open(trace).with_context(|| format!("opening {}", trace.display()))?;
    let reader = TraceReader::new(BufReader::new(input))
        .with_context(|| format!("reading {}", trace.display()))?;
    let phases_path = dir.join(PHASES_FILE);
    let mut phases = PhaseDegreesSink::new(BufWriter::new(
        File::create(&phases_path)
            .with_context(|| format!("creating {}", phases_path.display()))?,
    ))?;
    let mut builder = SummaryBuilder::new(config)?;
    for record in reader {
        let record = record.with_context(|| format!("reading {}", trace.display()))?;
        builder.push(&record)?;
        towsync::TraceSink::record(&mut phases, &record)?;
    }
    towsync::TraceSink::finish(&mut phases)?;
    let summary = SummaryFile {
        seed: config.seed,
        config: config.clone(),
        summary: builder.try_finish()?,
    };
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

pub fn sibling_manifest(trace: &Path) -> Option<PathBuf> {
    let p = trace.parent().unwrap_or(Path::new(".")).join(MANIFEST_FILE);
    p.exists().then_some(p)
}
