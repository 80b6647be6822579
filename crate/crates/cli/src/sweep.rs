//! Parameter grids over seeds, run on a pool of worker threads.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, Result};
use serde_json::Value;
use towsync::SimConfig;

use crate::config_file::{build_config, parse_value, split_alternatives};
use crate::output::{run_into, SummaryFile};

/// One axis of the grid: a config key and its alternative values.
#[derive(Debug, Clone)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub index: usize,
    pub params: Vec<(String, String)>,
    pub seed: u64,
    /// Invalid grid points fail individually instead of aborting the sweep.
    pub config: std::result::Result<SimConfig, String>,
    pub dir: PathBuf,
}

pub struct SweepRow {
    pub point: SweepPoint,
    pub result: Result<SummaryFile>,
}

pub fn parse_axis(key: &str, raw: &str) -> Axis {
    Axis {
        key: key.to_string(),
        values: split_alternatives(raw),
    }
}

/// Expands `base × axes × seeds` into concrete runs.
pub fn expand(
    base: &[(String, Value)],
    axes: &[Axis],
    seeds: &[u64],
    out: &Path,
) -> Result<Vec<SweepPoint>> {
    if axes.iter().any(|a| a.values.is_empty()) {
        return Err(anyhow!("empty sweep axis"));
    }
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for axis in axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                axis.values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((axis.key.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    let mut points = Vec::new();
    for params in combos {
        for &seed in seeds {
            let mut settings = base.to_vec();
            settings.extend(params.iter().map(|(k, v)| (k.clone(), parse_value(v))));
            settings.push(("seed".into(), Value::from(seed)));
            let index = points.len();
            points.push(SweepPoint {
                index,
                params: params.clone(),
                seed,
                config: build_config(&settings).map_err(|e| format!("{e:#}")),
                dir: out.join(format!("run-{index:04}")),
            });
        }
    }
    Ok(points)
}

/// Runs every point with at most `workers` concurrent runs; results come
/// back in point order.
pub fn execute(points: Vec<SweepPoint>, workers: usize) -> Vec<SweepRow> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<SummaryFile>>>> =
        points.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1).min(points.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(point) = points.get(i) else { break };
                let result = match &point.config {
                    Ok(config) => run_into(config, &point.dir),
                    Err(e) => Err(anyhow!("invalid configuration: {e}")),
                };
                *slots[i].lock().expect("slot lock") = Some(result);
            });
        }
    });
    points
        .into_iter()
        .zip(slots)
        .map(|(point, slot)| SweepRow {
            point,
            result: slot
                .into_inner()
                .expect("slot lock")
                .unwrap_or_else(|| Err(anyhow!("run did not execute"))),
        })
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Renders `sweep.csv`.
pub fn render_csv(axes: &[Axis], rows: &[SweepRow]) -> String {
    let mut out = String::from("run,seed");
    for a in axes {
        out.push(',');
        out.push_str(&csv_field(&a.key));
    }
    out.push_str(",mean_success_per_step,group_count,min_gap,lock_drift,status\n");
    for row in rows {
        out.push_str(&format!("{},{}", row.point.index, row.point.seed));
        for (_, v) in &row.point.params {
            out.push(',');
            out.push_str(&csv_field(v));
        }
        match &row.result {
            Ok(s) => {
                let mean = s
                    .summary
                    .throughput
                    .as_ref()
                    .map(|t| t.mean_success_per_step);
                let groups = s.summary.final_groups.as_ref();
                out.push_str(&format!(
                    ",{},{},{},{},ok\n",
                    opt(mean),
                    groups
                        .map(|g| g.group_count().to_string())
                        .unwrap_or_default(),
                    opt(groups.and_then(|g| g.min_intergroup_gap)),
                    opt(s.summary.lock.as_ref().map(|l| l.max_pair_drift)),
                ));
            }
            Err(e) => {
                out.push_str(&format!(",,,,,{}\n", csv_field(&format!("error: {e:#}"))));
            }
        }
    }
    out
}
