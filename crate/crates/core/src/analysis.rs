//! Group detection, phase locking and throughput metrics.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::config::SimConfig;
use crate::engine::StepRecord;
use crate::error::{Error, Result};
use crate::phase::{signed_difference, wrap_phase, wrap_signed, Phase};

/// Window over which phase locking is measured, in steps.
pub const LOCK_WINDOW: usize = 1_000;
/// Drift below which a pair counts as locked: one degree.
pub const LOCK_TOLERANCE: f64 = 0.017_453_292_519_943_295;
/// Spacing of the intermediate group snapshots, in steps.
pub const REPORT_INTERVAL: u64 = 1_000;

/// Synchronization groups found by single-linkage on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    /// Members of each group, in phase order around the circle.
    pub groups: Vec<Vec<usize>>,
    /// Circular mean phase of each group, radians.
    pub group_centers: Vec<f64>,
    /// Smallest gap separating two groups; `None` for a single group.
    pub min_intergroup_gap: Option<f64>,
    /// Channels held by each group's members, same order as `groups`.
    /// Empty when the report was built from phases alone.
    pub channels_per_group: Vec<Vec<usize>>,
}

impl GroupReport {
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// Index of the group holding `node`.
    pub fn group_of(&self, node: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&node))
    }

    pub fn attach_channels(&mut self, selections: &[usize]) -> Result<()> {
        let m: usize = self.groups.iter().map(Vec::len).sum();
        if selections.len() != m {
            return Err(Error::LengthMismatch {
                what: "selections",
                got: selections.len(),
                expected: m,
            });
        }
        self.channels_per_group = self
            .groups
            .iter()
            .map(|g| g.iter().map(|&i| selections[i]).collect())
            .collect();
        Ok(())
    }
}

fn circular_mean(phases: impl Iterator<Item = Phase>) -> f64 {
    let (s, c) = phases.fold((0.0, 0.0), |(s, c), p| {
        (s + p.radians().sin(), c + p.radians().cos())
    });
    wrap_phase(s.atan2(c)).map(Phase::radians).unwrap_or(0.0)
}

/// Clusters phases by single linkage: neighbours (in circular order) closer
/// than `threshold` share a group. Fewer than two gaps at or above the
/// threshold leave a single group.
pub fn detect_groups(phases: &[Phase], threshold: f64) -> Result<GroupReport> {
    if phases.is_empty() {
        return Err(Error::Empty("phases"));
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::config(
            "threshold",
            format!("must be positive, got {threshold}"),
        ));
    }
    let m = phases.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        phases[a]
            .radians()
            .total_cmp(&phases[b].radians())
            .then(a.cmp(&b))
    });

    // gap[k] separates order[k] from its successor, wrapping at the end
    let gap = |k: usize| -> f64 {
        let here = phases[order[k]].radians();
        if k + 1 < m {
            phases[order[k + 1]].radians() - here
        } else {
            phases[order[0]].radians() + TAU - here
        }
    };
    let cuts: Vec<usize> = (0..m).filter(|&k| gap(k) >= threshold).collect();

    if cuts.len() < 2 {
        // start the walk right after the single cut, if any
        let start = cuts.first().map_or(0, |&k| (k + 1) % m);
        let members: Vec<usize> = (0..m).map(|s| order[(start + s) % m]).collect();
        return Ok(GroupReport {
            group_centers: vec![circular_mean(members.iter().map(|&i| phases[i]))],
            groups: vec![members],
            min_intergroup_gap: None,
            channels_per_group: Vec::new(),
        });
    }

    let mut groups = Vec::with_capacity(cuts.len());
    for (c, &cut) in cuts.iter().enumerate() {
        let end = cuts[(c + 1) % cuts.len()];
        let mut members = Vec::new();
        let mut k = (cut + 1) % m;
        loop {
            members.push(order[k]);
            if k == end {
                break;
            }
            k = (k + 1) % m;
        }
        groups.push(members);
    }
    let min_gap = cuts.iter().map(|&k| gap(k)).fold(f64::INFINITY, f64::min);
    Ok(GroupReport {
        group_centers: groups
            .iter()
            .map(|g| circular_mean(g.iter().map(|&i| phases[i])))
            .collect(),
        groups,
        min_intergroup_gap: Some(min_gap),
        channels_per_group: Vec::new(),
    })
}

/// [`detect_groups`] with each group's channel occupancy filled in.
pub fn group_report(phases: &[Phase], selections: &[usize], threshold: f64) -> Result<GroupReport> {
    let mut report = detect_groups(phases, threshold)?;
    report.attach_channels(selections)?;
    Ok(report)
}

/// Checks of a group report against the expected organisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conclusions {
    /// `⌈M/N⌉`
    pub required_groups: usize,
    pub group_count: usize,
    /// At least `⌈M/N⌉` groups.
    pub enough_groups: bool,
    /// Every inter-group gap exceeds the influence radius (vacuous for one group).
    pub gaps_exceed_radius: bool,
}

pub fn check_conclusions(
    report: &GroupReport,
    node_count: usize,
    channel_count: usize,
    influence_radius: f64,
) -> Conclusions {
    let required_groups = node_count.div_ceil(channel_count.max(1));
    Conclusions {
        required_groups,
        group_count: report.group_count(),
        enough_groups: report.group_count() >= required_groups,
        gaps_exceed_radius: report
            .min_intergroup_gap
            .is_none_or(|g| g > influence_radius),
    }
}

fn check_window(window: &[Vec<Phase>]) -> Result<usize> {
    if window.len() < 2 {
        return Err(Error::config(
            "lock_window",
            format!("need at least 2 steps, got {}", window.len()),
        ));
    }
    let m = window[0].len();
    if let Some(row) = window.iter().find(|r| r.len() != m) {
        return Err(Error::LengthMismatch {
            what: "window row",
            got: row.len(),
            expected: m,
        });
    }
    Ok(m)
}

fn drift_unchecked(window: &[Vec<Phase>], i: usize, j: usize) -> f64 {
    let first = signed_difference(window[0][i], window[0][j]);
    let (lo, hi) = window.iter().fold((0.0f64, 0.0f64), |(lo, hi), row| {
        let dev = wrap_signed(signed_difference(row[i], row[j]) - first);
        (lo.min(dev), hi.max(dev))
    });
    hi - lo
}

/// Range (max − min) of the wrapped phase difference between nodes `i` and
/// `j` over the window.
pub fn pair_drift(window: &[Vec<Phase>], i: usize, j: usize) -> Result<f64> {
    let m = check_window(window)?;
    for idx in [i, j] {
        if idx >= m {
            return Err(Error::IndexOutOfRange { index: idx, len: m });
        }
    }
    Ok(drift_unchecked(window, i, j))
}

/// Largest [`pair_drift`] over all node pairs; `window[t][i]` is node `i`'s
/// phase at the t-th step of the window.
pub fn lock_metric(window: &[Vec<Phase>]) -> Result<f64> {
    let m = check_window(window)?;
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in (i + 1)..m {
            worst = worst.max(drift_unchecked(window, i, j));
        }
    }
    Ok(worst)
}

/// `(2π/φ_th) · Σ P_k`: successful transmissions per step if every
/// φ_th-wide slot of the circle carried one node per channel.
pub fn capacity_bound(influence_radius: f64, channels: &ChannelSet) -> f64 {
    TAU / influence_radius * channels.total()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputSummary {
    pub mean_success_per_step: f64,
    pub collision_rate: f64,
    pub per_channel_success_counts: Vec<u64>,
    pub capacity_bound: f64,
}

/// Aggregates a complete trace.
pub fn throughput_summary(trace: &[StepRecord], config: &SimConfig) -> Result<ThroughputSummary> {
    if trace.is_empty() {
        return Err(Error::Empty("trace"));
    }
    let mut b = SummaryBuilder::new(config)?;
    for r in trace {
        b.push(r)?;
    }
    Ok(b.finish().throughput.expect("non-empty trace"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockReport {
    /// Steps in the window actually used.
    pub window: usize,
    /// Largest drift over all pairs.
    pub max_pair_drift: f64,
    /// Best-locked pair of nodes lying in different final groups.
    pub intergroup_pair: Option<(usize, usize)>,
    pub intergroup_pair_drift: Option<f64>,
}

impl LockReport {
    pub fn intergroup_locked(&self, tolerance: f64) -> bool {
        self.intergroup_pair_drift.is_some_and(|d| d < tolerance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSnapshot {
    pub t: u64,
    pub group_count: usize,
    pub min_intergroup_gap: Option<f64>,
}

/// Everything reported about one run. A pure function of the trace and
/// the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: u64,
    pub throughput: Option<ThroughputSummary>,
    /// Groups at the last recorded step.
    pub final_groups: Option<GroupReport>,
    pub conclusions: Option<Conclusions>,
    pub lock: Option<LockReport>,
    pub group_history: Vec<GroupSnapshot>,
}

/// Streaming accumulator behind [`RunSummary`]. Records must arrive in
/// step order, nodes ascending within a step.
#[derive(Debug, Clone)]
pub struct SummaryBuilder {
    node_count: usize,
    channel_count: usize,
    influence_radius: f64,
    capacity: f64,
    lock_window: usize,
    steps: u64,
    records: u64,
    successes: u64,
    collisions: u64,
    per_channel: Vec<u64>,
    current_t: Option<u64>,
    current_phases: Vec<Phase>,
    current_channels: Vec<usize>,
    window: VecDeque<Vec<Phase>>,
    last_channels: Vec<usize>,
    history: Vec<GroupSnapshot>,
}

impl SummaryBuilder {
    pub fn new(config: &SimConfig) -> Result<Self> {
        Self::with_window(config, LOCK_WINDOW)
    }

    pub fn with_window(config: &SimConfig, lock_window: usize) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            node_count: config.node_count,
            channel_count: config.channel_count,
            influence_radius: config.influence_radius,
            capacity: capacity_bound(config.influence_radius, &config.channel_probs),
            lock_window: lock_window.max(2),
            steps: 0,
            records: 0,
            successes: 0,
            collisions: 0,
            per_channel: vec![0; config.channel_count],
            current_t: None,
            current_phases: Vec::with_capacity(config.node_count),
            current_channels: Vec::with_capacity(config.node_count),
            window: VecDeque::with_capacity(lock_window + 1),
            last_channels: Vec::new(),
            history: Vec::new(),
        })
    }

    pub fn push(&mut self, r: &StepRecord) -> Result<()> {
        if self.current_t != Some(r.t) {
            if self.current_t.is_some() {
                self.close_step()?;
            }
            if let Some(last) = self.window.back().and(self.current_t) {
                if r.t != last + 1 {
                    return Err(Error::Trace(format!("step {} follows step {last}", r.t)));
                }
            }
            self.current_t = Some(r.t);
        }
        if r.node != self.current_phases.len() {
            return Err(Error::Trace(format!(
                "step {}: expected node {}, got {}",
                r.t,
                self.current_phases.len(),
                r.node
            )));
        }
        if r.channel >= self.channel_count {
            return Err(Error::InvalidChannel {
                channel: r.channel,
                count: self.channel_count,
            });
        }
        self.current_phases.push(wrap_phase(r.phase_before)?);
        self.current_channels.push(r.channel);
        self.records += 1;
        if r.success {
            self.successes += 1;
            self.per_channel[r.channel] += 1;
        }
        if r.collided {
            self.collisions += 1;
        }
        Ok(())
    }

    fn close_step(&mut self) -> Result<()> {
        let t = self.current_t.expect("open step");
        if self.current_phases.len() != self.node_count {
            return Err(Error::Trace(format!(
                "step {t} has {} nodes, expected {}",
                self.current_phases.len(),
                self.node_count
            )));
        }
        let phases = std::mem::take(&mut self.current_phases);
        if t.is_multiple_of(REPORT_INTERVAL) {
            let report = detect_groups(&phases, self.influence_radius)?;
            self.history.push(GroupSnapshot {
                t,
                group_count: report.group_count(),
                min_intergroup_gap: report.min_intergroup_gap,
            });
        }
        self.window.push_back(phases);
        if self.window.len() > self.lock_window {
            self.window.pop_front();
        }
        self.last_channels = std::mem::take(&mut self.current_channels);
        self.steps += 1;
        Ok(())
    }

    /// Closes the last step; fails if it is incomplete.
    pub fn try_finish(mut self) -> Result<RunSummary> {
        if self.current_t.is_some() {
            self.close_step()?;
        }
        let throughput = (self.steps > 0).then(|| ThroughputSummary {
            mean_success_per_step: self.successes as f64 / self.steps as f64,
            collision_rate: self.collisions as f64 / self.records as f64,
            per_channel_success_counts: self.per_channel.clone(),
            capacity_bound: self.capacity,
        });
        let final_groups = match self.window.back() {
            Some(phases) => Some(group_report(
                phases,
                &self.last_channels,
                self.influence_radius,
            )?),
            None => None,
        };
        let conclusions = final_groups.as_ref().map(|g| {
            check_conclusions(
                g,
                self.node_count,
                self.channel_count,
                self.influence_radius,
            )
        });
        let lock = match &final_groups {
            Some(groups) if self.window.len() >= 2 => {
                let window: Vec<Vec<Phase>> = self.window.iter().cloned().collect();
                let mut best: Option<((usize, usize), f64)> = None;
                for i in 0..self.node_count {
                    for j in (i + 1)..self.node_count {
                        if groups.group_of(i) == groups.group_of(j) {
                            continue;
                        }
                        let d = drift_unchecked(&window, i, j);
                        if best.is_none_or(|(_, b)| d < b) {
                            best = Some(((i, j), d));
                        }
                    }
                }
                Some(LockReport {
                    window: window.len(),
                    max_pair_drift: lock_metric(&window)?,
                    intergroup_pair: best.map(|(p, _)| p),
                    intergroup_pair_drift: best.map(|(_, d)| d),
                })
            }
            _ => None,
        };
        Ok(RunSummary {
            steps: self.steps,
            throughput,
            final_groups,
            conclusions,
            lock,
            group_history: self.history,
        })
    }

    /// Like [`try_finish`](Self::try_finish) for builders fed by the
    /// engine, which always emits complete steps.
    pub fn finish(self) -> RunSummary {
        self.try_finish().expect("engine emits complete steps")
    }
}
