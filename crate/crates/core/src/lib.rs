//! Tug-of-war channel selection combined with phase-coupled time
//! scheduling.
//!
//! `M` oscillator nodes each choose one of `N` Bernoulli channels with a
//! tug-of-war bandit. Once per revolution a node's phase is pushed away
//! from nearby nodes on the same channel and pulled toward nearby nodes on
//! other channels, so the population self-organizes into synchronization
//! groups whose members hold distinct channels.

pub mod analysis;
pub mod bandit;
pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod phase;
pub mod trace;

pub use analysis::{
    capacity_bound, check_conclusions, detect_groups, group_report, lock_metric, pair_drift,
    throughput_summary, Conclusions, GroupReport, LockReport, RunSummary, SummaryBuilder,
    ThroughputSummary,
};
pub use bandit::{BanditState, OmegaMode, OmegaPolicy};
pub use channel::{ChannelSet, TransmissionOutcome};
pub use config::{InitialPhases, SimConfig};
pub use engine::{init_world, run, RunOutput, StepDraws, StepRecord, TraceSink, WorldState};
pub use error::{Error, Result};
pub use phase::{GeometryParams, Phase};
