//! Run configuration.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::bandit::{omega_oracle, OmegaMode, OmegaPolicy};
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::phase::GeometryParams;

/// Starting phases: drawn uniformly from the initialization stream, or given.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialPhases {
    #[default]
    UniformRandom,
    Explicit(Vec<f64>),
}

impl InitialPhases {
    pub const UNIFORM_RANDOM: &'static str = "uniform-random";
}

impl Serialize for InitialPhases {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            InitialPhases::UniformRandom => s.serialize_str(Self::UNIFORM_RANDOM),
            InitialPhases::Explicit(v) => v.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for InitialPhases {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Name(String),
            List(Vec<f64>),
        }
        match Repr::deserialize(d)? {
            Repr::List(v) => Ok(InitialPhases::Explicit(v)),
            Repr::Name(s) if s == Self::UNIFORM_RANDOM => Ok(InitialPhases::UniformRandom),
            Repr::Name(s) => Err(serde::de::Error::custom(format!(
                "initial_phases: expected \"{}\" or a list of radians, got {s:?}",
                Self::UNIFORM_RANDOM
            ))),
        }
    }
}

/// Every parameter of a run. `Default` gives the reference setting:
/// 10 nodes, 5 channels with `P = 0.1..0.5`, `Ω = φ_th = π/4`, `K = 0.5`,
/// `α = 0.95`, noise amplitude 0.1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub node_count: usize,
    pub channel_count: usize,
    pub phase_increment: f64,
    pub influence_radius: f64,
    pub coupling: f64,
    pub memory_alpha: f64,
    pub noise_amplitude: f64,
    pub channel_probs: ChannelSet,
    pub omega_mode: OmegaMode,
    pub omega_fixed: f64,
    pub omega_group_size_hint: Option<usize>,
    pub steps: u64,
    pub seed: u64,
    pub initial_phases: InitialPhases,
}

impl Default for SimConfig {
    fn default() -> Self {
        let omega = OmegaPolicy::default();
        Self {
            node_count: 10,
            channel_count: 5,
            phase_increment: PI / 4.0,
            influence_radius: PI / 4.0,
            coupling: 0.5,
            memory_alpha: 0.95,
            noise_amplitude: 0.1,
            channel_probs: ChannelSet::default(),
            omega_mode: omega.mode,
            omega_fixed: omega.fixed_value,
            omega_group_size_hint: omega.group_size_hint,
            steps: 10_000,
            seed: 0,
            initial_phases: InitialPhases::UniformRandom,
        }
    }
}

impl SimConfig {
    pub fn geometry(&self) -> GeometryParams {
        GeometryParams {
            phase_increment: self.phase_increment,
            influence_radius: self.influence_radius,
            coupling: self.coupling,
        }
    }

    pub fn omega_policy(&self) -> OmegaPolicy {
        OmegaPolicy {
            mode: self.omega_mode,
            fixed_value: self.omega_fixed,
            group_size_hint: self.omega_group_size_hint,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// ω for the fixed and oracle modes; `None` under the online mode,
    /// where it depends on each node's history.
    pub fn constant_omega(&self) -> Result<Option<f64>> {
        match self.omega_mode {
            OmegaMode::Fixed => Ok(Some(self.omega_fixed)),
            OmegaMode::Oracle => {
                omega_oracle(self.channel_probs.probs(), self.omega_group_size_hint).map(Some)
            }
            OmegaMode::Online => Ok(None),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count == 0 {
            return Err(Error::config("node_count", "must be at least 1"));
        }
        if self.channel_count < 2 {
            return Err(Error::config(
                "channel_count",
                format!("must be at least 2, got {}", self.channel_count),
            ));
        }
        if self.channel_probs.len() != self.channel_count {
            return Err(Error::config(
                "channel_probs",
                format!(
                    "has {} entries but channel_count is {}",
                    self.channel_probs.len(),
                    self.channel_count
                ),
            ));
        }
        self.geometry().validate()?;
        if !(0.0..=1.0).contains(&self.memory_alpha) {
            return Err(Error::config(
                "memory_alpha",
                format!("must lie in [0, 1], got {}", self.memory_alpha),
            ));
        }
        if !(self.noise_amplitude.is_finite() && self.noise_amplitude >= 0.0) {
            return Err(Error::config(
                "noise_amplitude",
                format!(
                    "must be finite and non-negative, got {}",
                    self.noise_amplitude
                ),
            ));
        }
        self.omega_policy().validate(self.channel_count)?;
        if let InitialPhases::Explicit(v) = &self.initial_phases {
            if v.len() != self.node_count {
                return Err(Error::config(
                    "initial_phases",
                    format!(
                        "has {} entries but node_count is {}",
                        v.len(),
                        self.node_count
                    ),
                ));
            }
            if let Some(bad) = v
                .iter()
                .find(|p| !(p.is_finite() && (0.0..TAU).contains(*p)))
            {
                return Err(Error::config(
                    "initial_phases",
                    format!("each phase must lie in [0, 2π), got {bad}"),
                ));
            }
        }
        Ok(())
    }
}
