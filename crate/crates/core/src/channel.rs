//! Bernoulli channels and the collision rule.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{circular_distance, Phase};

/// Success probabilities `P_k` of the channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ChannelSet {
    probs: Vec<f64>,
}

impl ChannelSet {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::config(
                "channel_probs",
                "at least one channel is required",
            ));
        }
        if let Some(bad) = probs
            .iter()
            .find(|p| !(p.is_finite() && (0.0..=1.0).contains(*p)))
        {
            return Err(Error::config(
                "channel_probs",
                format!("probabilities must lie in [0, 1], got {bad}"),
            ));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn prob(&self, channel: usize) -> Result<f64> {
        self.probs
            .get(channel)
            .copied()
            .ok_or(Error::InvalidChannel {
                channel,
                count: self.probs.len(),
            })
    }
}

impl Default for ChannelSet {
    fn default() -> Self {
        Self {
            probs: vec![0.1, 0.2, 0.3, 0.4, 0.5],
        }
    }
}

impl TryFrom<Vec<f64>> for ChannelSet {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ChannelSet> for Vec<f64> {
    fn from(c: ChannelSet) -> Self {
        c.probs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransmissionOutcome {
    pub node: usize,
    pub channel: usize,
    pub collided: bool,
    pub bernoulli_win: bool,
    /// `bernoulli_win && !collided`
    pub success: bool,
}

/// Marks every node that shares its channel with another node strictly
/// within `influence_radius` on the circle.
pub fn find_collisions(
    phases: &[Phase],
    selections: &[usize],
    influence_radius: f64,
) -> Result<Vec<bool>> {
    if phases.len() != selections.len() {
        return Err(Error::LengthMismatch {
            what: "selections",
            got: selections.len(),
            expected: phases.len(),
        });
    }
    let m = phases.len();
    let mut collided = vec![false; m];
    for i in 0..m {
        for j in (i + 1)..m {
            if selections[i] == selections[j]
                && circular_distance(phases[i], phases[j]) < influence_radius
            {
                collided[i] = true;
                collided[j] = true;
            }
        }
    }
    Ok(collided)
}

/// Resolves transmissions from one uniform draw per node (`u < P` wins).
pub fn outcomes_from_draws(
    selections: &[usize],
    collided: &[bool],
    channels: &ChannelSet,
    draws: &[f64],
) -> Result<Vec<TransmissionOutcome>> {
    let m = selections.len();
    if collided.len() != m {
        return Err(Error::LengthMismatch {
            what: "collided",
            got: collided.len(),
            expected: m,
        });
    }
    if draws.len() != m {
        return Err(Error::LengthMismatch {
            what: "draws",
            got: draws.len(),
            expected: m,
        });
    }
    selections
        .iter()
        .zip(collided)
        .zip(draws)
        .enumerate()
        .map(|(node, ((&channel, &collided), &u))| {
            let bernoulli_win = u < channels.prob(channel)?;
            Ok(TransmissionOutcome {
                node,
                channel,
                collided,
                bernoulli_win,
                success: bernoulli_win && !collided,
            })
        })
        .collect()
}

/// Draws an independent Bernoulli trial for every node, in node order,
/// collided or not, and masks the collided ones.
pub fn draw_outcomes<R: Rng + ?Sized>(
    selections: &[usize],
    collided: &[bool],
    channels: &ChannelSet,
    rng: &mut R,
) -> Result<Vec<TransmissionOutcome>> {
    let draws: Vec<f64> = (0..selections.len()).map(|_| rng.gen()).collect();
    outcomes_from_draws(selections, collided, channels, &draws)
}
