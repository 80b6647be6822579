//! Discrete-time simulation engine.
//!
//! Each step runs, for all nodes at once:
//!
//! 1. noise, displacements and argmax channel selection,
//! 2. collision detection and Bernoulli transmission draws,
//! 3. reward and memory update,
//! 4. the synchronous phase update, with coupling applied only to nodes
//!    sitting in their interaction gate,
//!
//! then advances the clock. Phase forces are evaluated against the
//! pre-step snapshot and this step's selections.
//!
//! Randomness comes from four ChaCha streams derived from the seed
//! (initialization, noise, Bernoulli, tie-break). Each is consumed in
//! ascending node order, then channel order, so a run is bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{RunSummary, SummaryBuilder};
use crate::bandit::{
    displacements, omega_online, reward_value, select_channel_with_draw, BanditState,
};
use crate::channel::{find_collisions, outcomes_from_draws};
use crate::config::{InitialPhases, SimConfig};
use crate::error::{Error, Result};
use crate::phase::{at_interaction_gate, interaction_force, neighbors_within, wrap_phase, Phase};

const STREAM_INIT: u64 = 0;
const STREAM_NOISE: u64 = 1;
const STREAM_BERNOULLI: u64 = 2;
const STREAM_TIE_BREAK: u64 = 3;

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone)]
struct RngStreams {
    noise: ChaCha8Rng,
    bernoulli: ChaCha8Rng,
    tie_break: ChaCha8Rng,
}

/// The evolving state of a run.
#[derive(Debug, Clone)]
pub struct WorldState {
    pub time: u64,
    pub phases: Vec<Phase>,
    pub bandits: Vec<BanditState>,
    streams: RngStreams,
}

/// All random inputs of one step, as raw uniforms in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDraws {
    /// `noise[i][k]`; the noise term is `Amp · (2u - 1)`.
    pub noise: Vec<Vec<f64>>,
    pub tie_break: Vec<f64>,
    pub bernoulli: Vec<f64>,
}

/// One node's observation at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub node: usize,
    /// Phase at the start of the step, radians.
    pub phase_before: f64,
    pub channel: usize,
    pub collided: bool,
    pub success: bool,
    pub reward: f64,
    /// Whether the coupling term was applied to this node this step.
    pub gated: bool,
}

/// Builds the initial world: phases from the initialization stream (or the
/// explicit list), zeroed memories, `t = 0`.
pub fn init_world(config: &SimConfig) -> Result<WorldState> {
    config.validate()?;
    let phases = match &config.initial_phases {
        InitialPhases::Explicit(v) => v.iter().map(|&p| wrap_phase(p)).collect::<Result<_>>()?,
        InitialPhases::UniformRandom => {
            let mut rng = substream(config.seed, STREAM_INIT);
            (0..config.node_count)
                .map(|_| wrap_phase(rng.gen::<f64>() * std::f64::consts::TAU))
                .collect::<Result<_>>()?
        }
    };
    Ok(WorldState {
        time: 0,
        phases,
        bandits: vec![BanditState::new(config.channel_count); config.node_count],
        streams: RngStreams {
            noise: substream(config.seed, STREAM_NOISE),
            bernoulli: substream(config.seed, STREAM_BERNOULLI),
            tie_break: substream(config.seed, STREAM_TIE_BREAK),
        },
    })
}

impl WorldState {
    pub fn node_count(&self) -> usize {
        self.phases.len()
    }

    /// Pulls the next step's random inputs from the streams.
    pub fn draw(&mut self, channels: usize) -> StepDraws {
        let m = self.node_count();
        let s = &mut self.streams;
        StepDraws {
            noise: (0..m)
                .map(|_| (0..channels).map(|_| s.noise.gen()).collect())
                .collect(),
            tie_break: (0..m).map(|_| s.tie_break.gen()).collect(),
            bernoulli: (0..m).map(|_| s.bernoulli.gen()).collect(),
        }
    }

    /// Advances one step, drawing randomness from the world's streams.
    pub fn step(&mut self, config: &SimConfig) -> Result<Vec<StepRecord>> {
        let draws = self.draw(config.channel_count);
        self.step_with_draws(config, &draws)
    }

    /// Advances one step using externally supplied random inputs.
    pub fn step_with_draws(
        &mut self,
        config: &SimConfig,
        draws: &StepDraws,
    ) -> Result<Vec<StepRecord>> {
        let m = self.node_count();
        let n = config.channel_count;
        if draws.noise.len() != m || draws.tie_break.len() != m || draws.bernoulli.len() != m {
            return Err(Error::LengthMismatch {
                what: "step draws",
                got: draws
                    .noise
                    .len()
                    .min(draws.tie_break.len())
                    .min(draws.bernoulli.len()),
                expected: m,
            });
        }

        // selection
        let mut selections = Vec::with_capacity(m);
        for (bandit, (noise_u, &u)) in self
            .bandits
            .iter()
            .zip(draws.noise.iter().zip(&draws.tie_break))
        {
            if noise_u.len() != n {
                return Err(Error::LengthMismatch {
                    what: "noise draws",
                    got: noise_u.len(),
                    expected: n,
                });
            }
            let noise: Vec<f64> = noise_u
                .iter()
                .map(|&u| config.noise_amplitude * (2.0 * u - 1.0))
                .collect();
            let x = displacements(&bandit.q_values, &noise)?;
            selections.push(select_channel_with_draw(&x, u)?);
        }

        // transmission
        let collided = find_collisions(&self.phases, &selections, config.influence_radius)?;
        let outcomes = outcomes_from_draws(
            &selections,
            &collided,
            &config.channel_probs,
            &draws.bernoulli,
        )?;

        // learning
        let constant_omega = config.constant_omega()?;
        let mut rewards = Vec::with_capacity(m);
        for (bandit, out) in self.bandits.iter_mut().zip(&outcomes) {
            let omega = match constant_omega {
                Some(w) => w,
                None => omega_online(bandit, config.omega_group_size_hint)?,
            };
            let reward = reward_value(out.success, omega);
            bandit.memory_update(out.channel, reward, out.success, config.memory_alpha)?;
            rewards.push(reward);
        }

        // phases, from the frozen snapshot
        let before = self.phases.clone();
        let mut gated = vec![false; m];
        for i in 0..m {
            let mut delta = config.phase_increment;
            if at_interaction_gate(before[i], config.phase_increment) {
                gated[i] = true;
                for j in neighbors_within(i, &before, config.influence_radius)? {
                    delta += interaction_force(
                        before[i],
                        before[j],
                        selections[i] == selections[j],
                        config.coupling,
                    );
                }
            }
            self.phases[i] = before[i].advance(delta)?;
        }

        let t = self.time;
        self.time += 1;
        Ok(outcomes
            .iter()
            .zip(rewards)
            .map(|(out, reward)| StepRecord {
                t,
                node: out.node,
                phase_before: before[out.node].radians(),
                channel: out.channel,
                collided: out.collided,
                success: out.success,
                reward,
                gated: gated[out.node],
            })
            .collect())
    }
}

/// Consumer of the per-step trace.
pub trait TraceSink {
    fn record(&mut self, record: &StepRecord) -> std::io::Result<()>;

    fn finish(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

impl TraceSink for Vec<StepRecord> {
    fn record(&mut self, record: &StepRecord) -> std::io::Result<()> {
        self.push(*record);
        Ok(())
    }
}

/// Final state and summary of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub world: WorldState,
    pub summary: RunSummary,
}

/// Runs `config.steps` steps, forwarding every record to each sink and
/// to the summary builder.
pub fn run(config: &SimConfig, sinks: &mut [&mut dyn TraceSink]) -> Result<RunOutput> {
    let mut world = init_world(config)?;
    let mut summary = SummaryBuilder::new(config)?;
    for _ in 0..config.steps {
        let step = world.time;
        let records = world.step(config)?;
        for rec in &records {
            for sink in sinks.iter_mut() {
                sink.record(rec).map_err(|e| Error::Sink {
                    step,
                    message: e.to_string(),
                })?;
            }
            summary.push(rec)?;
        }
    }
    for sink in sinks.iter_mut() {
        sink.finish().map_err(|e| Error::Sink {
            step: world.time,
            message: e.to_string(),
        })?;
    }
    Ok(RunOutput {
        world,
        summary: summary.finish(),
    })
}
