//! wasm-bindgen bindings behind `www/index.html`.
//!
//! Three operations are exposed: a steppable simulation for the phase
//! circle, the coupling force as a function of phase difference, and the
//! closed-form bounds for a set of channel probabilities.

use std::f64::consts::{PI, TAU};

use towsync::bandit::omega_oracle;
use towsync::phase::{circular_distance, interaction_force, Phase};
use towsync::{
    capacity_bound, detect_groups, init_world, ChannelSet, OmegaMode, SimConfig, WorldState,
};
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct Simulation {
    config: SimConfig,
    world: WorldState,
    channels: Vec<u32>,
    successes: u64,
    steps: u64,
}

#[wasm_bindgen]
impl Simulation {
    /// Reference setting with the given population, coupling, ω mode
    /// (`fixed`, `oracle`, `online`) and seed.
    #[wasm_bindgen(constructor)]
    pub fn new(
        node_count: usize,
        coupling: f64,
        omega_mode: &str,
        seed: u64,
    ) -> Result<Simulation, String> {
        let config = SimConfig {
            node_count,
            coupling,
            omega_mode: omega_mode.parse::<OmegaMode>().map_err(|e| e.to_string())?,
            seed,
            ..Default::default()
        };
        let world = init_world(&config).map_err(|e| e.to_string())?;
        Ok(Simulation {
            channels: vec![0; node_count],
            config,
            world,
            successes: 0,
            steps: 0,
        })
    }

    /// Advances `count` steps; returns successes during those steps.
    pub fn step(&mut self, count: u32) -> Result<u32, String> {
        let mut won = 0u32;
        for _ in 0..count {
            let records = self.world.step(&self.config).map_err(|e| e.to_string())?;
            for r in &records {
                self.channels[r.node] = r.channel as u32;
                won += u32::from(r.success);
            }
        }
        self.successes += u64::from(won);
        self.steps += u64::from(count);
        Ok(won)
    }

    pub fn time(&self) -> u64 {
        self.world.time
    }

    /// Current phases, radians.
    pub fn phases(&self) -> Vec<f64> {
        self.world.phases.iter().map(|p| p.radians()).collect()
    }

    /// Channel each node played on the last step (0-based).
    pub fn channels(&self) -> Vec<u32> {
        self.channels.clone()
    }

    /// Group index of each node, by single linkage at the influence radius.
    pub fn group_labels(&self) -> Vec<u32> {
        let mut labels = vec![0u32; self.world.node_count()];
        if let Ok(report) = detect_groups(&self.world.phases, self.config.influence_radius) {
            for (g, members) in report.groups.iter().enumerate() {
                for &i in members {
                    labels[i] = g as u32;
                }
            }
        }
        labels
    }

    pub fn group_count(&self) -> usize {
        detect_groups(&self.world.phases, self.config.influence_radius)
            .map(|r| r.group_count())
            .unwrap_or(0)
    }

    pub fn mean_success_per_step(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.successes as f64 / self.steps as f64
        }
    }

    pub fn influence_radius(&self) -> f64 {
        self.config.influence_radius
    }
}

/// Force on a node at phase 0 from a neighbour at each of `samples`
/// differences spread evenly over `[-π, π]`; zero outside the influence
/// radius.
#[wasm_bindgen]
pub fn interaction_curve(
    coupling: f64,
    same_channel: bool,
    influence_radius: f64,
    samples: usize,
) -> Vec<f64> {
    let samples = samples.max(2);
    (0..samples)
        .map(|k| {
            let d = -PI + TAU * k as f64 / (samples - 1) as f64;
            let j = Phase::new(d).unwrap_or(Phase::ZERO);
            if circular_distance(Phase::ZERO, j) < influence_radius {
                interaction_force(Phase::ZERO, j, same_channel, coupling)
            } else {
                0.0
            }
        })
        .collect()
}

/// `[capacity bound, ω]` for the given probabilities; `group_size_hint`
/// of 0 means the top-two γ.
#[wasm_bindgen]
pub fn bounds(
    channel_probs: Vec<f64>,
    influence_radius: f64,
    group_size_hint: usize,
) -> Result<Vec<f64>, String> {
    let channels = ChannelSet::new(channel_probs).map_err(|e| e.to_string())?;
    if influence_radius.is_nan() || influence_radius <= 0.0 {
        return Err(format!(
            "influence radius must be positive, got {influence_radius}"
        ));
    }
    let hint = (group_size_hint > 0).then_some(group_size_hint);
    let omega = omega_oracle(channels.probs(), hint).map_err(|e| e.to_string())?;
    Ok(vec![capacity_bound(influence_radius, &channels), omega])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulation_steps_and_reports() {
        let mut sim = Simulation::new(10, 0.5, "online", 0).unwrap();
        let won = sim.step(500).unwrap();
        assert_eq!(sim.time(), 500);
        assert!(won as f64 / 500.0 <= 10.0);
        assert_eq!(sim.phases().len(), 10);
        assert!(sim.phases().iter().all(|p| (0.0..TAU).contains(p)));
        assert!(sim.channels().iter().all(|&c| c < 5));
        let labels = sim.group_labels();
        assert_eq!(
            *labels.iter().max().unwrap() as usize + 1,
            sim.group_count()
        );
        assert!((sim.mean_success_per_step() - won as f64 / 500.0).abs() < 1e-12);
    }

    #[test]
    fn simulation_rejects_bad_input() {
        assert!(Simulation::new(10, 0.5, "greedy", 0).is_err());
        assert!(Simulation::new(0, 0.5, "online", 0).is_err());
        assert!(Simulation::new(10, -1.0, "online", 0).is_err());
    }

    #[test]
    fn curve_shape() {
        let push = interaction_curve(0.5, true, PI, 5);
        let pull = interaction_curve(0.5, false, PI, 5);
        // samples at -π, -π/2, 0, π/2, π
        assert!((push[1] - 0.5).abs() < 1e-12);
        assert!((pull[3] - 0.5).abs() < 1e-12);
        assert!(push[2].abs() < 1e-15);
        let narrow = interaction_curve(0.5, false, PI / 4.0, 5);
        assert_eq!(narrow, vec![0.0; 5]);
        for (a, b) in push.iter().zip(&pull) {
            assert!((a + b).abs() < 1e-15);
        }
    }

    #[test]
    fn reference_bounds() {
        let b = bounds(vec![0.1, 0.2, 0.3, 0.4, 0.5], PI / 4.0, 0).unwrap();
        assert_eq!(b[0], 12.0);
        assert!((b[1] - 0.9 / 1.1).abs() < 1e-12);
        let b = bounds(vec![0.1, 0.2, 0.3, 0.4, 0.5], PI / 4.0, 2).unwrap();
        assert!((b[1] - 0.7 / 1.3).abs() < 1e-12);
        assert!(bounds(vec![0.1, 1.2], PI / 4.0, 0).is_err());
        assert!(bounds(vec![0.1, 0.2], 0.0, 0).is_err());
    }
}
