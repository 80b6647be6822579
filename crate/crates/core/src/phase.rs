//! Circular phase arithmetic.
//!
//! Phases live on the circle `[0, 2π)`. Distances are measured along the
//! shorter arc, and the coupling force uses the signed difference in
//! `(-π, π]` so it stays continuous across the `0 / 2π` seam.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An angle in radians, always in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Phase(f64);

impl Phase {
    pub const ZERO: Phase = Phase(0.0);

    /// Wraps an arbitrary finite angle onto the circle.
    pub fn new(raw: f64) -> Result<Self> {
        wrap_phase(raw)
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// Advances the phase by `delta` radians and re-wraps.
    pub fn advance(self, delta: f64) -> Result<Self> {
        wrap_phase(self.0 + delta)
    }
}

impl TryFrom<f64> for Phase {
    type Error = Error;

    fn try_from(raw: f64) -> Result<Self> {
        wrap_phase(raw)
    }
}

impl From<Phase> for f64 {
    fn from(p: Phase) -> f64 {
        p.0
    }
}

/// Coupling geometry shared by every node: Ω, φ_th and K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    /// Phase advance per step (Ω).
    pub phase_increment: f64,
    /// Radius of the area of influence (φ_th).
    pub influence_radius: f64,
    /// Coupling strength (K).
    pub coupling: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        Self {
            phase_increment: PI / 4.0,
            influence_radius: PI / 4.0,
            coupling: 0.5,
        }
    }
}

impl GeometryParams {
    pub fn validate(&self) -> Result<()> {
        let in_half_circle = |x: f64| x.is_finite() && x > 0.0 && x <= PI;
        if !in_half_circle(self.phase_increment) {
            return Err(Error::config(
                "phase_increment",
                format!("must lie in (0, π], got {}", self.phase_increment),
            ));
        }
        if !in_half_circle(self.influence_radius) {
            return Err(Error::config(
                "influence_radius",
                format!("must lie in (0, π], got {}", self.influence_radius),
            ));
        }
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(Error::config(
                "coupling",
                format!("must be finite and non-negative, got {}", self.coupling),
            ));
        }
        Ok(())
    }
}

/// Reduces `raw` modulo 2π into `[0, 2π)`.
pub fn wrap_phase(raw: f64) -> Result<Phase> {
    if !raw.is_finite() {
        return Err(Error::NonFinite(raw));
    }
    let r = raw.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly 2π
    Ok(Phase(if r >= TAU { 0.0 } else { r }))
}

/// Signed difference `to - from`, wrapped into `(-π, π]`.
pub fn signed_difference(from: Phase, to: Phase) -> f64 {
    wrap_signed(to.0 - from.0)
}

/// Wraps an angle already in `(-2π, 2π)` into `(-π, π]`.
pub fn wrap_signed(d: f64) -> f64 {
    if d > PI {
        d - TAU
    } else if d <= -PI {
        d + TAU
    } else {
        d
    }
}

/// Shorter-arc distance between two phases, in `[0, π]`.
pub fn circular_distance(a: Phase, b: Phase) -> f64 {
    let d = (a.0 - b.0).abs();
    d.min(TAU - d)
}

/// Indices `j != i` whose phase lies strictly within `radius` of node `i`.
pub fn neighbors_within(i: usize, phases: &[Phase], radius: f64) -> Result<Vec<usize>> {
    let center = *phases.get(i).ok_or(Error::IndexOutOfRange {
        index: i,
        len: phases.len(),
    })?;
    Ok(phases
        .iter()
        .enumerate()
        .filter(|&(j, &p)| j != i && circular_distance(center, p) < radius)
        .map(|(j, _)| j)
        .collect())
}

/// Coupling exerted on node `i` by node `j`.
///
/// Same channel pushes apart (`-K sin Δ`), different channels pull
/// together (`+K sin Δ`), with `Δ = θ_j - θ_i` wrapped into `(-π, π]`.
pub fn interaction_force(theta_i: Phase, theta_j: Phase, same_channel: bool, coupling: f64) -> f64 {
    let sign = if same_channel { -1.0 } else { 1.0 };
    sign * coupling * signed_difference(theta_i, theta_j).sin()
}

/// True when `theta` sits in the sector `[0, Ω)` holding this revolution's
/// zero crossing.
#[inline]
pub fn at_interaction_gate(theta: Phase, phase_increment: f64) -> bool {
    theta.0 < phase_increment
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64) -> Phase {
        Phase::new(x).unwrap()
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_phase(0.0).unwrap().radians(), 0.0);
        assert_eq!(wrap_phase(TAU).unwrap().radians(), 0.0);
        assert!((wrap_phase(7.0).unwrap().radians() - 0.716815).abs() < 1e-6);
        assert!((wrap_phase(-0.5).unwrap().radians() - (TAU - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn wrap_tiny_negative_stays_below_tau() {
        let w = wrap_phase(-1e-18).unwrap().radians();
        assert!((0.0..TAU).contains(&w));
    }

    #[test]
    fn wrap_rejects_non_finite() {
        assert!(matches!(wrap_phase(f64::NAN), Err(Error::NonFinite(_))));
        assert!(wrap_phase(f64::INFINITY).is_err());
        assert!(Phase::try_from(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(circular_distance(p(0.0), p(0.0)), 0.0);
        assert!((circular_distance(p(0.0), p(PI)) - PI).abs() < 1e-15);
        assert!((circular_distance(p(6.2), p(0.1)) - 0.183185).abs() < 1e-6);
    }

    #[test]
    fn neighbor_examples() {
        let phases = [p(0.0), p(0.1), p(3.0)];
        assert_eq!(neighbors_within(0, &phases, PI / 4.0).unwrap(), vec![1]);
        assert!(neighbors_within(0, &[p(0.0)], 1.0).unwrap().is_empty());
        assert!(neighbors_within(0, &[p(0.0), p(PI / 4.0)], PI / 4.0)
            .unwrap()
            .is_empty());
        assert_eq!(
            neighbors_within(3, &phases, 1.0),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        );
    }

    #[test]
    fn neighbors_across_seam() {
        let phases = [p(0.05), p(6.25)];
        assert_eq!(neighbors_within(0, &phases, 0.2).unwrap(), vec![1]);
    }

    #[test]
    fn force_examples() {
        let push = interaction_force(p(0.0), p(0.1), true, 0.5);
        let pull = interaction_force(p(0.0), p(0.1), false, 0.5);
        assert!((push + 0.049917).abs() < 1e-6);
        assert!((pull - 0.049917).abs() < 1e-6);
        assert_eq!(interaction_force(p(1.3), p(1.3), true, 0.5), 0.0);
        assert_eq!(interaction_force(p(1.3), p(1.3), false, 0.5), 0.0);
    }

    #[test]
    fn force_is_continuous_across_seam() {
        // j sits just behind i through the seam: pull should be negative
        let f = interaction_force(p(0.01), p(TAU - 0.01), false, 1.0);
        assert!((f - (-0.02f64).sin()).abs() < 1e-12);
    }

    #[test]
    fn gate_examples() {
        assert!(at_interaction_gate(p(0.0), PI / 4.0));
        assert!(!at_interaction_gate(p(PI / 4.0), PI / 4.0));
        assert!(at_interaction_gate(p(0.5), PI / 4.0));
        assert!(!at_interaction_gate(p(1.0), PI / 4.0));
    }

    #[test]
    fn geometry_validation() {
        assert!(GeometryParams::default().validate().is_ok());
        let bad = GeometryParams {
            coupling: -0.1,
            ..Default::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(Error::Config {
                field: "coupling",
                ..
            })
        ));
        let bad = GeometryParams {
            influence_radius: 4.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
