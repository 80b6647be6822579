//! Tug-of-war bandit used by each node to pick a channel.
//!
//! Every channel keeps a decaying memory `Q_k`. The displacement of channel
//! `k` is its own memory minus the mean memory of the other channels, plus
//! noise; the channel with the largest displacement is played. Successes
//! add `+1` to the played channel's memory, failures add `-ω`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Learning state of one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditState {
    pub q_values: Vec<f64>,
    pub last_selection: Option<usize>,
    pub play_counts: Vec<u64>,
    pub success_counts: Vec<u64>,
}

impl BanditState {
    /// Fresh state over `channels` arms with all memories at zero.
    pub fn new(channels: usize) -> Self {
        Self {
            q_values: vec![0.0; channels],
            last_selection: None,
            play_counts: vec![0; channels],
            success_counts: vec![0; channels],
        }
    }

    pub fn channel_count(&self) -> usize {
        self.q_values.len()
    }

    /// Applies `Q_k <- R_k + α Q_k` to every channel, where only the
    /// selected channel receives `reward` and the others get `R_k = 0`.
    pub fn memory_update(
        &mut self,
        selected: usize,
        reward: f64,
        success: bool,
        alpha: f64,
    ) -> Result<()> {
        let count = self.channel_count();
        if selected >= count {
            return Err(Error::InvalidChannel {
                channel: selected,
                count,
            });
        }
        for (k, q) in self.q_values.iter_mut().enumerate() {
            let r = if k == selected { reward } else { 0.0 };
            *q = r + alpha * *q;
        }
        self.play_counts[selected] += 1;
        if success {
            self.success_counts[selected] += 1;
        }
        self.last_selection = Some(selected);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaMode {
    /// Use `fixed_value` verbatim.
    Fixed,
    /// `γ/(2-γ)` from the true channel probabilities.
    Oracle,
    /// `γ/(2-γ)` from each node's own smoothed success estimates.
    Online,
}

impl std::str::FromStr for OmegaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" => Ok(OmegaMode::Fixed),
            "oracle" => Ok(OmegaMode::Oracle),
            "online" => Ok(OmegaMode::Online),
            other => Err(Error::config(
                "omega_mode",
                format!("expected fixed, oracle or online, got {other:?}"),
            )),
        }
    }
}

/// How the failure penalty ω is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaPolicy {
    pub mode: OmegaMode,
    pub fixed_value: f64,
    /// `N'`: when set, γ uses the `N'`-th and `(N'+1)`-th largest
    /// probabilities instead of the top two.
    pub group_size_hint: Option<usize>,
}

impl Default for OmegaPolicy {
    fn default() -> Self {
        Self {
            mode: OmegaMode::Online,
            fixed_value: 0.0,
            group_size_hint: None,
        }
    }
}

impl OmegaPolicy {
    pub fn validate(&self, channels: usize) -> Result<()> {
        if self.mode == OmegaMode::Fixed
            && !(self.fixed_value.is_finite() && self.fixed_value >= 0.0)
        {
            return Err(Error::config(
                "omega_fixed",
                format!("must be finite and non-negative, got {}", self.fixed_value),
            ));
        }
        if let Some(hint) = self.group_size_hint {
            if hint < 1 || hint + 1 > channels {
                return Err(Error::config(
                    "omega_group_size_hint",
                    format!("must lie in 1..={}, got {hint}", channels.saturating_sub(1)),
                ));
            }
        }
        Ok(())
    }
}

/// `X_k = Q_k - (1/(N-1)) Σ_{l≠k} Q_l + ξ_k`.
pub fn displacements(q_values: &[f64], noise: &[f64]) -> Result<Vec<f64>> {
    let n = q_values.len();
    if n < 2 {
        return Err(Error::config(
            "channel_count",
            format!("tug-of-war needs at least 2 channels, got {n}"),
        ));
    }
    if noise.len() != n {
        return Err(Error::LengthMismatch {
            what: "noise",
            got: noise.len(),
            expected: n,
        });
    }
    if let Some(&bad) = q_values.iter().chain(noise).find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    let others = (n - 1) as f64;
    Ok((0..n)
        .map(|k| {
            let rest: f64 = q_values
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != k)
                .map(|(_, q)| q)
                .sum();
            q_values[k] - rest / others + noise[k]
        })
        .collect())
}

/// Argmax of `x_values`, breaking ties with the uniform draw `u ∈ [0, 1)`.
pub fn select_channel_with_draw(x_values: &[f64], u: f64) -> Result<usize> {
    let max = x_values
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or(Error::Empty("x_values"))?;
    if !max.is_finite() {
        return Err(Error::NonFinite(max));
    }
    let maximizers: Vec<usize> = x_values
        .iter()
        .enumerate()
        .filter(|&(_, &x)| x == max)
        .map(|(k, _)| k)
        .collect();
    let pick = ((u * maximizers.len() as f64) as usize).min(maximizers.len() - 1);
    Ok(maximizers[pick])
}

/// Argmax of `x_values` with uniform random tie-breaking.
///
/// Always consumes exactly one draw from `rng`, tie or not.
pub fn select_channel<R: Rng + ?Sized>(x_values: &[f64], rng: &mut R) -> Result<usize> {
    let u: f64 = rng.gen();
    select_channel_with_draw(x_values, u)
}

#[inline]
pub fn reward_value(success: bool, omega: f64) -> f64 {
    if success {
        1.0
    } else {
        -omega
    }
}

fn gamma_from_sorted(desc: &[f64], hint: Option<usize>) -> Result<f64> {
    let n = desc.len();
    if n < 2 {
        return Err(Error::config(
            "channel_probs",
            format!("need at least 2 channels to form γ, got {n}"),
        ));
    }
    let first = match hint {
        None => 0,
        Some(h) if h >= 1 && h < n => h - 1,
        Some(h) => {
            return Err(Error::config(
                "omega_group_size_hint",
                format!("must lie in 1..={}, got {h}", n - 1),
            ))
        }
    };
    Ok(desc[first] + desc[first + 1])
}

fn omega_from_gamma(gamma: f64) -> f64 {
    gamma / (2.0 - gamma)
}

fn sorted_desc(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `ω = γ/(2-γ)` with `γ = P_[1] + P_[2]`, or `P_[N'] + P_[N'+1]` when a
/// group size hint is given (`P_[n]` is the n-th largest probability).
pub fn omega_oracle(channel_probs: &[f64], group_size_hint: Option<usize>) -> Result<f64> {
    if let Some(&bad) = channel_probs
        .iter()
        .find(|p| !(p.is_finite() && (0.0..=1.0).contains(*p)))
    {
        return Err(Error::config(
            "channel_probs",
            format!("probabilities must lie in [0, 1], got {bad}"),
        ));
    }
    let gamma = gamma_from_sorted(&sorted_desc(channel_probs.iter().copied()), group_size_hint)?;
    Ok(omega_from_gamma(gamma))
}

/// Same formula as [`omega_oracle`], fed with the add-one smoothed
/// estimates `(successes + 1) / (plays + 2)` of a node's own history.
///
/// Only channels the node has played are ranked; the prior value 1/2 of
/// unplayed channels fills in only when too few channels have been played.
pub fn omega_online(state: &BanditState, group_size_hint: Option<usize>) -> Result<f64> {
    let mut estimates = sorted_desc(
        state
            .play_counts
            .iter()
            .zip(&state.success_counts)
            .filter(|&(&plays, _)| plays > 0)
            .map(|(&plays, &wins)| (wins as f64 + 1.0) / (plays as f64 + 2.0)),
    );
    let needed = group_size_hint.unwrap_or(1) + 1;
    let unplayed = state.play_counts.iter().filter(|&&p| p == 0).count();
    let fill = needed.saturating_sub(estimates.len()).min(unplayed);
    estimates.extend(std::iter::repeat_n(0.5, fill));
    let gamma = gamma_from_sorted(&estimates, group_size_hint)?;
    Ok(omega_from_gamma(gamma))
}
