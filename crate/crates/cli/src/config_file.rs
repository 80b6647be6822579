//! Config ingestion: a flat JSON object whose keys mirror `SimConfig`,
//! plus `KEY=VALUE` overrides. Missing keys keep their defaults.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{Map, Value};
use towsync::{ChannelSet, InitialPhases, OmegaMode, SimConfig};

/// Canonical key for a config field, accepting the short symbol names.
pub fn canonical_key(key: &str) -> Option<&'static str> {
    Some(match key {
        "node_count" | "M" => "node_count",
        "channel_count" | "N" => "channel_count",
        "phase_increment" | "Omega" => "phase_increment",
        "influence_radius" | "phi_th" => "influence_radius",
        "coupling" | "K" => "coupling",
        "memory_alpha" | "alpha" => "memory_alpha",
        "noise_amplitude" | "Amp" => "noise_amplitude",
        "channel_probs" | "P" => "channel_probs",
        "omega_mode" => "omega_mode",
        "omega_fixed" | "omega" => "omega_fixed",
        "omega_group_size_hint" => "omega_group_size_hint",
        "steps" => "steps",
        "seed" => "seed",
        "initial_phases" => "initial_phases",
        _ => return None,
    })
}

/// Parses `pi`, `pi/4`, `3pi/4`, `2*pi/8` and the like.
fn parse_pi_expr(s: &str) -> Option<f64> {
    let s = s.replace(' ', "").to_ascii_lowercase();
    let (head, tail) = s.split_once("pi")?;
    let coef = match head.trim_end_matches('*') {
        "" => 1.0,
        "-" => -1.0,
        c => c.parse().ok()?,
    };
    let div = match tail {
        "" => 1.0,
        t => t.strip_prefix('/')?.parse().ok()?,
    };
    Some(coef * std::f64::consts::PI / div)
}

/// Interprets the right-hand side of an override as JSON, a π expression,
/// or a bare string.
pub fn parse_value(raw: &str) -> Value {
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        return v;
    }
    if let Some(x) = parse_pi_expr(raw) {
        return Value::from(x);
    }
    Value::String(raw.to_string())
}

fn as_f64(field: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => parse_pi_expr(s).or_else(|| s.parse().ok()),
        _ => None,
    }
    .ok_or_else(|| anyhow!("{field}: expected a number, got {v}"))
}

fn as_u64(field: &str, v: &Value) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| anyhow!("{field}: expected a non-negative integer, got {v}"))
}

fn as_f64_list(field: &str, v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| anyhow!("{field}: expected a list of numbers, got {v}"))?
        .iter()
        .map(|x| as_f64(field, x))
        .collect()
}

fn apply(config: &mut SimConfig, key: &str, v: &Value) -> Result<()> {
    let field = canonical_key(key).ok_or_else(|| anyhow!("unknown config key `{key}`"))?;
    match field {
        "node_count" => config.node_count = as_u64(field, v)? as usize,
        "channel_count" => config.channel_count = as_u64(field, v)? as usize,
        "phase_increment" => config.phase_increment = as_f64(field, v)?,
        "influence_radius" => config.influence_radius = as_f64(field, v)?,
        "coupling" => config.coupling = as_f64(field, v)?,
        "memory_alpha" => config.memory_alpha = as_f64(field, v)?,
        "noise_amplitude" => config.noise_amplitude = as_f64(field, v)?,
        "channel_probs" => {
            config.channel_probs = ChannelSet::new(as_f64_list(field, v)?)?;
        }
        "omega_mode" => {
            let s = v
                .as_str()
                .ok_or_else(|| anyhow!("{field}: expected fixed, oracle or online, got {v}"))?;
            config.omega_mode = s.parse::<OmegaMode>()?;
        }
        "omega_fixed" => config.omega_fixed = as_f64(field, v)?,
        "omega_group_size_hint" => {
            config.omega_group_size_hint = match v {
                Value::Null => None,
                other => Some(as_u64(field, other)? as usize),
            }
        }
        "steps" => config.steps = as_u64(field, v)?,
        "seed" => config.seed = as_u64(field, v)?,
        "initial_phases" => {
            config.initial_phases = match v {
                Value::String(s) if s == InitialPhases::UNIFORM_RANDOM => {
                    InitialPhases::UniformRandom
                }
                other => InitialPhases::Explicit(as_f64_list(field, other)?),
            }
        }
        _ => unreachable!("canonical_key returned {field}"),
    }
    Ok(())
}

/// Applies settings in order onto the defaults. When `channel_probs` is set
/// but `channel_count` is not, the count follows the list length.
pub fn build_config(settings: &[(String, Value)]) -> Result<SimConfig> {
    let mut config = SimConfig::default();
    let mut count_given = false;
    let mut probs_given = false;
    for (key, value) in settings {
        apply(&mut config, key, value)?;
        match canonical_key(key) {
            Some("channel_count") => count_given = true,
            Some("channel_probs") => probs_given = true,
            _ => {}
        }
    }
    if probs_given && !count_given {
        config.channel_count = config.channel_probs.len();
    }
    config.validate()?;
    Ok(config)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, Value)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let map: Map<String, Value> = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    Ok(map.into_iter().collect())
}

pub fn parse_override(raw: &str) -> Result<(String, String)> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{raw}` is not KEY=VALUE"))?;
    let k = k.trim();
    if canonical_key(k).is_none() {
        bail!("unknown config key `{k}`");
    }
    Ok((k.to_string(), v.trim().to_string()))
}

/// File settings first, then overrides, so overrides win.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<SimConfig> {
    let mut settings = match path {
        Some(p) => read_config_file(p)?,
        None => Vec::new(),
    };
    for raw in overrides {
        let (k, v) = parse_override(raw)?;
        settings.push((k, parse_value(&v)));
    }
    build_config(&settings)
}

/// Splits `a,b,[c,d]` at top-level commas.
pub fn split_alternatives(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in raw.chars() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur).trim().to_string());
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur.trim().to_string());
    out
}
