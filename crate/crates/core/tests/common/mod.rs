//! Reference stepper: a direct transcription of the update equations,
//! written without any of the library's helpers, used as an oracle for
//! the engine.

#![allow(dead_code)]

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone)]
pub struct RefNode {
    pub theta: f64,
    pub q: Vec<f64>,
    pub plays: Vec<u64>,
    pub wins: Vec<u64>,
}

#[derive(Debug, Clone, Copy)]
pub enum RefOmega {
    Fixed(f64),
    Oracle,
    Online,
}

#[derive(Debug, Clone)]
pub struct RefParams {
    pub omega_step: f64,
    pub phi_th: f64,
    pub k: f64,
    pub alpha: f64,
    pub amp: f64,
    pub p: Vec<f64>,
    pub omega: RefOmega,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefOutcome {
    pub selections: Vec<usize>,
    pub collided: Vec<bool>,
    pub success: Vec<bool>,
    pub rewards: Vec<f64>,
    pub gated: Vec<bool>,
}

fn ring_dist(a: f64, b: f64) -> f64 {
    let mut d = a - b;
    if d < 0.0 {
        d = -d;
    }
    if TWO_PI - d < d {
        TWO_PI - d
    } else {
        d
    }
}

fn signed(a: f64) -> f64 {
    let mut d = a;
    while d > PI {
        d -= TWO_PI;
    }
    while d <= -PI {
        d += TWO_PI;
    }
    d
}

fn wrap(x: f64) -> f64 {
    let mut y = x % TWO_PI;
    if y < 0.0 {
        y += TWO_PI;
    }
    if y >= TWO_PI {
        y = 0.0;
    }
    y
}

fn gamma_over(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let g = v[0] + v[1];
    g / (2.0 - g)
}

/// One step of the model for all nodes.
///
/// `noise_u[i][k]`, `tie_u[i]` and `bern_u[i]` are the raw uniforms the
/// engine would consume.
pub fn reference_step(
    nodes: &mut [RefNode],
    prm: &RefParams,
    noise_u: &[Vec<f64>],
    tie_u: &[f64],
    bern_u: &[f64],
) -> RefOutcome {
    let m = nodes.len();
    let n = prm.p.len();

    // s_i(t) = argmax_k X_k(t)
    let mut selections = vec![0usize; m];
    for i in 0..m {
        let mut x = vec![0.0; n];
        for k in 0..n {
            let mut others = 0.0;
            for l in 0..n {
                if l != k {
                    others += nodes[i].q[l];
                }
            }
            let xi = prm.amp * (2.0 * noise_u[i][k] - 1.0);
            x[k] = nodes[i].q[k] - others / (n as f64 - 1.0) + xi;
        }
        let mut best = f64::NEG_INFINITY;
        for &v in &x {
            if v > best {
                best = v;
            }
        }
        let ties: Vec<usize> = (0..n).filter(|&k| x[k] == best).collect();
        let mut pick = (tie_u[i] * ties.len() as f64).floor() as usize;
        if pick >= ties.len() {
            pick = ties.len() - 1;
        }
        selections[i] = ties[pick];
    }

    // collisions: same channel within φ_th
    let mut collided = vec![false; m];
    for i in 0..m {
        for j in 0..m {
            if i != j
                && selections[i] == selections[j]
                && ring_dist(nodes[i].theta, nodes[j].theta) < prm.phi_th
            {
                collided[i] = true;
            }
        }
    }

    // reward +1 / -ω and memory Q_k <- R_k + α Q_k
    let mut success = vec![false; m];
    let mut rewards = vec![0.0; m];
    for i in 0..m {
        let s = selections[i];
        success[i] = bern_u[i] < prm.p[s] && !collided[i];
        let omega = match prm.omega {
            RefOmega::Fixed(w) => w,
            RefOmega::Oracle => gamma_over(prm.p.clone()),
            RefOmega::Online => {
                let mut est: Vec<f64> = (0..n)
                    .filter(|&k| nodes[i].plays[k] > 0)
                    .map(|k| (nodes[i].wins[k] as f64 + 1.0) / (nodes[i].plays[k] as f64 + 2.0))
                    .collect();
                let unplayed = (0..n).filter(|&k| nodes[i].plays[k] == 0).count();
                let mut pad = 0;
                while est.len() < 2 && pad < unplayed {
                    est.push(0.5);
                    pad += 1;
                }
                gamma_over(est)
            }
        };
        rewards[i] = if success[i] { 1.0 } else { -omega };
        for k in 0..n {
            let r = if k == s { rewards[i] } else { 0.0 };
            nodes[i].q[k] = r + prm.alpha * nodes[i].q[k];
        }
        nodes[i].plays[s] += 1;
        if success[i] {
            nodes[i].wins[s] += 1;
        }
    }

    // θ_i(t+1) = θ_i + Ω − K Σ_{|θ_j−θ_i|<φ_th} (2δ−1) sin(θ_j − θ_i), gated
    let old: Vec<f64> = nodes.iter().map(|nd| nd.theta).collect();
    let mut gated = vec![false; m];
    for i in 0..m {
        let mut coupling_sum = 0.0;
        if old[i] >= 0.0 && old[i] < prm.omega_step {
            gated[i] = true;
            for j in 0..m {
                if j != i && ring_dist(old[j], old[i]) < prm.phi_th {
                    let delta = if selections[i] == selections[j] {
                        1.0
                    } else {
                        0.0
                    };
                    coupling_sum += (2.0 * delta - 1.0) * signed(old[j] - old[i]).sin();
                }
            }
        }
        nodes[i].theta = wrap(old[i] + prm.omega_step - prm.k * coupling_sum);
    }

    RefOutcome {
        selections,
        collided,
        success,
        rewards,
        gated,
    }
}

/// Agreement to within a few units in the last place, relative to the
/// magnitude of the operands.
pub fn ulps_close(a: f64, b: f64, ulps: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(1.0);
    (a - b).abs() <= ulps * f64::EPSILON * scale
}

/// Same as [`ulps_close`] for angles, across the `0 / 2π` seam.
pub fn angle_close(a: f64, b: f64, ulps: f64) -> bool {
    ulps_close(a, b, ulps) || ulps_close(ring_dist(a, b), 0.0, ulps * TWO_PI)
}
