//! Oracles shared by the integration tests. None of these call into the
//! code paths they are used to check.
#![allow(dead_code)]

use std::f64::consts::PI;

use intercorr::{CaseTriplet, NetworkParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn params(m: f64, c: u32, d: u32, p: f64) -> NetworkParams {
    NetworkParams {
        nakagami_m: m,
        channel_block_len: c,
        message_len: d,
        start_prob: p,
        ..NetworkParams::default()
    }
}

pub fn case(s: &str) -> CaseTriplet {
    s.parse().expect("case literal")
}

/// `E[γ_t γ_{t+lag}]` by propagating the state distribution of one node
/// through the message chain, starting from the stationary law restricted
/// to sending states.
pub fn joint_send_by_propagation(p: f64, d: usize, lag: usize) -> f64 {
    let start = p / (1.0 - p * (d as f64 - 1.0));
    // dist[0] idle, dist[i] = slot i of a message
    let mut dist = vec![0.0; d + 1];
    for slot in dist.iter_mut().skip(1) {
        *slot = p;
    }
    for _ in 0..lag {
        let mut next = vec![0.0; d + 1];
        let free = dist[0] + dist[d];
        next[1] += free * start;
        next[0] += free * (1.0 - start);
        for i in 1..d {
            next[i + 1] += dist[i];
        }
        dist = next;
    }
    dist[1..].iter().sum()
}

/// Stratified Monte Carlo estimate of `∫ l(|x|) l(|x + δ|) dx` with `|δ| = s`.
///
/// `x` is drawn from the density `l / ∫ l`: the unit disc with probability
/// `(α-2)/α` (radius `sqrt(U)`), otherwise the tail with radius
/// `U^(-1/(α-2))`. Each component gets its share of the samples on a
/// jittered radius × angle grid.
pub fn overlap_monte_carlo(alpha: f64, s: f64, samples: usize, seed: u64) -> f64 {
    let ell = |r2: f64| {
        if r2 <= 1.0 {
            1.0
        } else {
            r2.powf(-alpha / 2.0)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total_mass = alpha * PI / (alpha - 2.0);
    let inner_share = PI / total_mass;

    let mut component = |inner: bool, n: usize| -> f64 {
        let side = (n as f64).sqrt().ceil() as usize;
        let mut sum = 0.0;
        for i in 0..side {
            for j in 0..side {
                let u = (i as f64 + rng.random::<f64>()) / side as f64;
                let phi = 2.0 * PI * (j as f64 + rng.random::<f64>()) / side as f64;
                let r = if inner {
                    u.sqrt()
                } else {
                    (1.0 - u).powf(-1.0 / (alpha - 2.0))
                };
                let (x, y) = (r * phi.cos() + s, r * phi.sin());
                sum += ell(x * x + y * y);
            }
        }
        sum / (side * side) as f64
    };
    let n_inner = (samples as f64 * inner_share) as usize;
    let inner = component(true, n_inner);
    let outer = component(false, samples - n_inner);
    total_mass * (inner_share * inner + (1.0 - inner_share) * outer)
}

/// `∫ l(|x|)² dx` as `π` plus the tail `2π ∫_0^1 t^(2α-3) dt` (with
/// `t = 1/r`) by composite Simpson.
pub fn integral_sq_by_simpson(alpha: f64, panels: usize) -> f64 {
    let f = |t: f64| t.powf(2.0 * alpha - 3.0);
    let h = 1.0 / panels as f64;
    let mut acc = f(0.0) + f(1.0);
    for k in 1..panels {
        acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    PI + 2.0 * PI * acc * h / 3.0
}
