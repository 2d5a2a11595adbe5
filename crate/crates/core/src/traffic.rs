//! Renewal message traffic: probability that a node sends in two slots
//! `tau` apart.
//!
//! A node is either idle or in slot `1..=d` of a message. Idle nodes, and
//! nodes finishing the last slot of a message, start a new message with
//! probability `1 - q` where `q = 1 - p / (1 - p (d - 1))`. This keeps a
//! fraction `p` of all nodes starting a message per slot, so the stationary
//! sending fraction is `mu = p d`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use statrs::function::factorial::ln_binomial;
use thiserror::Error;

use crate::model::NetworkParams;

/// Per-node traffic state: 0 is idle, `i >= 1` is slot `i` of a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TrafficChainState(pub u32);

impl TrafficChainState {
    pub const IDLE: TrafficChainState = TrafficChainState(0);

    pub fn is_sending(self) -> bool {
        self.0 > 0
    }

    /// Deterministic transition given whether a new message starts.
    /// `start` is only consulted in the idle and last-slot states.
    pub fn next(self, message_len: u32, start: bool) -> Self {
        match self.0 {
            0 => TrafficChainState(u32::from(start)),
            i if i >= message_len => TrafficChainState(u32::from(start)),
            i => TrafficChainState(i + 1),
        }
    }

    pub fn step<R: Rng + ?Sized>(self, traffic: &RenewalTraffic, rng: &mut R) -> Self {
        let can_start = self.0 == 0 || self.0 >= traffic.message_len;
        let start = can_start && rng.random::<f64>() < traffic.start_prob_idle;
        self.next(traffic.message_len, start)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrafficError {
    #[error("small-lag form requires 1 <= lag <= d (lag {lag}, d {message_len})")]
    LagOutOfRange { lag: u32, message_len: u32 },
}

/// Renewal traffic with start fraction `p` and message length `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenewalTraffic {
    start_prob: f64,
    message_len: u32,
    start_prob_idle: f64,
}

impl RenewalTraffic {
    pub fn new(start_prob: f64, message_len: u32) -> Self {
        assert!(message_len >= 1, "message length must be at least one slot");
        assert!(start_prob > 0.0, "start probability must be positive");
        let d = message_len as f64;
        let start_prob_idle = (start_prob / (1.0 - start_prob * (d - 1.0))).min(1.0);
        RenewalTraffic {
            start_prob,
            message_len,
            start_prob_idle,
        }
    }

    pub fn from_params(params: &NetworkParams) -> Self {
        Self::new(params.start_prob, params.message_len)
    }

    pub fn start_prob(&self) -> f64 {
        self.start_prob
    }

    pub fn message_len(&self) -> u32 {
        self.message_len
    }

    /// Probability `1 - q` that an idle node starts a message.
    pub fn start_prob_idle(&self) -> f64 {
        self.start_prob_idle
    }

    /// `q`, written as `(1 - p d) / (1 - p (d - 1))` so it vanishes exactly
    /// at full intensity.
    pub fn idle_prob(&self) -> f64 {
        let d = self.message_len as f64;
        let p = self.start_prob;
        ((1.0 - p * d) / (1.0 - p * (d - 1.0))).clamp(0.0, 1.0)
    }

    pub fn intensity(&self) -> f64 {
        (self.start_prob * self.message_len as f64).min(1.0)
    }

    /// Draws a state from the stationary law: idle with probability
    /// `1 - mu`, each message slot with probability `p`.
    pub fn sample_stationary<R: Rng + ?Sized>(&self, rng: &mut R) -> TrafficChainState {
        let u: f64 = rng.random();
        let idle = 1.0 - self.intensity();
        if u < idle {
            TrafficChainState::IDLE
        } else {
            let slot = ((u - idle) / self.start_prob).floor() as u32 + 1;
            TrafficChainState(slot.min(self.message_len))
        }
    }

    /// `E[gamma_t gamma_{t+lag}]` as a single message spanning both slots
    /// plus every arrangement of two distinct messages with `k` complete
    /// messages and `e` idle slots in the gap between them.
    pub fn joint_send_prob(&self, lag: u32) -> f64 {
        assert!(lag >= 1, "lag must be at least one slot");
        let p = self.start_prob;
        let d = self.message_len;
        let q = self.idle_prob();
        let start = self.start_prob_idle;

        let single = (p * (d as f64 - lag as f64)).max(0.0);

        let ln_q = q.ln();
        let ln_start = start.ln();
        let mut two = 0.0;
        for i in 0..=(lag - 1).min(d - 1) {
            for j in 1..=(lag - i).min(d) {
                let gap = lag - i - j;
                for k in 0..=gap / d {
                    let idle = gap - k * d;
                    two += arrangement_weight(idle, k, q, ln_q, ln_start);
                }
            }
        }
        let d = d as f64;
        single + p * p / (1.0 - p * (d - 1.0)) * two
    }

    /// Closed form of [`joint_send_prob`](Self::joint_send_prob) for
    /// `lag <= d`: `p (d - lag) + p (lag (1 - q) + q^(lag+1) - q) / (1 - q)`.
    pub fn joint_send_prob_small_lag(&self, lag: u32) -> Result<f64, TrafficError> {
        if lag == 0 || lag > self.message_len {
            return Err(TrafficError::LagOutOfRange {
                lag,
                message_len: self.message_len,
            });
        }
        let p = self.start_prob;
        let q = self.idle_prob();
        let tau = lag as f64;
        let d = self.message_len as f64;
        Ok(p * (d - tau) + p * (tau * (1.0 - q) + q.powi(lag as i32 + 1) - q) / (1.0 - q))
    }

    /// Exact joint probability from the stationary Markov chain:
    /// `sum_{i,j sending} pi_i (P^lag)_{ij}`.
    pub fn joint_send_prob_oracle(&self, lag: u32) -> f64 {
        let chain = self.chain();
        let pi = chain.stationary();
        let power = chain.transition_power(lag);
        let n = self.message_len as usize + 1;
        let mut total = 0.0;
        for i in 1..n {
            for j in 1..n {
                total += pi[i] * power[(i, j)];
            }
        }
        total
    }

    pub fn chain(&self) -> TrafficChain {
        TrafficChain::new(*self)
    }
}

/// `C(e + k, k) q^e (1 - q)^k`, evaluated in log space.
fn arrangement_weight(idle: u32, messages: u32, q: f64, ln_q: f64, ln_start: f64) -> f64 {
    if idle > 0 && q == 0.0 {
        return 0.0;
    }
    let mut ln_w = ln_binomial(u64::from(idle + messages), u64::from(messages));
    if idle > 0 {
        ln_w += idle as f64 * ln_q;
    }
    if messages > 0 {
        ln_w += messages as f64 * ln_start;
    }
    ln_w.exp()
}

/// The `(d + 1)`-state traffic chain as an explicit transition matrix.
#[derive(Debug, Clone)]
pub struct TrafficChain {
    traffic: RenewalTraffic,
    transition: DMatrix<f64>,
}

impl TrafficChain {
    pub fn new(traffic: RenewalTraffic) -> Self {
        let d = traffic.message_len as usize;
        let start = traffic.start_prob_idle;
        let mut transition = DMatrix::zeros(d + 1, d + 1);
        for from in [0, d] {
            transition[(from, 1)] += start;
            transition[(from, 0)] += 1.0 - start;
        }
        for from in 1..d {
            transition[(from, from + 1)] = 1.0;
        }
        TrafficChain {
            traffic,
            transition,
        }
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    /// `pi_0 = 1 - mu`, `pi_i = p` for `i = 1..=d`.
    pub fn stationary(&self) -> DVector<f64> {
        let d = self.traffic.message_len as usize;
        let mut pi = DVector::from_element(d + 1, self.traffic.start_prob);
        pi[0] = 1.0 - self.traffic.start_prob * d as f64;
        pi
    }

    /// `P^steps` by repeated squaring.
    pub fn transition_power(&self, steps: u32) -> DMatrix<f64> {
        let n = self.transition.nrows();
        let mut result = DMatrix::identity(n, n);
        let mut base = self.transition.clone();
        let mut e = steps;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }
}

/// [`RenewalTraffic::joint_send_prob`] for the parameters' `p` and `d`.
pub fn joint_send_prob(params: &NetworkParams, lag: u32) -> f64 {
    RenewalTraffic::from_params(params).joint_send_prob(lag)
}

pub fn joint_send_prob_small_lag(params: &NetworkParams, lag: u32) -> Result<f64, TrafficError> {
    RenewalTraffic::from_params(params).joint_send_prob_small_lag(lag)
}

pub fn joint_send_prob_oracle(params: &NetworkParams, lag: u32) -> f64 {
    RenewalTraffic::from_params(params).joint_send_prob_oracle(lag)
}
