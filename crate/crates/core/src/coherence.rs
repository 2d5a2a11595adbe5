//! Interference coherence time: the smallest lag `τ >= 1` with `ρ(τ) <= θ`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{AcfError, AcfModel};
use crate::model::{CaseTriplet, NetworkParams, Source};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoherenceError {
    #[error("threshold θ={0} must lie in [0, 1)")]
    BadThreshold(f64),
    #[error("max_lag must be at least 1")]
    BadMaxLag,
    #[error(transparent)]
    Acf(#[from] AcfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceQuery {
    pub params: NetworkParams,
    pub case: CaseTriplet,
    pub threshold: f64,
    /// Defaults to `10·max(c, d, 100)`.
    pub max_lag: Option<u32>,
}

impl CoherenceQuery {
    pub fn new(params: NetworkParams, case: CaseTriplet, threshold: f64) -> Self {
        CoherenceQuery {
            params,
            case,
            threshold,
            max_lag: None,
        }
    }

    pub fn with_max_lag(mut self, max_lag: u32) -> Self {
        self.max_lag = Some(max_lag);
        self
    }

    pub fn effective_max_lag(&self) -> u32 {
        self.max_lag.unwrap_or_else(|| {
            10 * self
                .params
                .channel_block_len
                .max(self.params.message_len)
                .max(100)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "lag")]
pub enum CoherenceValue {
    Finite(u32),
    /// The correlation never falls to the threshold.
    Infinite,
    /// Not reached within the search bound, and the tail does not decide.
    Inconclusive(u32),
}

impl fmt::Display for CoherenceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoherenceValue::Finite(t) => write!(f, "{t}"),
            CoherenceValue::Infinite => f.write_str("inf"),
            CoherenceValue::Inconclusive(max) => write!(f, "inconclusive(>{max})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceMethod {
    ClosedForm,
    Search,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceResult {
    pub value: CoherenceValue,
    pub method: CoherenceMethod,
    /// The real-valued expression before rounding up, when one exists.
    pub unrounded: Option<f64>,
}

impl CoherenceResult {
    fn closed(value: CoherenceValue, unrounded: Option<f64>) -> Self {
        CoherenceResult {
            value,
            method: CoherenceMethod::ClosedForm,
            unrounded,
        }
    }

    fn search(value: CoherenceValue) -> Self {
        CoherenceResult {
            value,
            method: CoherenceMethod::Search,
            unrounded: None,
        }
    }
}

pub fn coherence_time(query: &CoherenceQuery) -> Result<CoherenceResult, CoherenceError> {
    check(query)?;
    let model = AcfModel::new(&query.params, query.case)?;
    if let Some(result) = closed_form(&model, query.threshold) {
        return Ok(result);
    }
    search(&model, query.threshold, query.effective_max_lag())
}

/// Threshold search only, ignoring any closed form.
pub fn coherence_search(query: &CoherenceQuery) -> Result<CoherenceResult, CoherenceError> {
    check(query)?;
    let model = AcfModel::new(&query.params, query.case)?;
    search(&model, query.threshold, query.effective_max_lag())
}

/// `log(1 − μ) / log q`, the zero crossing of the traffic-only correlation.
pub fn traffic_coherence_unrounded(params: &NetworkParams) -> Option<f64> {
    let mu = params.traffic_intensity();
    let q = params.idle_prob();
    (mu > 0.0 && mu < 1.0 && q > 0.0).then(|| (1.0 - mu).ln() / q.ln())
}

fn check(query: &CoherenceQuery) -> Result<(), CoherenceError> {
    if !(0.0..1.0).contains(&query.threshold) {
        return Err(CoherenceError::BadThreshold(query.threshold));
    }
    if query.max_lag == Some(0) {
        return Err(CoherenceError::BadMaxLag);
    }
    Ok(())
}

/// Rounds up, treating values within rounding noise of an integer as that
/// integer.
fn ceil_lag(x: f64) -> u32 {
    let nearest = x.round();
    let t = if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    t.max(1.0) as u32
}

fn closed_form(model: &AcfModel, threshold: f64) -> Option<CoherenceResult> {
    let params = model.params();
    let case = model.case();
    let zero = threshold == 0.0;
    match case.digits() {
        (1, _, _) | (0, 0, 1) | (0, 1, 0) | (0, 1, 1) => Some(CoherenceResult::closed(
            CoherenceValue::Finite(1),
            Some(1.0),
        )),
        (0, 0, 2) | (0, 1, 2) if zero => {
            let x = traffic_coherence_unrounded(params)?;
            Some(CoherenceResult::closed(
                CoherenceValue::Finite(ceil_lag(x)),
                Some(x),
            ))
        }
        (0, 2, 0) | (0, 2, 1) if zero => {
            let c = params.channel_block_len;
            Some(CoherenceResult::closed(
                CoherenceValue::Finite(c),
                Some(c as f64),
            ))
        }
        (2, 0 | 1, 0 | 1) if !model.is_mobile() => {
            let value = if threshold < model.long_lag_limit() {
                CoherenceValue::Infinite
            } else {
                CoherenceValue::Finite(1)
            };
            Some(CoherenceResult::closed(value, None))
        }
        _ => None,
    }
}

/// Whether `ρ` is provably nonincreasing in `τ`: mobility acting on a
/// correlation that is otherwise constant.
fn monotone(model: &AcfModel) -> bool {
    let case = model.case();
    model.is_mobile() && case.channel != Source::Correlated && case.traffic != Source::Correlated
}

fn search(
    model: &AcfModel,
    threshold: f64,
    max_lag: u32,
) -> Result<CoherenceResult, CoherenceError> {
    let found = if monotone(model) {
        gallop(model, threshold, max_lag)?
    } else {
        let mut found = None;
        for lag in 1..=max_lag {
            if model.at(lag)? <= threshold {
                found = Some(lag);
                break;
            }
        }
        found
    };
    let value = match found {
        Some(lag) => CoherenceValue::Finite(lag),
        None if model.long_lag_limit() > threshold => CoherenceValue::Infinite,
        None => CoherenceValue::Inconclusive(max_lag),
    };
    Ok(CoherenceResult::search(value))
}

/// Doubling then bisection; valid only for nonincreasing `ρ`.
fn gallop(model: &AcfModel, threshold: f64, max_lag: u32) -> Result<Option<u32>, AcfError> {
    let below = |lag: u32| model.at(lag).map(|r| r <= threshold);
    if below(1)? {
        return Ok(Some(1));
    }
    let mut lo: u32 = 1;
    let mut hi = loop {
        let next = lo.saturating_mul(2).min(max_lag);
        if below(next)? {
            break next;
        }
        if next == max_lag {
            return Ok(None);
        }
        lo = next;
    };
    // ρ(lo) > θ >= ρ(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}
