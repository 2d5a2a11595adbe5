//! Analytic auto-correlation of interference.
//!
//! For random node locations (`i = 2`)
//!
//! ```text
//! ρ(τ) = E[h²h²]·E[γγ] / (μ E[h⁴]) · J(τ) / ∫ l²
//! ```
//!
//! and for known locations (`i = 0`)
//!
//! ```text
//! ρ(τ) = (E[h²h²]·E[γγ] − μ²) / (μ E[h⁴] − μ²),
//! ```
//!
//! where `E[h²h²]` and `E[γγ]` are the same-node channel and traffic factors
//! at lag `τ`. Locations redrawn every slot (`i = 1`) give `ρ ≡ 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    effective_moments, AcfCurve, CaseTriplet, CurveError, CurveSource, InvalidParams, MomentSet,
    NetworkParams, Source,
};
use crate::spatial::{spatial_ratio, SpatialError};
use crate::traffic::RenewalTraffic;

/// Relative size below which the `i = 0` variance counts as zero.
const ZERO_VARIANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AcfError {
    #[error(transparent)]
    InvalidParams(#[from] InvalidParams),
    #[error("correlation undefined for case {case}: interference has zero variance")]
    Undefined { case: CaseTriplet },
    #[error(transparent)]
    Spatial(#[from] SpatialError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// `E[h²_t h²_{t+τ}]` for one node.
///
/// Block fading gives `(m+1)/m − τ/(m c)` for `τ < c` and 1 otherwise;
/// i.i.d. fading is the block model with `c = 1`; a constant channel gives 1.
pub fn channel_factor(params: &NetworkParams, case: CaseTriplet, lag: u32) -> f64 {
    let m = params.nakagami_m;
    let c = match case.channel {
        Source::Constant => return 1.0,
        Source::Uncorrelated => 1,
        Source::Correlated => params.channel_block_len,
    };
    if lag >= c {
        1.0
    } else {
        (m + 1.0) / m - lag as f64 / (m * c as f64)
    }
}

/// `E[γ_t γ_{t+τ}]` for one node.
pub fn traffic_factor(params: &NetworkParams, case: CaseTriplet, lag: u32) -> f64 {
    match case.traffic {
        Source::Constant => 1.0,
        Source::Uncorrelated if lag == 0 => params.start_prob,
        Source::Uncorrelated => params.start_prob * params.start_prob,
        Source::Correlated if lag == 0 => params.traffic_intensity(),
        Source::Correlated => RenewalTraffic::from_params(params).joint_send_prob(lag),
    }
}

/// ACF evaluator for one parameter set and case.
#[derive(Debug, Clone)]
pub struct AcfModel {
    params: NetworkParams,
    case: CaseTriplet,
    moments: MomentSet,
}

impl AcfModel {
    /// Validates the parameters and rejects cases whose interference has
    /// zero variance.
    pub fn new(params: &NetworkParams, case: CaseTriplet) -> Result<Self, AcfError> {
        params.validate().into_result()?;
        let moments = effective_moments(params, case);
        if case.locations == Source::Constant {
            let mu = moments.send_prob;
            let var = mu * moments.fading_fourth_moment - mu * mu;
            if var <= ZERO_VARIANCE * mu * moments.fading_fourth_moment {
                return Err(AcfError::Undefined { case });
            }
        }
        Ok(AcfModel {
            params: *params,
            case,
            moments,
        })
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn case(&self) -> CaseTriplet {
        self.case
    }

    pub fn moments(&self) -> &MomentSet {
        &self.moments
    }

    /// Whether node movement enters the correlation.
    pub fn is_mobile(&self) -> bool {
        self.case.locations == Source::Correlated && !self.params.is_static()
    }

    /// `ρ(τ)`; `ρ(0) = 1`.
    pub fn at(&self, lag: u32) -> Result<f64, AcfError> {
        if lag == 0 {
            return Ok(1.0);
        }
        let mu = self.moments.send_prob;
        let h4 = self.moments.fading_fourth_moment;
        let joint = channel_factor(&self.params, self.case, lag)
            * traffic_factor(&self.params, self.case, lag);
        let rho = match self.case.locations {
            Source::Uncorrelated => 0.0,
            Source::Constant => (joint - mu * mu) / (mu * h4 - mu * mu),
            Source::Correlated => joint / (mu * h4) * spatial_ratio(&self.params, lag)?,
        };
        Ok(rho.clamp(-1.0, 1.0))
    }

    /// `lim_{τ→∞} ρ(τ)`.
    pub fn long_lag_limit(&self) -> f64 {
        match self.case.locations {
            Source::Correlated if !self.is_mobile() => {
                self.moments.send_prob / self.moments.fading_fourth_moment
            }
            _ => 0.0,
        }
    }

    /// Evaluates the given lags; mobile cases run the lags in parallel.
    pub fn curve(&self, lags: &[u32]) -> Result<AcfCurve, AcfError> {
        let values: Result<Vec<f64>, AcfError> = if self.is_mobile() {
            lags.par_iter().map(|&lag| self.at(lag)).collect()
        } else {
            lags.iter().map(|&lag| self.at(lag)).collect()
        };
        Ok(AcfCurve::new(
            lags.to_vec(),
            values?,
            CurveSource::Analytic,
            self.params,
            self.case,
        )?)
    }
}

pub fn acf(params: &NetworkParams, case: CaseTriplet, lag: u32) -> Result<f64, AcfError> {
    AcfModel::new(params, case)?.at(lag)
}

pub fn acf_curve(
    params: &NetworkParams,
    case: CaseTriplet,
    lags: &[u32],
) -> Result<AcfCurve, AcfError> {
    AcfModel::new(params, case)?.curve(lags)
}

/// Rows of the summary table of static closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LagRange {
    All,
    /// `τ < bound`
    Below(u32),
    /// `τ <= bound`
    UpTo(u32),
}

impl LagRange {
    pub fn contains(self, lag: u32) -> bool {
        match self {
            LagRange::All => true,
            LagRange::Below(b) => lag < b,
            LagRange::UpTo(b) => lag <= b,
        }
    }
}

/// Lag range on which the static closed form for `case` holds, or `None`
/// when there is no closed form.
pub fn table1_range(params: &NetworkParams, case: CaseTriplet) -> Option<LagRange> {
    let c = params.channel_block_len;
    let d = params.message_len;
    let m = params.nakagami_m;
    match case.digits() {
        (0, 0, 0) => None,
        (0, 0, 2) | (0, 1, 2) => Some(LagRange::Below(d)),
        (0, 2, 0) => Some(LagRange::UpTo(c)),
        (0, 2, 1) => Some(LagRange::Below(c)),
        (0, 2, 2) | (2, 2, 2) => Some(LagRange::Below(c.min(d))),
        // written out for Rayleigh fading only
        (2, 1, 0) | (2, 1, 1) if m != 1.0 => None,
        (2, 0, 2) | (2, 1, 2) => Some(LagRange::Below(d)),
        (2, 2, 0) | (2, 2, 1) => Some(LagRange::Below(c)),
        _ => Some(LagRange::All),
    }
}

/// Closed-form static ACF for `case` at `lag`, if the case has one and the
/// lag lies in its range. Mobile location cases have none.
pub fn table1_closed_form(params: &NetworkParams, case: CaseTriplet, lag: u32) -> Option<f64> {
    if case.locations == Source::Correlated && !params.is_static() {
        return None;
    }
    if lag == 0 || !table1_range(params, case)?.contains(lag) {
        return None;
    }
    let t = lag as f64;
    let c = params.channel_block_len as f64;
    let m = params.nakagami_m;
    let p = params.start_prob;
    let mu = params.traffic_intensity();
    let qt = params.idle_prob().powi(lag as i32);
    let value = match case.digits() {
        (1, _, _) => 0.0,
        (0, 0, 1) | (0, 1, 0) | (0, 1, 1) => 0.0,
        (0, 0, 2) => (qt + mu - 1.0) / mu,
        (0, 1, 2) => m * (mu - 1.0) * (qt + mu - 1.0) / (mu * (m * (mu - 1.0) - 1.0)),
        (0, 2, 0) => 1.0 - t / c,
        (0, 2, 1) => p * (c - t) / (c * (1.0 + m - m * p)),
        (0, 2, 2) => {
            ((qt * (mu - 1.0) - 2.0 * mu + 1.0) * (t - c * (m + 1.0)) - c * m * mu * mu)
                / (c * mu * (1.0 + m - m * mu))
        }
        (2, 0, 0) => 1.0,
        (2, 0, 1) => p,
        (2, 1, 0) => 0.5,
        (2, 1, 1) => p / 2.0,
        (2, j @ (0 | 1), 2) => {
            let h4 = if j == 0 { 1.0 } else { (m + 1.0) / m };
            (qt * (1.0 - mu) + 2.0 * mu - 1.0) / (h4 * mu)
        }
        (2, 2, 0) => 1.0 - t / (c * (m + 1.0)),
        (2, 2, 1) => p * (1.0 - t / (c * (m + 1.0))),
        (2, 2, 2) => {
            (qt * (mu - 1.0) - 2.0 * mu + 1.0) * (t - c * (m + 1.0)) / (c * mu * (m + 1.0))
        }
        _ => return None,
    };
    Some(value)
}
