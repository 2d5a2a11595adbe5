//! Path-loss integrals over the plane.
//!
//! The bounded path loss is `l(r) = min(1, r^-alpha)`. Correlation of the
//! interference seen by moving nodes is governed by the overlap
//!
//! ```text
//! K(s) = ∫ l(|x|) l(|x + δ|) dx,   |δ| = s,
//! ```
//!
//! and by its expectation over the random displacement of a node after
//! `tau` slots. `K(0) = ∫ l² = π α / (α - 1)`.
//!
//! `K` is evaluated in polar coordinates around the origin. The radial axis
//! is split at the circles where either factor, or the angular integral,
//! loses smoothness (`r = 1`, `r = |1 - s|`, `r = 1 + s`) and continues with
//! geometrically growing panels until an analytic tail bound is negligible.
//! For a fixed radius the angular integral has a closed-form part (where
//! `|x + δ| <= 1`) and a smooth part integrated with Gauss–Legendre.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Mobility, NetworkParams};

/// Quadrature refuses exponents this close to 2, where the integrals
/// converge too slowly to be useful.
pub const MIN_QUADRATURE_ALPHA: f64 = 2.05;

const ORDERS: [usize; 6] = [8, 16, 32, 64, 128, 256];
const OVERLAP_RTOL: f64 = 1e-9;
const TAIL_RTOL: f64 = 1e-13;
/// Absolute tolerance, relative to `K(0)`, for overlaps that are
/// negligible anyway.
const ABS_TOL: f64 = 1e-14;

const BROWNIAN_ORDERS: [usize; 4] = [8, 16, 32, 64];
const BROWNIAN_RTOL: f64 = 1e-8;
/// Rayleigh radii beyond this carry less than `e^-40` of the mass.
const BROWNIAN_RADIUS_CUTOFF: f64 = 9.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpatialError {
    #[error("path loss exponent α={0} must exceed 2")]
    AlphaTooSmall(f64),
    #[error("path loss exponent α={alpha} too close to 2 for quadrature (need α > {min})")]
    AlphaTooCloseToTwo { alpha: f64, min: f64 },
    #[error("quadrature did not converge: estimate {estimate}, error estimate {error_estimate}")]
    NotConverged { estimate: f64, error_estimate: f64 },
    #[error("displacement {0} must be finite and non-negative")]
    BadDisplacement(f64),
}

/// `l(r) = min(1, r^-alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossKernel {
    alpha: f64,
    half_alpha: f64,
    integer_half_alpha: Option<i32>,
}

impl PathLossKernel {
    pub fn new(alpha: f64) -> Result<Self, SpatialError> {
        if !(alpha.is_finite() && alpha > 2.0) {
            return Err(SpatialError::AlphaTooSmall(alpha));
        }
        let half_alpha = 0.5 * alpha;
        let integer_half_alpha =
            (half_alpha.fract() == 0.0 && half_alpha <= 64.0).then_some(half_alpha as i32);
        Ok(PathLossKernel {
            alpha,
            half_alpha,
            integer_half_alpha,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.eval_sq(r * r)
    }

    /// Path loss for squared distance `r2`.
    #[inline]
    pub fn eval_sq(&self, r2: f64) -> f64 {
        if r2 <= 1.0 {
            1.0
        } else {
            self.power_sq(r2)
        }
    }

    /// `r2^(-alpha/2)` without the clamp at 1.
    #[inline]
    fn power_sq(&self, r2: f64) -> f64 {
        match self.integer_half_alpha {
            Some(k) => r2.powi(-k),
            None => r2.powf(-self.half_alpha),
        }
    }

    /// `∫ l(|x|) dx = α π / (α - 2)`.
    pub fn integral(&self) -> f64 {
        self.alpha * PI / (self.alpha - 2.0)
    }

    /// `∫ l(|x|)² dx = π α / (α - 1)`: the unit disc plus
    /// `2π ∫_1^∞ r^(1-2α) dr`.
    pub fn integral_sq(&self) -> f64 {
        PI * self.alpha / (self.alpha - 1.0)
    }

    /// `∫_{|x|>R} l(|x|) dx = 2π R^(2-α) / (α - 2)` for `R >= 1`.
    pub fn tail_integral(&self, radius: f64) -> f64 {
        2.0 * PI * radius.max(1.0).powf(2.0 - self.alpha) / (self.alpha - 2.0)
    }

    /// `K(s) = ∫ l(|x|) l(|x + δ|) dx` for a displacement of length `s`.
    ///
    /// Each radial panel raises its Gauss–Legendre order until two
    /// successive estimates agree; the error estimate is the sum of the
    /// last per-panel differences.
    pub fn overlap(&self, displacement: f64) -> Result<f64, SpatialError> {
        if !(displacement.is_finite() && displacement >= 0.0) {
            return Err(SpatialError::BadDisplacement(displacement));
        }
        self.require_quadrature_alpha()?;
        let s = displacement;
        let panels = self.radial_panels(s);
        let atol = ABS_TOL * self.integral_sq() / panels.len() as f64;
        let mut total = 0.0;
        let mut error_total = 0.0;
        let mut converged = true;
        for panel in &panels {
            let radial =
                |r: f64, rule: &[(f64, f64)]| r * self.eval(r) * self.angular_integral(r, s, rule);
            let (value, error, ok) = escalate(&ORDERS, OVERLAP_RTOL, atol, |rule| {
                panel.integrate(rule, |r| radial(r, rule))
            });
            total += value;
            error_total += error;
            converged &= ok;
        }
        if converged {
            Ok(total)
        } else {
            Err(SpatialError::NotConverged {
                estimate: total,
                error_estimate: error_total,
            })
        }
    }

    fn require_quadrature_alpha(&self) -> Result<(), SpatialError> {
        if self.alpha <= MIN_QUADRATURE_ALPHA {
            Err(SpatialError::AlphaTooCloseToTwo {
                alpha: self.alpha,
                min: MIN_QUADRATURE_ALPHA,
            })
        } else {
            Ok(())
        }
    }

    /// `∫_0^{2π} l(|x + δ|) dφ` on the circle `|x| = r`.
    ///
    /// With `D(φ)² = r² + s² + 2 r s cos φ`, the arc where `D <= 1`
    /// contributes its length exactly. The rest is cut where `D` doubles so
    /// the power law varies by a bounded factor on every piece.
    fn angular_integral(&self, r: f64, s: f64, rule: &[(f64, f64)]) -> f64 {
        if r == 0.0 || s == 0.0 {
            return 2.0 * PI * self.eval(r + s);
        }
        let d_max = r + s;
        if d_max <= 1.0 {
            return 2.0 * PI;
        }
        let base = r * r + s * s;
        let cross = 2.0 * r * s;
        let angle_at = |d: f64| ((d * d - base) / cross).clamp(-1.0, 1.0).acos();
        let far = |phi: f64| self.power_sq(base + cross * phi.cos());

        let d_min = (r - s).abs();
        let (mut inner, mut upper) = if d_min < 1.0 {
            let kink = angle_at(1.0);
            (PI - kink, kink)
        } else {
            (0.0, PI)
        };
        let mut d = d_min.max(1.0);
        while upper > 0.0 {
            d *= 2.0;
            let lower = if d >= d_max { 0.0 } else { angle_at(d) };
            inner += integrate(rule, lower, upper, far);
            upper = lower;
        }
        2.0 * inner
    }

    fn radial_panels(&self, s: f64) -> Vec<Panel> {
        let near_end = 2.0 * (1.0 + s);
        let mut cuts = vec![0.0, near_end, 1.0, (1.0 - s).abs(), 1.0 + s];
        // grade towards the ring |r - s| <= 1 where the angular integral peaks
        let mut step = 1.0;
        while step < near_end {
            cuts.push(s - 1.0 - step);
            cuts.push(s + 1.0 + step);
            step *= 2.0;
        }
        cuts.retain(|&c| (0.0..=near_end).contains(&c));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let mut panels: Vec<Panel> = cuts
            .windows(2)
            .map(|w| Panel {
                a: w[0],
                b: w[1],
                smoothed: true,
            })
            .collect();

        // For |x| = R >= 2(1+s): l(x + δ) <= (R - s)^-α <= 2^α R^-α, so the
        // remaining integral is below 2π 2^α R^(2-2α) / (2α - 2).
        let tail_bound = |radius: f64| {
            2.0 * PI * 2f64.powf(self.alpha) * radius.powf(2.0 - 2.0 * self.alpha)
                / (2.0 * self.alpha - 2.0)
        };
        let target = TAIL_RTOL * PI;
        let mut radius = near_end;
        while tail_bound(radius) > target {
            panels.push(Panel {
                a: radius,
                b: 2.0 * radius,
                smoothed: false,
            });
            radius *= 2.0;
        }
        panels
    }
}

/// Integration interval. Smoothed panels substitute `r = a + (b-a)(3u² - 2u³)`,
/// which turns the `(r - a)^{3/2}` behaviour at tangent circles into a
/// polynomial.
#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    smoothed: bool,
}

impl Panel {
    fn integrate(&self, rule: &[(f64, f64)], mut f: impl FnMut(f64) -> f64) -> f64 {
        if !self.smoothed {
            return integrate(rule, self.a, self.b, f);
        }
        let width = self.b - self.a;
        integrate(rule, 0.0, 1.0, |u| {
            let g = u * u * (3.0 - 2.0 * u);
            let dg = 6.0 * u * (1.0 - u);
            width * dg * f(self.a + width * g)
        })
    }
}

/// `(order, nodes and weights)`.
type Rule = (usize, Vec<(f64, f64)>);

/// Gauss–Legendre nodes and weights on `[-1, 1]`, cached per order.
fn legendre_rule(order: usize) -> &'static [(f64, f64)] {
    static RULES: OnceLock<Vec<Rule>> = OnceLock::new();
    let rules = RULES.get_or_init(|| {
        let mut orders: Vec<usize> = ORDERS.iter().chain(&BROWNIAN_ORDERS).copied().collect();
        orders.sort_unstable();
        orders.dedup();
        orders
            .into_iter()
            .map(|n| {
                let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("non-zero order"));
                (n, rule.as_node_weight_pairs().to_vec())
            })
            .collect()
    });
    rules
        .iter()
        .find(|(n, _)| *n == order)
        .map(|(_, r)| r.as_slice())
        .expect("quadrature order not in the cached ladder")
}

fn integrate(rule: &[(f64, f64)], a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    half * rule
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

/// Re-evaluates `estimate` with increasing Gauss–Legendre order until two
/// successive values agree to `rtol` (or to `atol` for negligible values).
/// Returns the last value, the last difference and whether it converged.
fn escalate(
    orders: &[usize],
    rtol: f64,
    atol: f64,
    mut estimate: impl FnMut(&[(f64, f64)]) -> f64,
) -> (f64, f64, bool) {
    let mut previous = estimate(legendre_rule(orders[0]));
    let mut error_estimate = f64::INFINITY;
    for &order in &orders[1..] {
        let current = estimate(legendre_rule(order));
        error_estimate = (current - previous).abs();
        previous = current;
        if error_estimate <= rtol * current.abs() || error_estimate <= atol {
            return (current, error_estimate, true);
        }
    }
    (previous, error_estimate, false)
}

/// Distribution of a node's displacement over `lag` slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DisplacementLaw {
    Static,
    /// Fixed length `speed * lag`, uniform direction.
    Linear {
        speed: f64,
        lag: u32,
    },
    /// `speed * sqrt(lag) * w` with `w ~ N(0, variance I)`.
    Brownian {
        speed: f64,
        lag: u32,
        variance: f64,
    },
}

impl DisplacementLaw {
    pub fn from_params(params: &NetworkParams, lag: u32) -> Self {
        let speed = params.effective_speed();
        match params.mobility {
            _ if speed == 0.0 => DisplacementLaw::Static,
            Mobility::Static => DisplacementLaw::Static,
            Mobility::Linear => DisplacementLaw::Linear { speed, lag },
            Mobility::Brownian => DisplacementLaw::Brownian {
                speed,
                lag,
                variance: params.brownian_variance,
            },
        }
    }

    pub fn is_degenerate(&self) -> bool {
        match *self {
            DisplacementLaw::Static => true,
            DisplacementLaw::Linear { speed, lag } => speed * lag as f64 == 0.0,
            DisplacementLaw::Brownian { speed, lag, .. } => speed * lag as f64 == 0.0,
        }
    }
}

/// `J = ∫ l(|x|) E[l(|x + v ω_τ|)] dx` for the given displacement law.
pub fn mobility_kernel_integral(
    kernel: &PathLossKernel,
    law: DisplacementLaw,
) -> Result<f64, SpatialError> {
    if law.is_degenerate() {
        return Ok(kernel.integral_sq());
    }
    match law {
        DisplacementLaw::Static => Ok(kernel.integral_sq()),
        DisplacementLaw::Linear { speed, lag } => kernel.overlap(speed * lag as f64),
        DisplacementLaw::Brownian {
            speed,
            lag,
            variance,
        } => brownian_overlap(kernel, speed * (lag as f64 * variance).sqrt()),
    }
}

/// `E[K(scale R)]` for a unit Rayleigh `R`, i.e. `∫ K(scale r) r e^(-r²/2) dr`.
///
/// The radial axis is cut where the displacement reaches 2 (the unit discs
/// around the origin and the displaced node stop overlapping) and doubles
/// from there, so large scales are resolved near the origin.
fn brownian_overlap(kernel: &PathLossKernel, scale: f64) -> Result<f64, SpatialError> {
    kernel.require_quadrature_alpha()?;
    let mut cuts = vec![0.0, BROWNIAN_RADIUS_CUTOFF];
    let mut c = 2.0 / scale;
    while c < BROWNIAN_RADIUS_CUTOFF {
        cuts.push(c);
        c *= 2.0;
    }
    cuts.sort_by(f64::total_cmp);
    let mut panels = Vec::new();
    for w in cuts.windows(2) {
        let pieces = (0.5 * (w[1] - w[0])).ceil().max(1.0) as usize;
        let step = (w[1] - w[0]) / pieces as f64;
        panels.extend((0..pieces).map(|i| (w[0] + i as f64 * step, w[0] + (i + 1) as f64 * step)));
    }

    let atol = ABS_TOL * kernel.integral_sq();
    let atol = atol / panels.len() as f64;
    let mut total = 0.0;
    let mut error_total = 0.0;
    let mut converged = true;
    let mut failure = None;
    for &(a, b) in &panels {
        let (value, error, ok) = escalate(&BROWNIAN_ORDERS, BROWNIAN_RTOL, atol, |rule| {
            integrate(rule, a, b, |r| {
                let k = kernel.overlap(scale * r).unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    f64::NAN
                });
                k * r * (-0.5 * r * r).exp()
            })
        });
        total += value;
        error_total += error;
        converged &= ok;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    if converged {
        Ok(total)
    } else {
        Err(SpatialError::NotConverged {
            estimate: total,
            error_estimate: error_total,
        })
    }
}

/// `J(τ) / ∫ l²`, the location factor of the auto-correlation.
pub fn spatial_ratio(params: &NetworkParams, lag: u32) -> Result<f64, SpatialError> {
    let kernel = PathLossKernel::new(params.path_loss_exponent)?;
    let law = DisplacementLaw::from_params(params, lag);
    if law.is_degenerate() {
        return Ok(1.0);
    }
    Ok(mobility_kernel_integral(&kernel, law)? / kernel.integral_sq())
}

/// `∫ l(|x|) dx` for the parameters' path loss exponent.
pub fn integral_ell(alpha: f64) -> Result<f64, SpatialError> {
    Ok(PathLossKernel::new(alpha)?.integral())
}

/// `∫ l(|x|)² dx` for the parameters' path loss exponent.
pub fn integral_ell_sq(alpha: f64) -> Result<f64, SpatialError> {
    Ok(PathLossKernel::new(alpha)?.integral_sq())
}
