//! Monte Carlo simulation of interference at the origin.
//!
//! Each realization places a Poisson point process on a disc, runs the
//! traffic chain, block fading and mobility for `n_slots` slots and records
//! the interference `I_t = Σ κ h² l(|x|) γ` at the origin. Realizations are
//! independent, each with its own ChaCha stream, and run in parallel.

mod estimate;
mod export;
mod realization;

pub use estimate::{empirical_acf, ensemble_correlation, mean_interference, MeanEstimate};
pub use export::{read_binary, write_binary, write_csv, BINARY_MAGIC, BINARY_VERSION};
pub use realization::{step_mobility, FadingState, Node, Realization};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate, CaseTriplet, InvalidParams, Mobility, NetworkParams, Source};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    InvalidParams(#[from] InvalidParams),
    #[error("need at least 2 realizations, got {0}")]
    TooFewRealizations(usize),
    #[error("need at least 1 slot")]
    NoSlots,
    #[error("window radius {radius:.1} holds {expected:.0} nodes on average, over the budget of {budget}")]
    NodeBudget {
        radius: f64,
        expected: f64,
        budget: usize,
    },
    #[error("tail fraction {0} must lie in (0, 1)")]
    BadTailFraction(f64),
    #[error("lag {lag} needs more than {n_slots} slots")]
    LagTooLarge { lag: u32, n_slots: usize },
    #[error(
        "correlation undefined at lag {lag}: interference has zero variance across realizations"
    )]
    UndefinedCorrelation { lag: u32 },
    #[error(transparent)]
    Curve(#[from] crate::model::CurveError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed ensemble file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_realizations: usize,
    pub n_slots: usize,
    pub seed: u64,
    /// Share of the mean interference allowed to come from outside the
    /// window.
    pub tail_fraction: f64,
    /// Largest expected node count per realization.
    pub node_budget: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_realizations: 10_000,
            n_slots: 32,
            seed: 0,
            tail_fraction: 1e-3,
            node_budget: 500_000,
        }
    }
}

/// Interference series of an ensemble, row-major
/// `[n_realizations × n_slots]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEnsemble {
    pub params: NetworkParams,
    pub case: CaseTriplet,
    pub seed: u64,
    n_realizations: usize,
    n_slots: usize,
    series: Vec<f64>,
}

impl SimEnsemble {
    pub fn from_series(
        params: NetworkParams,
        case: CaseTriplet,
        seed: u64,
        n_realizations: usize,
        n_slots: usize,
        series: Vec<f64>,
    ) -> Result<Self, SimError> {
        if series.len() != n_realizations * n_slots {
            return Err(SimError::Format(format!(
                "{} values for {n_realizations}×{n_slots}",
                series.len()
            )));
        }
        Ok(SimEnsemble {
            params,
            case,
            seed,
            n_realizations,
            n_slots,
            series,
        })
    }

    pub fn n_realizations(&self) -> usize {
        self.n_realizations
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn series(&self) -> &[f64] {
        &self.series
    }

    pub fn row(&self, realization: usize) -> &[f64] {
        let start = realization * self.n_slots;
        &self.series[start..start + self.n_slots]
    }

    pub fn get(&self, realization: usize, slot: usize) -> f64 {
        self.series[realization * self.n_slots + slot]
    }
}

/// Radius beyond which nodes add at most `tail_fraction` of the mean
/// interference: `R = (f α / 2)^(-1/(α-2))`.
pub fn window_radius(alpha: f64, tail_fraction: f64) -> f64 {
    (tail_fraction * alpha / 2.0)
        .powf(-1.0 / (alpha - 2.0))
        .max(1.0)
}

/// Window radius plus room for nodes that move into the inner window.
pub fn simulation_radius(params: &NetworkParams, case: CaseTriplet, config: &SimConfig) -> f64 {
    let base = window_radius(params.path_loss_exponent, config.tail_fraction);
    if case.locations != Source::Correlated {
        return base;
    }
    let v = params.effective_speed();
    let slots = config.n_slots as f64;
    base + match params.mobility {
        Mobility::Static => 0.0,
        Mobility::Linear => v * slots,
        Mobility::Brownian => 6.0 * v * (params.brownian_variance * slots).sqrt(),
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn simulate(
    params: &NetworkParams,
    case: CaseTriplet,
    config: &SimConfig,
) -> Result<SimEnsemble, SimError> {
    validate(params).into_result()?;
    if config.n_realizations < 2 {
        return Err(SimError::TooFewRealizations(config.n_realizations));
    }
    if config.n_slots == 0 {
        return Err(SimError::NoSlots);
    }
    if !(config.tail_fraction > 0.0 && config.tail_fraction < 1.0) {
        return Err(SimError::BadTailFraction(config.tail_fraction));
    }
    let radius = simulation_radius(params, case, config);
    let expected = params.density * std::f64::consts::PI * radius * radius;
    if expected > config.node_budget as f64 {
        return Err(SimError::NodeBudget {
            radius,
            expected,
            budget: config.node_budget,
        });
    }

    // known locations: one layout shared by every realization
    let layout = (case.locations == Source::Constant).then(|| {
        let mut rng = stream_rng(config.seed, 0);
        Realization::sample_positions(params, radius, &mut rng)
    });

    let mut series = vec![0.0; config.n_realizations * config.n_slots];
    series
        .par_chunks_mut(config.n_slots)
        .enumerate()
        .for_each(|(idx, row)| {
            let mut rng = stream_rng(config.seed, idx as u64 + 1);
            realization::run(params, case, radius, layout.as_deref(), row, &mut rng);
        });

    SimEnsemble::from_series(
        *params,
        case,
        config.seed,
        config.n_realizations,
        config.n_slots,
        series,
    )
}
