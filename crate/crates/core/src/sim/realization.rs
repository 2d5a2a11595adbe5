use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::model::{CaseTriplet, Mobility, NetworkParams, Source};
use crate::spatial::PathLossKernel;
use crate::traffic::{RenewalTraffic, TrafficChainState};

/// Current fading power gain and slots left in its block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingState {
    pub h2: f64,
    pub slots_until_redraw: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub position: [f64; 2],
    /// Per-slot displacement under linear mobility.
    pub velocity: [f64; 2],
    pub traffic: TrafficChainState,
    pub fading: FadingState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub nodes: Vec<Node>,
    pub rng_seed: u64,
}

enum Fading {
    Constant,
    Block { len: u32, gain: Gamma<f64> },
}

impl Fading {
    fn new(params: &NetworkParams, case: CaseTriplet) -> Self {
        let len = match case.channel {
            Source::Constant => return Fading::Constant,
            Source::Uncorrelated => 1,
            Source::Correlated => params.channel_block_len,
        };
        let m = params.nakagami_m;
        Fading::Block {
            len,
            gain: Gamma::new(m, 1.0 / m).expect("validated Nakagami parameter"),
        }
    }

    /// Fresh state with a uniformly random position inside the block.
    fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> FadingState {
        match self {
            Fading::Constant => FadingState {
                h2: 1.0,
                slots_until_redraw: u32::MAX,
            },
            Fading::Block { len, gain } => FadingState {
                h2: gain.sample(rng),
                slots_until_redraw: rng.random_range(1..=*len),
            },
        }
    }

    fn advance<R: Rng + ?Sized>(&self, state: &mut FadingState, rng: &mut R) {
        if let Fading::Block { len, gain } = self {
            state.slots_until_redraw -= 1;
            if state.slots_until_redraw == 0 {
                state.h2 = gain.sample(rng);
                state.slots_until_redraw = *len;
            }
        }
    }
}

/// Traffic process for a case: the constant digit is "always on" (p = 1,
/// d = 1) and the uncorrelated digit is the one-slot chain, i.e. an
/// independent Bernoulli(p) per slot.
fn traffic_process(params: &NetworkParams, case: CaseTriplet) -> RenewalTraffic {
    match case.traffic {
        Source::Constant => RenewalTraffic::new(1.0, 1),
        Source::Uncorrelated => RenewalTraffic::new(params.start_prob, 1),
        Source::Correlated => RenewalTraffic::from_params(params),
    }
}

fn uniform_in_disc<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> [f64; 2] {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    [r * phi.cos(), r * phi.sin()]
}

impl Realization {
    /// Poisson number of uniform points on the disc of the given radius.
    pub fn sample_positions<R: Rng + ?Sized>(
        params: &NetworkParams,
        radius: f64,
        rng: &mut R,
    ) -> Vec<[f64; 2]> {
        let mean = params.density * PI * radius * radius;
        let count = Poisson::new(mean).expect("positive mean").sample(rng) as usize;
        (0..count).map(|_| uniform_in_disc(radius, rng)).collect()
    }

    /// Nodes at the given positions with stationary traffic and fading and,
    /// for linear mobility, a uniform heading.
    pub fn with_positions<R: Rng + ?Sized>(
        params: &NetworkParams,
        case: CaseTriplet,
        positions: &[[f64; 2]],
        rng_seed: u64,
        rng: &mut R,
    ) -> Self {
        let traffic = traffic_process(params, case);
        let fading = Fading::new(params, case);
        let speed = params.effective_speed();
        let linear = params.mobility == Mobility::Linear && speed > 0.0;
        let nodes = positions
            .iter()
            .map(|&position| {
                let velocity = if linear {
                    let phi = 2.0 * PI * rng.random::<f64>();
                    [speed * phi.cos(), speed * phi.sin()]
                } else {
                    [0.0, 0.0]
                };
                Node {
                    position,
                    velocity,
                    traffic: traffic.sample_stationary(rng),
                    fading: fading.init(rng),
                }
            })
            .collect();
        Realization { nodes, rng_seed }
    }

    /// `Σ κ h² l(|x|) γ` at the origin.
    pub fn interference(&self, params: &NetworkParams, kernel: &PathLossKernel) -> f64 {
        params.tx_power
            * self
                .nodes
                .iter()
                .filter(|n| n.traffic.is_sending())
                .map(|n| {
                    let [x, y] = n.position;
                    n.fading.h2 * kernel.eval_sq(x * x + y * y)
                })
                .sum::<f64>()
    }
}

/// Moves every node by one slot: a fixed per-node velocity under linear
/// mobility, an independent `v N(0, σ² I)` step under Brownian motion.
pub fn step_mobility<R: Rng + ?Sized>(
    realization: &mut Realization,
    params: &NetworkParams,
    rng: &mut R,
) {
    let speed = params.effective_speed();
    if speed == 0.0 {
        return;
    }
    match params.mobility {
        Mobility::Static => {}
        Mobility::Linear => {
            for node in &mut realization.nodes {
                node.position[0] += node.velocity[0];
                node.position[1] += node.velocity[1];
            }
        }
        Mobility::Brownian => {
            let scale = speed * params.brownian_variance.sqrt();
            for node in &mut realization.nodes {
                let dx: f64 = StandardNormal.sample(rng);
                let dy: f64 = StandardNormal.sample(rng);
                node.position[0] += scale * dx;
                node.position[1] += scale * dy;
            }
        }
    }
}

/// Fills `out` with one realization's interference series.
pub(super) fn run<R: Rng + ?Sized>(
    params: &NetworkParams,
    case: CaseTriplet,
    radius: f64,
    layout: Option<&[[f64; 2]]>,
    out: &mut [f64],
    rng: &mut R,
) {
    let kernel = PathLossKernel::new(params.path_loss_exponent).expect("validated α");
    let traffic = traffic_process(params, case);
    let fading = Fading::new(params, case);
    let kappa = params.tx_power;

    if case.locations == Source::Uncorrelated {
        // a fresh, independent network every slot
        for slot in out.iter_mut() {
            let positions = Realization::sample_positions(params, radius, rng);
            *slot = Realization::with_positions(params, case, &positions, 0, rng)
                .interference(params, &kernel);
        }
        return;
    }

    let positions = match layout {
        Some(layout) => layout.to_vec(),
        None => Realization::sample_positions(params, radius, rng),
    };
    let mut realization = Realization::with_positions(params, case, &positions, 0, rng);
    let mobile = case.locations == Source::Correlated && !params.is_static();

    if mobile {
        for slot in out.iter_mut() {
            *slot = realization.interference(params, &kernel);
            for node in &mut realization.nodes {
                node.traffic = node.traffic.step(&traffic, rng);
                fading.advance(&mut node.fading, rng);
            }
            step_mobility(&mut realization, params, rng);
        }
        return;
    }

    // fixed positions: cache the path gains
    let gains: Vec<f64> = realization
        .nodes
        .iter()
        .map(|n| {
            let [x, y] = n.position;
            kappa * kernel.eval_sq(x * x + y * y)
        })
        .collect();
    for slot in out.iter_mut() {
        let mut total = 0.0;
        for (node, gain) in realization.nodes.iter_mut().zip(&gains) {
            if node.traffic.is_sending() {
                total += gain * node.fading.h2;
            }
            node.traffic = node.traffic.step(&traffic, rng);
            fading.advance(&mut node.fading, rng);
        }
        *slot = total;
    }
}
