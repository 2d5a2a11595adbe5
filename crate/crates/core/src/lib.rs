//! Temporal auto-correlation and coherence time of interference in Poisson
//! networks with renewal traffic, Nakagami block fading and node mobility.
//!
//! - [`model`]: parameters, case triplets, curves
//! - [`traffic`]: joint sending probability of the renewal chain
//! - [`spatial`]: path-loss integrals, including the mobility kernel
//! - [`analytic`]: the ACF for every case
//! - [`coherence`]: coherence time
//! - [`sim`]: Monte Carlo ensembles and empirical ACF

pub mod analytic;
pub mod coherence;
pub mod model;
pub mod sim;
pub mod spatial;
pub mod traffic;

pub use analytic::{
    acf, acf_curve, channel_factor, table1_closed_form, traffic_factor, AcfError, AcfModel,
};
pub use coherence::{
    coherence_time, CoherenceMethod, CoherenceQuery, CoherenceResult, CoherenceValue,
};
pub use model::{
    effective_moments, validate, AcfCurve, CaseTriplet, CurveSource, Mobility, MomentSet,
    NetworkParams, Source, ValidationReport,
};
pub use sim::{empirical_acf, simulate, SimConfig, SimEnsemble, SimError};
pub use spatial::{mobility_kernel_integral, DisplacementLaw, PathLossKernel, SpatialError};
pub use traffic::{
    joint_send_prob, joint_send_prob_oracle, joint_send_prob_small_lag, TrafficChainState,
};
