// Quadrature nodes and approximation coefficients are kept at their full
// published precision even where f64 truncates them.
#![allow(clippy::excessive_precision)]

//! Throughput analysis of k-th best secondary-user selection in underlay
//! cognitive radio.
//!
//! A secondary receiver with M MRC antennas schedules the user with the k-th
//! highest SNR out of N, under transmit power adaptation that caps the
//! interference seen by the primary receiver. This crate provides:
//!
//! - the single-user SNR law and its sampler ([`channel`]);
//! - exact and limiting (inverse-gamma) distributions of the k-th highest
//!   SNR ([`order_stats`]);
//! - closed-form asymptotic average and effective throughput with exact
//!   quadrature references ([`throughput`]);
//! - reproducible parallel Monte Carlo estimators ([`montecarlo`]);
//! - figure-style parameter sweeps and a validation suite backing the
//!   `kbest` CLI ([`sweep`], [`validate`]).

pub mod channel;
pub mod montecarlo;
pub mod order_stats;
pub mod quad;
pub mod rng;
pub mod specfun;
pub mod sweep;
pub mod throughput;
pub mod validate;

pub use channel::{sample_snr, snr_cdf, snr_pdf, ChannelParams, SnrSample};
pub use montecarlo::{simulate_avg, simulate_eff, SimulationConfig, TrialResult};
pub use order_stats::{
    exact_kth_pdf, ks_convergence, limit_cdf, limit_pdf, scale_b, LimitLaw, SelectionSpec,
};
pub use rng::RandomStream;
pub use throughput::{
    asymptotic_avg, asymptotic_eff, avg_k1_closed_form, exact_avg_quadrature,
    exact_eff_quadrature, Method, QosSpec, ThroughputEstimate,
};
