//! Age of Information (AoI) of status updates sent over an FCFS M/M/1 queue
//! while an eavesdropper captures each packet with probability `beta`.
//!
//! The crate is split into:
//!
//! - [`aoi`]: closed-form average AoI at the legitimate receiver and at the
//!   eavesdropper, plus the weighted-product welfare objective that trades
//!   them off.
//! - [`optimize`]: scalar search for the best offered load, the AoI-minimizing
//!   load, and the small-capture asymptote given by a quartic root.
//! - [`sim`]: a seeded discrete-event simulator that measures time-average
//!   AoI from sawtooth age traces.
//! - [`experiments`]: parameter sweeps producing CSV / JSON-lines tables.
//! - [`cli`]: the `aoi-eve` command-line front end.
//!
//! Parallel evaluation of grids and replications goes through [`par`]; with
//! the default `parallel` feature it uses rayon, otherwise every loop runs
//! sequentially with identical results.

pub mod aoi;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod optimize;
pub mod par;
pub mod sim;

pub use aoi::{
    aoi_pair, avg_aoi_mm1, bergson_objective, log_bergson_objective, utilities, AoiPair,
    SystemParams, TradeoffWeight,
};
pub use error::{Error, Result};
pub use optimize::{
    asymptotic_polynomial, asymptotic_polynomial_derivative, asymptotic_root, maximize_objective,
    minimize_aoi, AsymptoteResult, Objective, OptimResult, KAUL_YATES_RHO,
};
pub use par::Exec;
pub use sim::{age_integral, run, AgeRecord, AgeTrace, ServiceCoupling, SimConfig, SimResult};
