//! Adaptive estimation of pure qudit states and unitary transformations.
//!
//! The unknown state is found by minimizing its squared error to a trial
//! state with complex simultaneous perturbation stochastic approximation
//! (CSPSA). The squared error is read off a simulated interferometer, and
//! every batch of counts is pooled into a multinomial likelihood that is
//! maximized with Nelder-Mead after each CSPSA step. Unitaries are estimated
//! column by column with the same machinery.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cspsa;
pub mod error;
pub mod experiment;
pub mod interferometer;
pub mod metrics;
pub mod mle;
pub mod protocol;
pub mod qudit;
pub mod rng;
pub mod simplex;

pub use cspsa::{CspsaState, GainSchedule, PerturbationVector};
pub use error::{Error, Result};
pub use interferometer::{MeasurementRecord, OutcomeDistribution};
pub use mle::DataLog;
pub use qudit::{AmplitudeVector, ComplexMatrix};
pub use rng::RngStream;
pub use simplex::SimplexOptions;
