//! Simulation harness, file formats and command-line front end for
//! [`mapcfo_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod io;
pub mod manifest;
pub mod simulation;
pub mod spec;

pub use simulation::{
    ar1_prior_update, run_acquisition_sweep, run_mse_vs_snr, run_tracking, stationary_prior_variance, usable_range,
    Method, Mode, SweepConfig, SweepRecord, SweepResult, TrackingConfig, TrackingRecord, TrackingResult,
};
pub use spec::{power_for_snr, CfoPriorSpec, PilotKind, PilotSpec};
