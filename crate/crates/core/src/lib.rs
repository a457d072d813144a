//! Joint MAP estimation of carrier frequency offset and MIMO channel from
//! pilot frames, with the matching Bayesian Cramer-Rao bounds.
//!
//! Pure numerics, `no_std` with `alloc`. Every random draw takes an explicit
//! [`Seed`].

#![no_std]
// Parameter checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod rng;
pub mod signal;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, Complex64};
pub use rng::Seed;
pub use signal::{
    make_combined_pilot, make_periodic_pilot, make_td_pilot, sample_cfo, sample_channel,
    synthesize_frame, zadoff_chu, CfoPrior, ChannelPrior, ChannelRealization, Frame, MimoConfig,
    PilotLayout, PilotMatrix,
};
pub use bounds::{beta_general, beta_iid, beta_periodic_closed, beta_td_closed, make_bounds, BoundInputs, BoundResult};
pub use estimators::{
    build_workspace, correlation_general, correlation_periodic, correlation_td, derotate, estimate_cfo,
    estimate_channel, estimate_frame, feedback_error, grid_search_oracle, objective_g, objective_g_derivative,
    phase_unwrap, CfoEstimate, ChannelEstimate, ChannelMode, CorrelationMethod, CorrelationSequence, EstimatorMode,
    EstimatorWorkspace,
};
