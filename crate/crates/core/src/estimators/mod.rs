//! Separable MAP estimation of the CFO and the channel.
//!
//! Symbols are indexed from zero, so a frame rotating at `f` carries phase
//! `2 pi f k` on symbol `k`.

mod cfo;
mod channel;
mod correlation;
mod objective;
mod unwrap;
mod workspace;

pub use cfo::{derotate, estimate_cfo, estimate_frame, feedback_error, CfoEstimate, CorrelationMethod, EstimatorMode};
pub use channel::{estimate_channel, ChannelEstimate};
pub use correlation::{correlation_general, correlation_periodic, correlation_td, CorrelationSequence, LAG_DROP_RATIO};
pub use objective::{grid_search_oracle, objective_g, objective_g_derivative};
pub use unwrap::phase_unwrap;
pub use workspace::{build_workspace, ChannelMode, EstimatorWorkspace};
