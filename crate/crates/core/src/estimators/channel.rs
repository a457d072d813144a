use super::correlation::{check_frame, matched_vectors};
use super::{CfoEstimate, EstimatorWorkspace};
use crate::error::Result;
use crate::linalg::{cis, CMatrix, CVector, TAU};
use crate::signal::Frame;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub coefficients: CVector,
    /// Error covariance of the estimate, the workspace matrix `A`.
    pub error_covariance: CMatrix,
}

/// `X^H y = sum_k e^{-j 2 pi f k} v(k)`.
pub(crate) fn matched_statistic(v: &[CVector], f: f64) -> CVector {
    let mut x = CVector::zeros(v.first().map_or(0, |v0| v0.len()));
    for (k, vk) in v.iter().enumerate() {
        x.axpy(cis(-TAU * f * k as f64), vk, crate::linalg::Complex64::new(1.0, 0.0));
    }
    x
}

/// `h_hat = A X(f_hat)^H y + b`.
pub fn estimate_channel(frame: &Frame, ws: &EstimatorWorkspace<'_>, f_hat: &CfoEstimate) -> Result<ChannelEstimate> {
    check_frame(frame, ws.pilot(), Some(ws.rx_antennas()))?;
    let x = matched_statistic(&matched_vectors(frame, ws.pilot()), f_hat.value);
    Ok(ChannelEstimate { coefficients: ws.a() * x + ws.b(), error_covariance: ws.a().clone() })
}
