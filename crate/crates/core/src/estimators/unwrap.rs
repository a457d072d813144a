#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::CorrelationSequence;
use crate::linalg::TAU;
use crate::signal::CfoPrior;

/// Chooses the branch `theta_k + 2 pi m_k` of every lag, in lag order.
///
/// Each lag is centered on `2 pi f k`, where `f` is the weighted estimate built
/// from the prior and the lags already unwrapped. With no information yet the
/// center is the prior mean. A residual of exactly `-pi` is moved to `+pi`.
pub fn phase_unwrap(seq: &CorrelationSequence, prior: &CfoPrior) -> CorrelationSequence {
    let mut num = prior.precision() * prior.mean();
    let mut den = prior.precision();
    let mut unwrapped = Vec::with_capacity(seq.len());
    for ((&k, &r), &theta) in seq.lags().iter().zip(seq.magnitudes()).zip(seq.phases()) {
        let f_run = if den > 0.0 { num / den } else { prior.mean() };
        let kf = k as f64;
        let predicted = TAU * f_run * kf;
        let d = theta - predicted;
        let m = ((-PI - d) / TAU).floor() + 1.0;
        let phi = theta + TAU * m;
        unwrapped.push(phi);
        num += 2.0 * TAU * kf * r * phi;
        den += 2.0 * TAU * TAU * kf * kf * r;
    }
    seq.clone().with_unwrapped(unwrapped)
}
