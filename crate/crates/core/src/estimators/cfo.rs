#[allow(unused_imports)]
use num_traits::Float;
use super::correlation::{correlation_general, correlation_periodic, correlation_td};
use super::{phase_unwrap, CorrelationSequence, EstimatorWorkspace};
use crate::error::{invalid, Error, Result};
use crate::linalg::{cis, CMatrix, TAU};
use crate::signal::{CfoPrior, Frame};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorMode {
    Map,
    Ml,
}

/// Which correlation formula feeds the CFO estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationMethod {
    General,
    /// Requires a periodic pilot and a zero-mean i.i.d. prior.
    Periodic,
    /// Requires a time-division pilot and a zero-mean i.i.d. prior.
    TimeDivision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfoEstimate {
    pub value: f64,
    pub mode: EstimatorMode,
    /// The unwrapped sequence the estimate was formed from. When produced by
    /// [`estimate_frame`] its phases are relative to the derotation center.
    pub correlation: Option<CorrelationSequence>,
}

/// Weighted phase-slope estimate from an unwrapped sequence.
///
/// A flat prior gives the ML estimate; with no lags the prior mean is returned.
pub fn estimate_cfo(seq: &CorrelationSequence, prior: &CfoPrior) -> Result<CfoEstimate> {
    let mode = if prior.is_flat() { EstimatorMode::Ml } else { EstimatorMode::Map };
    let unwrapped = seq.unwrapped().ok_or(Error::NotUnwrapped)?;
    let mut num = prior.precision() * prior.mean();
    let mut den = prior.precision();
    for ((&k, &r), &phi) in seq.lags().iter().zip(seq.magnitudes()).zip(unwrapped) {
        let kf = k as f64;
        num += 2.0 * TAU * kf * r * phi;
        den += 2.0 * TAU * TAU * kf * kf * r;
    }
    if !(den > 0.0) {
        return Err(Error::NoFrequencyInformation);
    }
    Ok(CfoEstimate { value: num / den, mode, correlation: Some(seq.clone()) })
}

/// `y'[k, r] = e^{-j 2 pi f k} y[k, r]` with `k` counted from zero.
pub fn derotate(frame: &Frame, f_offset: f64) -> Frame {
    if f_offset == 0.0 {
        return frame.clone();
    }
    let samples = frame.samples();
    let rotated = CMatrix::from_fn(samples.nrows(), samples.ncols(), |k, r| cis(-TAU * f_offset * k as f64) * samples[(k, r)]);
    Frame::new(rotated, *frame.config()).expect("shape is unchanged")
}

/// Derotates by the prior mean, correlates, unwraps and estimates, then adds
/// the mean back.
pub fn estimate_frame(
    frame: &Frame,
    ws: &EstimatorWorkspace<'_>,
    prior: &CfoPrior,
    method: CorrelationMethod,
) -> Result<CfoEstimate> {
    let y = derotate(frame, prior.mean());
    let seq = match method {
        CorrelationMethod::General => correlation_general(&y, ws)?,
        CorrelationMethod::Periodic | CorrelationMethod::TimeDivision => {
            let var = ws
                .prior()
                .iid_variance()
                .filter(|_| ws.prior().is_zero_mean())
                .ok_or_else(|| invalid("reduced correlations need a zero-mean i.i.d. channel prior"))?;
            if method == CorrelationMethod::Periodic {
                correlation_periodic(&y, ws.pilot(), var)?
            } else {
                correlation_td(&y, ws.pilot(), var)?
            }
        }
    };
    let centered = prior.centered();
    let seq = phase_unwrap(&seq, &centered);
    let mut est = estimate_cfo(&seq, &centered)?;
    est.value += prior.mean();
    Ok(est)
}

/// Gradient-style error `-gamma sum_k k r_k sin(2 pi k f - theta_k)` for an
/// external tracking loop.
pub fn feedback_error(seq: &CorrelationSequence, f: f64, gamma: f64) -> f64 {
    let s: f64 = seq
        .lags()
        .iter()
        .zip(seq.magnitudes())
        .zip(seq.phases())
        .map(|((&k, &r), &theta)| k as f64 * r * (TAU * k as f64 * f - theta).sin())
        .sum();
    -gamma * s
}
