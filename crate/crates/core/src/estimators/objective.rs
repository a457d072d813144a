#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;

use super::channel::matched_statistic;
use super::correlation::{check_frame, general_statistics, matched_vectors};
use super::{CfoEstimate, EstimatorMode, EstimatorWorkspace};
use crate::error::{invalid, Result};
use crate::linalg::{cis, CVector, TAU};
use crate::signal::{CfoPrior, Frame};

fn prior_penalty(prior: &CfoPrior, f: f64) -> f64 {
    if prior.is_flat() {
        0.0
    } else {
        0.5 * prior.precision() * (f - prior.mean()).powi(2)
    }
}

fn g_from_statistic(x: &CVector, ws: &EstimatorWorkspace<'_>, prior: &CfoPrior, f: f64) -> f64 {
    let linear = 2.0 * ws.b().dotc(x).re;
    let quadratic = x.dotc(&(ws.a() * x)).re;
    linear + quadratic - prior_penalty(prior, f)
}

/// Log posterior of `f` up to a constant: `2 Re(b^H x) + x^H A x - p (f - mu_f)^2 / 2`
/// with `x = X(f)^H y`.
pub fn objective_g(frame: &Frame, ws: &EstimatorWorkspace<'_>, prior: &CfoPrior, f: f64) -> Result<f64> {
    check_frame(frame, ws.pilot(), Some(ws.rx_antennas()))?;
    let x = matched_statistic(&matched_vectors(frame, ws.pilot()), f);
    Ok(g_from_statistic(&x, ws, prior, f))
}

/// `dg/df`, from the correlation statistics of every lag.
pub fn objective_g_derivative(frame: &Frame, ws: &EstimatorWorkspace<'_>, prior: &CfoPrior, f: f64) -> Result<f64> {
    let stats = general_statistics(frame, ws)?;
    let s: f64 = stats.iter().map(|&(k, c)| k as f64 * (cis(TAU * f * k as f64) * c).im).sum();
    let p = if prior.is_flat() { 0.0 } else { prior.precision() * (f - prior.mean()) };
    Ok(-2.0 * TAU * s - p)
}

/// Exhaustive argmax of [`objective_g`] over `f_min + i step < f_max`.
/// The first maximum wins ties.
pub fn grid_search_oracle(
    frame: &Frame,
    ws: &EstimatorWorkspace<'_>,
    prior: &CfoPrior,
    f_min: f64,
    f_max: f64,
    step: f64,
) -> Result<CfoEstimate> {
    if !(f_min < f_max) || !(step > 0.0) || !f_min.is_finite() || !f_max.is_finite() {
        return Err(invalid(format!("bad grid [{f_min}, {f_max}) step {step}")));
    }
    check_frame(frame, ws.pilot(), Some(ws.rx_antennas()))?;
    let v = matched_vectors(frame, ws.pilot());
    let (mut best_f, mut best_g) = (f_min, f64::NEG_INFINITY);
    let mut i = 0u64;
    loop {
        let f = f_min + i as f64 * step;
        if f >= f_max {
            break;
        }
        let g = g_from_statistic(&matched_statistic(&v, f), ws, prior, f);
        if g > best_g {
            best_g = g;
            best_f = f;
        }
        i += 1;
    }
    let mode = if prior.is_flat() { EstimatorMode::Ml } else { EstimatorMode::Map };
    Ok(CfoEstimate { value: best_f, mode, correlation: None })
}
