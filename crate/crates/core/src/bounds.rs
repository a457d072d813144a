//! Fisher information `beta` of the CFO and the resulting (Bayesian) CRLBs.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{dimension, invalid, Result};
use crate::estimators::{build_workspace, ChannelMode};
use crate::linalg::{CMatrix, Complex64};
use crate::signal::{CfoPrior, ChannelPrior, PilotLayout, PilotMatrix};

/// Configuration snapshot a bound was evaluated for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub symbols: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub power: f64,
    /// `Some` for i.i.d. channel priors.
    pub channel_variance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub beta: f64,
    /// `1 / (beta + sigma_f^{-2})`.
    pub bcrlb: f64,
    /// `1 / beta`, infinite when `beta = 0`.
    pub crlb: f64,
    pub cfo_precision: f64,
    pub pilot_kind: Option<PilotLayout>,
    pub inputs: Option<BoundInputs>,
}

impl BoundResult {
    /// Records which pilot and channel the bound belongs to.
    pub fn with_context(mut self, pilot: &PilotMatrix, rx_antennas: usize, channel_variance: Option<f64>) -> Self {
        self.pilot_kind = Some(pilot.layout());
        self.inputs = Some(BoundInputs {
            symbols: pilot.symbols(),
            tx_antennas: pilot.tx_antennas(),
            rx_antennas,
            power: pilot.power(),
            channel_variance,
        });
        self
    }
}

fn reciprocal(x: f64) -> f64 {
    if x == 0.0 {
        f64::INFINITY
    } else {
        1.0 / x
    }
}

pub fn make_bounds(beta: f64, prior: &CfoPrior) -> Result<BoundResult> {
    if !(beta >= 0.0) || beta.is_infinite() {
        return Err(invalid(format!("beta must be finite and >= 0, got {beta}")));
    }
    Ok(BoundResult {
        beta,
        bcrlb: reciprocal(beta + prior.precision()),
        crlb: reciprocal(beta),
        cfo_precision: prior.precision(),
        pilot_kind: None,
        inputs: None,
    })
}

/// `beta` for an arbitrary Gaussian channel prior and an orthogonal pilot.
///
/// With `Pi_k = I (x) conj(s_k) s_k^T` and `K = Sigma_h + mu_h mu_h^H`, the lag-`k`
/// expectation of the correlation statistic is
/// `mu^H Pi_k b + sum_{k1 - k2 = k} tr(A Pi_k2 K Pi_k1)`.
pub fn beta_general(pilot: &PilotMatrix, prior: &ChannelPrior) -> Result<f64> {
    pilot.require_orthogonal()?;
    let ws = build_workspace(pilot, prior, ChannelMode::Mmse)?;
    let (n, lt, lr) = (pilot.symbols(), pilot.tx_antennas(), ws.rx_antennas());
    let dim = lr * lt;
    let mu = prior.mean();
    let k_mat = prior.covariance() + mu * mu.adjoint();
    let projectors: Vec<CMatrix> = (0..n)
        .map(|k| {
            CMatrix::from_fn(dim, dim, |i, j| {
                if i / lt == j / lt {
                    pilot.symbol(k, i % lt).conj() * pilot.symbol(k, j % lt)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    let has_mean = !prior.is_zero_mean();
    let mut expected = alloc::vec![Complex64::new(0.0, 0.0); n];
    for k2 in 0..n {
        let x = ws.a() * &projectors[k2] * &k_mat;
        for k1 in (k2 + 1)..n {
            // tr(X Pi_k1) without forming the product.
            let tr: Complex64 = x.iter().zip(projectors[k1].transpose().iter()).map(|(a, b)| a * b).sum();
            expected[k1 - k2] += tr;
        }
    }
    if has_mean {
        for (k, e) in expected.iter_mut().enumerate().skip(1) {
            *e += mu.dotc(&(&projectors[k] * ws.b()));
        }
    }
    let sum: f64 = expected.iter().enumerate().skip(1).map(|(k, e)| (k * k) as f64 * e.re).sum();
    Ok(8.0 * PI * PI * sum)
}

/// `beta` for a zero-mean i.i.d. `CN(0, sigma_h^2)` channel.
pub fn beta_iid(pilot: &PilotMatrix, channel_variance: f64, rx_antennas: usize) -> Result<f64> {
    pilot.require_orthogonal()?;
    if !(channel_variance >= 0.0) || !channel_variance.is_finite() {
        return Err(invalid("channel variance must be finite and >= 0"));
    }
    let n = pilot.symbols();
    let alpha = channel_variance / (1.0 + pilot.antenna_energy() * channel_variance);
    let mut sum = 0.0;
    for k in 1..n {
        let inner: f64 = (k..n).map(|k1| pilot.row_product(k1, k1 - k).norm_sqr()).sum();
        sum += (k * k) as f64 * inner;
    }
    Ok(8.0 * PI * PI * rx_antennas as f64 * alpha * channel_variance * sum)
}

fn check_structured(n: usize, lt: usize, rho: f64, var: f64) -> Result<f64> {
    if lt == 0 || n == 0 || !n.is_multiple_of(lt) {
        return Err(dimension(format!("n = {n} is not a positive multiple of l_t = {lt}")));
    }
    if !(rho >= 0.0) || !(var >= 0.0) || !rho.is_finite() || !var.is_finite() {
        return Err(invalid("power and channel variance must be finite and >= 0"));
    }
    Ok(n as f64 * rho * var / lt as f64)
}

/// Closed form of [`beta_iid`] for the periodic pilot.
pub fn beta_periodic_closed(n: usize, lt: usize, lr: usize, rho: f64, channel_variance: f64) -> Result<f64> {
    let x = check_structured(n, lt, rho, channel_variance)?;
    let (nf, ltf) = (n as f64, lt as f64);
    Ok(2.0 / 3.0 * PI * PI * lr as f64 * ltf * x * x / (x + 1.0) * (nf * nf - ltf * ltf))
}

/// Closed form for the time-division pilot, `l_t^2` times smaller than periodic.
pub fn beta_td_closed(n: usize, lt: usize, lr: usize, rho: f64, channel_variance: f64) -> Result<f64> {
    let ltf = lt as f64;
    Ok(beta_periodic_closed(n, lt, lr, rho, channel_variance)? / (ltf * ltf))
}
