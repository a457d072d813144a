use alloc::format;
use alloc::vec::Vec;

use super::EstimatorWorkspace;
use crate::error::{dimension, invalid, Error, Result};
use crate::linalg::{CVector, Complex64};
use crate::signal::{Frame, PilotLayout, PilotMatrix};

/// Lags whose magnitude falls below this fraction of the largest are dropped.
pub const LAG_DROP_RATIO: f64 = 1e-12;

/// Lag-domain summary of a frame: `(r_k, theta_k)` pairs such that the complex
/// statistic at lag `k` is `r_k e^{-j theta_k}`.
///
/// A noiseless frame rotating at `f` has `theta_k = 2 pi f k` modulo `2 pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSequence {
    lags: Vec<usize>,
    magnitudes: Vec<f64>,
    phases: Vec<f64>,
    unwrapped: Option<Vec<f64>>,
}

impl CorrelationSequence {
    /// The sequence with no lags, which carries no frequency information.
    pub fn empty() -> Self {
        Self { lags: Vec::new(), magnitudes: Vec::new(), phases: Vec::new(), unwrapped: Some(Vec::new()) }
    }

    /// Builds a sequence from explicit values, wrapping phases into `(-pi, pi]`.
    pub fn new(lags: Vec<usize>, magnitudes: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if lags.len() != magnitudes.len() || lags.len() != phases.len() {
            return Err(dimension("lags, magnitudes and phases must have equal length"));
        }
        if lags.first() == Some(&0) || lags.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("lags must be positive and strictly increasing"));
        }
        if magnitudes.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) || phases.iter().any(|p| !p.is_finite()) {
            return Err(invalid("magnitudes must be finite and >= 0, phases finite"));
        }
        let phases = phases.into_iter().map(wrap_phase).collect();
        Ok(Self { lags, magnitudes, phases, unwrapped: None })
    }

    /// From complex statistics, one per lag. Near-silent lags are dropped.
    pub fn from_statistics(stats: &[(usize, Complex64)]) -> Result<Self> {
        let max = stats.iter().fold(0.0f64, |m, (_, c)| m.max(c.norm()));
        if !max.is_finite() {
            return Err(invalid("correlation statistic is not finite"));
        }
        let mut seq = Self { lags: Vec::new(), magnitudes: Vec::new(), phases: Vec::new(), unwrapped: None };
        for &(k, c) in stats {
            let r = c.norm();
            if max > 0.0 && r >= LAG_DROP_RATIO * max {
                seq.lags.push(k);
                seq.magnitudes.push(r);
                seq.phases.push(wrap_phase(-c.arg()));
            }
        }
        if seq.lags.is_empty() {
            return Err(Error::NoFrequencyInformation);
        }
        Ok(seq)
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn unwrapped(&self) -> Option<&[f64]> {
        self.unwrapped.as_deref()
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    /// Lag `k` multiplied back into complex form, `r_k e^{-j theta_k}`.
    pub fn statistic(&self, i: usize) -> Complex64 {
        Complex64::from_polar(self.magnitudes[i], -self.phases[i])
    }

    pub(crate) fn with_unwrapped(mut self, unwrapped: Vec<f64>) -> Self {
        debug_assert_eq!(unwrapped.len(), self.lags.len());
        self.unwrapped = Some(unwrapped);
        self
    }
}

/// Maps into `(-pi, pi]`.
pub(crate) fn wrap_phase(x: f64) -> f64 {
    use core::f64::consts::PI;
    let mut w = x % crate::linalg::TAU;
    if w > PI {
        w -= crate::linalg::TAU;
    } else if w <= -PI {
        w += crate::linalg::TAU;
    }
    w
}

pub(crate) fn check_frame(frame: &Frame, pilot: &PilotMatrix, rx: Option<usize>) -> Result<()> {
    if frame.symbols() != pilot.symbols() {
        return Err(dimension(format!("frame has {} symbols, pilot has {}", frame.symbols(), pilot.symbols())));
    }
    if frame.config().tx_antennas != pilot.tx_antennas() {
        return Err(dimension("frame and pilot disagree on l_t"));
    }
    if let Some(lr) = rx {
        if frame.rx_antennas() != lr {
            return Err(dimension(format!("frame has {} receive antennas, workspace {lr}", frame.rx_antennas())));
        }
    }
    Ok(())
}

/// `v(k)[r l_t + t] = conj(s[k,t]) y[k,r]`, one vector per symbol.
pub(crate) fn matched_vectors(frame: &Frame, pilot: &PilotMatrix) -> Vec<CVector> {
    let (lt, lr) = (pilot.tx_antennas(), frame.rx_antennas());
    (0..frame.symbols())
        .map(|k| CVector::from_fn(lr * lt, |i, _| pilot.symbol(k, i % lt).conj() * frame.sample(k, i / lt)))
        .collect()
}

/// Complex statistic for every lag `1..n`, without dropping.
pub(crate) fn general_statistics(frame: &Frame, ws: &EstimatorWorkspace<'_>) -> Result<Vec<(usize, Complex64)>> {
    check_frame(frame, ws.pilot(), Some(ws.rx_antennas()))?;
    let n = frame.symbols();
    let v = matched_vectors(frame, ws.pilot());
    let w: Vec<CVector> = v.iter().map(|vk| ws.a() * vk).collect();
    let b = ws.b();
    let has_mean = b.iter().any(|z| *z != Complex64::new(0.0, 0.0));
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for k in 1..n {
        // u(k1) = conj(v(k1)), so u^T w is v^H w.
        let mut c: Complex64 = (k..n).map(|k1| v[k1].dotc(&w[k1 - k])).sum();
        if has_mean {
            c += v[k].dotc(b);
        }
        out.push((k, c));
    }
    Ok(out)
}

pub fn correlation_general(frame: &Frame, ws: &EstimatorWorkspace<'_>) -> Result<CorrelationSequence> {
    CorrelationSequence::from_statistics(&general_statistics(frame, ws)?)
}

fn check_iid(pilot: &PilotMatrix, var: f64, layout: PilotLayout) -> Result<f64> {
    if pilot.layout() != layout {
        return Err(Error::WrongLayout(layout.name()));
    }
    if !(var >= 0.0) || !var.is_finite() {
        return Err(invalid("channel variance must be finite and >= 0"));
    }
    pilot.require_orthogonal()?;
    Ok(var / (1.0 + pilot.antenna_energy() * var))
}

/// `sum_r conj(y[k1,r]) y[k2,r]`.
fn sample_product(frame: &Frame, k1: usize, k2: usize) -> Complex64 {
    (0..frame.rx_antennas()).map(|r| frame.sample(k1, r).conj() * frame.sample(k2, r)).sum()
}

/// Reduced correlation for a periodic pilot and zero-mean i.i.d. channel, at
/// lags `i l_t` for `i = 1..m`.
pub fn correlation_periodic(frame: &Frame, pilot: &PilotMatrix, variance: f64) -> Result<CorrelationSequence> {
    let alpha = check_iid(pilot, variance, PilotLayout::Periodic)?;
    check_frame(frame, pilot, None)?;
    let (lt, n) = (pilot.tx_antennas(), pilot.symbols());
    let m = n / lt;
    if m < 2 {
        return Err(Error::NoFrequencyInformation);
    }
    let scale = alpha * pilot.power();
    let stats: Vec<(usize, Complex64)> = (1..m)
        .map(|i| {
            let k = i * lt;
            let mut c = Complex64::new(0.0, 0.0);
            for i1 in i..m {
                for i2 in 0..lt {
                    let k1 = i1 * lt + i2;
                    let k2 = k1 - k;
                    c += pilot.code(k1) * pilot.code(k2).conj() * sample_product(frame, k1, k2);
                }
            }
            (k, c * scale)
        })
        .collect();
    CorrelationSequence::from_statistics(&stats)
}

/// Reduced correlation for a time-division pilot and zero-mean i.i.d. channel,
/// at lags `1..m`.
pub fn correlation_td(frame: &Frame, pilot: &PilotMatrix, variance: f64) -> Result<CorrelationSequence> {
    let alpha = check_iid(pilot, variance, PilotLayout::TimeDivision)?;
    check_frame(frame, pilot, None)?;
    let (lt, n) = (pilot.tx_antennas(), pilot.symbols());
    let m = n / lt;
    if m < 2 {
        return Err(Error::NoFrequencyInformation);
    }
    let scale = alpha * pilot.power();
    let stats: Vec<(usize, Complex64)> = (1..m)
        .map(|k| {
            let mut c = Complex64::new(0.0, 0.0);
            for block in 0..lt {
                for i1 in k..m {
                    let k1 = block * m + i1;
                    let k2 = k1 - k;
                    c += pilot.code(k1) * pilot.code(k2).conj() * sample_product(frame, k1, k2);
                }
            }
            (k, c * scale)
        })
        .collect();
    CorrelationSequence::from_statistics(&stats)
}
