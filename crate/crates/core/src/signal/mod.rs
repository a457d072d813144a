//! Domain types, pilot construction, prior sampling and frame synthesis.
//!
//! Channel vectors are stored receive-antenna major:
//! `h = [h(1,1), .., h(1,l_t), h(2,1), ..]`, so index `r * l_t + t` holds the
//! gain from transmit antenna `t` to receive antenna `r` (both zero based).

mod pilot;
mod synth;

pub use pilot::{make_combined_pilot, make_periodic_pilot, make_td_pilot, zadoff_chu};
pub use synth::{
    complex_gaussian, sample_cfo, sample_cfo_with, sample_channel, sample_channel_with,
    synthesize_frame, synthesize_frame_with,
};

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{dimension, invalid, Error, Result};
use crate::linalg::{hermitian_deviation, identity_deviation, max_abs, psd_factor, CMatrix, CVector, Complex64};

/// Antenna counts and pilot length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MimoConfig {
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub symbols: usize,
}

impl MimoConfig {
    pub fn new(tx_antennas: usize, rx_antennas: usize, symbols: usize) -> Result<Self> {
        if tx_antennas == 0 || rx_antennas == 0 || symbols == 0 {
            return Err(invalid(format!(
                "antenna counts and pilot length must be positive (l_t={tx_antennas}, l_r={rx_antennas}, n={symbols})"
            )));
        }
        Ok(Self { tx_antennas, rx_antennas, symbols })
    }

    /// Length of the stacked channel vector, `l_r * l_t`.
    pub fn channel_len(&self) -> usize {
        self.tx_antennas * self.rx_antennas
    }

    /// `m = n / l_t` for structured pilots.
    pub fn repeats(&self) -> Result<usize> {
        if !self.symbols.is_multiple_of(self.tx_antennas) {
            return Err(invalid(format!(
                "pilot length n={} is not a multiple of l_t={}",
                self.symbols, self.tx_antennas
            )));
        }
        Ok(self.symbols / self.tx_antennas)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PilotLayout {
    Periodic,
    TimeDivision,
    Combined,
    Custom,
}

impl PilotLayout {
    pub fn name(self) -> &'static str {
        match self {
            PilotLayout::Periodic => "periodic",
            PilotLayout::TimeDivision => "td",
            PilotLayout::Combined => "combined",
            PilotLayout::Custom => "custom",
        }
    }
}

/// The `n x l_t` transmit pilot `S` together with how it was built.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotMatrix {
    entries: CMatrix,
    power: f64,
    layout: PilotLayout,
    scrambling: Option<Vec<Complex64>>,
    mixing: Option<CMatrix>,
}

pub(crate) const UNIT_MODULUS_TOL: f64 = 1e-12;
pub(crate) const UNITARY_TOL: f64 = 1e-10;
pub(crate) const ORTHOGONAL_TOL: f64 = 1e-10;

impl PilotMatrix {
    pub(crate) fn from_parts(
        entries: CMatrix,
        layout: PilotLayout,
        scrambling: Option<Vec<Complex64>>,
        mixing: Option<CMatrix>,
    ) -> Self {
        let n = entries.nrows().max(1) as f64;
        let power = entries.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        Self { entries, power, layout, scrambling, mixing }
    }

    /// Wrap an arbitrary pilot matrix (rows are symbol times, columns transmit antennas).
    pub fn custom(entries: CMatrix) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(dimension("pilot must have at least one row and one column"));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("pilot entries must be finite"));
        }
        Ok(Self::from_parts(entries, PilotLayout::Custom, None, None))
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// `s[t,k]` with zero-based symbol `k` and antenna `t`.
    #[inline]
    pub fn symbol(&self, k: usize, t: usize) -> Complex64 {
        self.entries[(k, t)]
    }

    pub fn symbols(&self) -> usize {
        self.entries.nrows()
    }

    pub fn tx_antennas(&self) -> usize {
        self.entries.ncols()
    }

    /// Average power per symbol, `tr(S^H S) / n`.
    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn layout(&self) -> PilotLayout {
        self.layout
    }

    pub fn scrambling(&self) -> Option<&[Complex64]> {
        self.scrambling.as_deref()
    }

    pub fn mixing(&self) -> Option<&CMatrix> {
        self.mixing.as_ref()
    }

    /// `S^H S`.
    pub fn gram(&self) -> CMatrix {
        self.entries.adjoint() * &self.entries
    }

    /// Row inner product `sum_t s[t,k1] conj(s[t,k2])`.
    pub fn row_product(&self, k1: usize, k2: usize) -> Complex64 {
        (0..self.tx_antennas())
            .map(|t| self.entries[(k1, t)] * self.entries[(k2, t)].conj())
            .sum()
    }

    /// Per-antenna energy `n rho / l_t`.
    pub fn antenna_energy(&self) -> f64 {
        self.symbols() as f64 * self.power / self.tx_antennas() as f64
    }

    /// Largest deviation of `S^H S` from `(n rho / l_t) I`.
    pub fn orthogonality_deviation(&self) -> f64 {
        identity_deviation(&self.gram(), self.antenna_energy())
    }

    /// Whether `S^H S = (n rho / l_t) I` within a tolerance relative to the antenna energy.
    pub fn is_orthogonal(&self) -> bool {
        self.orthogonality_deviation() <= ORTHOGONAL_TOL * self.antenna_energy().max(1.0)
    }

    pub(crate) fn require_orthogonal(&self) -> Result<()> {
        if self.is_orthogonal() {
            Ok(())
        } else {
            Err(Error::NonOrthogonalPilot(self.orthogonality_deviation()))
        }
    }

    /// Scrambling code, all ones when none was given.
    pub(crate) fn code(&self, k: usize) -> Complex64 {
        self.scrambling.as_ref().map_or(Complex64::new(1.0, 0.0), |c| c[k])
    }
}

/// Gaussian prior `CN(mu_h, Sigma_h)` on the stacked channel vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPrior {
    mean: CVector,
    covariance: CMatrix,
    iid_variance: Option<f64>,
    factor: CMatrix,
}

const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

impl ChannelPrior {
    /// Zero mean, `Sigma_h = sigma_h^2 I`.
    pub fn iid(rx_antennas: usize, tx_antennas: usize, variance: f64) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(invalid(format!("channel variance must be finite and >= 0, got {variance}")));
        }
        let dim = rx_antennas * tx_antennas;
        if dim == 0 {
            return Err(dimension("channel prior needs at least one antenna pair"));
        }
        let covariance = CMatrix::identity(dim, dim).scale(variance);
        let factor = CMatrix::identity(dim, dim).scale(variance.sqrt());
        Ok(Self { mean: CVector::zeros(dim), covariance, iid_variance: Some(variance), factor })
    }

    /// General mean and Hermitian PSD covariance.
    pub fn new(mean: CVector, covariance: CMatrix) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || covariance.shape() != (dim, dim) {
            return Err(dimension(format!(
                "channel mean has length {dim} but covariance is {}x{}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        let scale = max_abs(&covariance).max(1.0);
        let dev = hermitian_deviation(&covariance);
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        let factor = psd_factor(&covariance, PSD_TOL * scale)?;
        Ok(Self { mean, covariance, iid_variance: None, factor })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &CVector {
        &self.mean
    }

    pub fn covariance(&self) -> &CMatrix {
        &self.covariance
    }

    pub fn iid_variance(&self) -> Option<f64> {
        self.iid_variance
    }

    pub fn is_zero_mean(&self) -> bool {
        self.mean.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }

    /// `L` with `L L^H = Sigma_h`.
    pub fn factor(&self) -> &CMatrix {
        &self.factor
    }
}

/// Gaussian prior `N(mu_f, 1/precision)` on the normalized CFO.
///
/// Precision zero is the flat prior; estimators then reduce to ML while the
/// mean is still used as the derotation center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfoPrior {
    mean: f64,
    precision: f64,
}

impl CfoPrior {
    /// From mean and variance; an infinite variance gives the flat prior.
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if variance.is_infinite() && variance > 0.0 {
            return Self::with_precision(mean, 0.0);
        }
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::DegeneratePrior);
        }
        Self::with_precision(mean, 1.0 / variance)
    }

    pub fn with_precision(mean: f64, precision: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(invalid("CFO prior mean must be finite"));
        }
        if !(precision >= 0.0) || !precision.is_finite() {
            return Err(invalid(format!("CFO prior precision must be finite and >= 0, got {precision}")));
        }
        Ok(Self { mean, precision })
    }

    pub fn flat(mean: f64) -> Self {
        Self { mean, precision: 0.0 }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn precision(&self) -> f64 {
        self.precision
    }

    pub fn variance(&self) -> f64 {
        if self.precision == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.precision
        }
    }

    pub fn is_flat(&self) -> bool {
        self.precision == 0.0
    }

    pub(crate) fn centered(&self) -> Self {
        Self { mean: 0.0, precision: self.precision }
    }
}

/// One channel draw `h`, ordered like [`ChannelPrior::mean`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub coefficients: CVector,
}

impl ChannelRealization {
    pub fn new(coefficients: CVector) -> Result<Self> {
        if coefficients.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("channel coefficients must be finite"));
        }
        Ok(Self { coefficients })
    }

    /// `h[r,t]`.
    pub fn gain(&self, r: usize, t: usize, tx_antennas: usize) -> Complex64 {
        self.coefficients[r * tx_antennas + t]
    }
}

/// Received block `y`, `n x l_r` (column `r` is receive antenna `r`).
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    samples: CMatrix,
    config: MimoConfig,
}

impl Frame {
    pub fn new(samples: CMatrix, config: MimoConfig) -> Result<Self> {
        if samples.shape() != (config.symbols, config.rx_antennas) {
            return Err(dimension(format!(
                "frame is {}x{} but the configuration expects {}x{}",
                samples.nrows(),
                samples.ncols(),
                config.symbols,
                config.rx_antennas
            )));
        }
        Ok(Self { samples, config })
    }

    pub fn samples(&self) -> &CMatrix {
        &self.samples
    }

    pub fn config(&self) -> &MimoConfig {
        &self.config
    }

    pub fn symbols(&self) -> usize {
        self.config.symbols
    }

    pub fn rx_antennas(&self) -> usize {
        self.config.rx_antennas
    }

    /// `y[r,k]` with zero-based indices.
    #[inline]
    pub fn sample(&self, k: usize, r: usize) -> Complex64 {
        self.samples[(k, r)]
    }

    pub fn into_samples(self) -> CMatrix {
        self.samples
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mimo_config_validation() {
        assert!(MimoConfig::new(0, 1, 4).is_err());
        let cfg = MimoConfig::new(2, 3, 6).unwrap();
        assert_eq!(cfg.channel_len(), 6);
        assert_eq!(cfg.repeats().unwrap(), 3);
        assert!(MimoConfig::new(4, 1, 6).unwrap().repeats().is_err());
    }

    #[test]
    fn cfo_prior_constructors() {
        let p = CfoPrior::new(0.01, 1e-5).unwrap();
        assert!((p.precision() - 1e5).abs() < 1e-6);
        assert!(CfoPrior::new(0.0, f64::INFINITY).unwrap().is_flat());
        assert!(CfoPrior::new(0.0, 0.0).is_err());
        assert!(CfoPrior::with_precision(0.0, -1.0).is_err());
        assert_eq!(CfoPrior::flat(0.2).variance(), f64::INFINITY);
    }

    #[test]
    fn channel_prior_validation() {
        let iid = ChannelPrior::iid(2, 2, 0.5).unwrap();
        assert_eq!(iid.iid_variance(), Some(0.5));
        assert!(identity_deviation(iid.covariance(), 0.5) == 0.0);
        let mut cov = CMatrix::identity(2, 2);
        cov[(0, 1)] = Complex64::new(0.5, 0.1);
        assert!(matches!(ChannelPrior::new(CVector::zeros(2), cov.clone()), Err(Error::NotHermitian(_))));
        cov[(1, 0)] = Complex64::new(0.5, -0.1);
        assert!(ChannelPrior::new(CVector::zeros(2), cov.clone()).is_ok());
        cov[(0, 1)] = Complex64::new(2.0, 0.0);
        cov[(1, 0)] = Complex64::new(2.0, 0.0);
        assert!(matches!(ChannelPrior::new(CVector::zeros(2), cov), Err(Error::NotPositiveSemidefinite(_))));
        assert!(ChannelPrior::new(CVector::zeros(3), CMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn frame_shape_checked() {
        let cfg = MimoConfig::new(2, 2, 4).unwrap();
        assert!(Frame::new(CMatrix::zeros(4, 2), cfg).is_ok());
        assert!(Frame::new(CMatrix::zeros(2, 4), cfg).is_err());
    }
}
