#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{CfoPrior, ChannelPrior, ChannelRealization, Frame, MimoConfig, PilotMatrix};
use crate::error::{dimension, invalid, Error, Result};
use crate::linalg::{cis, CMatrix, CVector, Complex64, TAU};
use crate::rng::Seed;

/// One `CN(0, variance)` draw: real and imaginary parts each `N(0, variance / 2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// `h = mu_h + L z` with `L L^H = Sigma_h`.
pub fn sample_channel_with<R: Rng + ?Sized>(prior: &ChannelPrior, rng: &mut R) -> ChannelRealization {
    let dim = prior.dim();
    let z = CVector::from_fn(dim, |_, _| complex_gaussian(rng, 1.0));
    ChannelRealization { coefficients: prior.mean() + prior.factor() * z }
}

pub fn sample_channel(prior: &ChannelPrior, seed: Seed) -> ChannelRealization {
    sample_channel_with(prior, &mut seed.rng())
}

pub fn sample_cfo_with<R: Rng + ?Sized>(prior: &CfoPrior, rng: &mut R) -> Result<f64> {
    if prior.is_flat() {
        return Err(Error::FlatPrior);
    }
    let z: f64 = StandardNormal.sample(rng);
    Ok(prior.mean() + prior.variance().sqrt() * z)
}

pub fn sample_cfo(prior: &CfoPrior, seed: Seed) -> Result<f64> {
    sample_cfo_with(prior, &mut seed.rng())
}

/// Received block under the rotation model with `CN(0, noise_scale^2)` noise.
pub fn synthesize_frame_with<R: Rng + ?Sized>(
    pilot: &PilotMatrix,
    channel: &ChannelRealization,
    f_delta: f64,
    noise_scale: f64,
    rng: &mut R,
) -> Result<Frame> {
    let (n, lt) = (pilot.symbols(), pilot.tx_antennas());
    let len = channel.coefficients.len();
    if len == 0 || !len.is_multiple_of(lt) {
        return Err(dimension(format!("channel of length {len} does not split over l_t = {lt}")));
    }
    if !(noise_scale >= 0.0) || !noise_scale.is_finite() || !f_delta.is_finite() {
        return Err(invalid("noise scale must be finite and >= 0 and the CFO finite"));
    }
    let lr = len / lt;
    let cfg = MimoConfig::new(lt, lr, n)?;
    let variance = noise_scale * noise_scale;
    let mut samples = CMatrix::zeros(n, lr);
    for k in 0..n {
        let rot = cis(TAU * f_delta * k as f64);
        for r in 0..lr {
            let clean: Complex64 = (0..lt).map(|t| pilot.symbol(k, t) * channel.gain(r, t, lt)).sum();
            samples[(k, r)] = rot * clean;
        }
    }
    if variance > 0.0 {
        // Noise is drawn after the deterministic part, column by column.
        for r in 0..lr {
            for k in 0..n {
                samples[(k, r)] += complex_gaussian(rng, variance);
            }
        }
    }
    Frame::new(samples, cfg)
}

pub fn synthesize_frame(
    pilot: &PilotMatrix,
    channel: &ChannelRealization,
    f_delta: f64,
    noise_scale: f64,
    seed: Seed,
) -> Result<Frame> {
    synthesize_frame_with(pilot, channel, f_delta, noise_scale, &mut seed.rng())
}
