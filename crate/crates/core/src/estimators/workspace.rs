use alloc::format;

use crate::error::{dimension, Error, Result};
use crate::linalg::{block_diag, hermitian_part, CMatrix, CVector, Complex64};
use crate::signal::{ChannelPrior, PilotMatrix};

/// How the channel prior enters the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelMode {
    /// Use the Gaussian prior (MMSE channel, MAP objective).
    Mmse,
    /// Ignore the prior, as if `Sigma_h^{-1} = 0`: least squares with `b = 0`.
    LeastSquares,
}

/// Precomputed `A = (S^H S (x) I + Sigma_h^{-1})^{-1}` and `b = (I - A G) mu_h`
/// for one pilot and channel prior.
///
/// `A` is evaluated as `(I + Sigma_h G)^{-1} Sigma_h`, which needs no inverse of
/// `Sigma_h` and stays valid for singular covariances.
#[derive(Debug, Clone)]
pub struct EstimatorWorkspace<'a> {
    pilot: &'a PilotMatrix,
    prior: &'a ChannelPrior,
    mode: ChannelMode,
    a: CMatrix,
    b: CVector,
    rx_antennas: usize,
}

impl<'a> EstimatorWorkspace<'a> {
    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CVector {
        &self.b
    }

    pub fn pilot(&self) -> &'a PilotMatrix {
        self.pilot
    }

    pub fn prior(&self) -> &'a ChannelPrior {
        self.prior
    }

    pub fn mode(&self) -> ChannelMode {
        self.mode
    }

    pub fn rx_antennas(&self) -> usize {
        self.rx_antennas
    }

    pub fn tx_antennas(&self) -> usize {
        self.pilot.tx_antennas()
    }

    pub fn symbols(&self) -> usize {
        self.pilot.symbols()
    }

}

pub fn build_workspace<'a>(
    pilot: &'a PilotMatrix,
    prior: &'a ChannelPrior,
    mode: ChannelMode,
) -> Result<EstimatorWorkspace<'a>> {
    let lt = pilot.tx_antennas();
    let dim = prior.dim();
    if dim == 0 || !dim.is_multiple_of(lt) {
        return Err(dimension(format!("channel prior of dimension {dim} does not split over l_t = {lt}")));
    }
    let lr = dim / lt;
    let gram = pilot.gram();
    let (a, b) = match mode {
        ChannelMode::LeastSquares => {
            let inv = gram_inverse(&gram)?;
            (block_diag(&inv, lr), CVector::zeros(dim))
        }
        ChannelMode::Mmse => mmse_terms(pilot, prior, &gram, lr),
    };
    Ok(EstimatorWorkspace { pilot, prior, mode, a, b, rx_antennas: lr })
}

fn gram_inverse(gram: &CMatrix) -> Result<CMatrix> {
    let eig = gram.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min <= 1e-12 * max {
        return Err(Error::SingularPilot);
    }
    let inv_diag = CVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&l| Complex64::new(1.0 / l, 0.0)));
    let v = &eig.eigenvectors;
    Ok(hermitian_part(&(v * CMatrix::from_diagonal(&inv_diag) * v.adjoint())))
}

fn mmse_terms(pilot: &PilotMatrix, prior: &ChannelPrior, gram: &CMatrix, lr: usize) -> (CMatrix, CVector) {
    let dim = prior.dim();
    let sigma = prior.covariance();
    let mu = prior.mean();
    let orthogonal = pilot.is_orthogonal();
    let energy = pilot.antenna_energy();

    let a = match (orthogonal, prior.iid_variance()) {
        (true, Some(var)) => CMatrix::identity(dim, dim).scale(var / (1.0 + energy * var)),
        _ => {
            let g = if orthogonal {
                CMatrix::identity(dim, dim).scale(energy)
            } else {
                block_diag(gram, lr)
            };
            // I + Sigma G has nonnegative real spectrum, so it is invertible.
            let m = CMatrix::identity(dim, dim) + sigma * &g;
            let a = m.lu().solve(sigma).expect("I + Sigma G is nonsingular for PSD Sigma and G");
            hermitian_part(&a)
        }
    };

    let b = if prior.is_zero_mean() {
        CVector::zeros(dim)
    } else {
        let g_mu = if orthogonal { mu.scale(energy) } else { block_diag(gram, lr) * mu };
        mu - &a * g_mu
    };
    (a, b)
}
