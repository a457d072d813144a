//! Small dense complex linear-algebra helpers on top of `nalgebra`.

#[allow(unused_imports)]
use num_traits::Float;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const TAU: f64 = core::f64::consts::TAU;

/// `exp(j x)`.
#[inline]
pub fn cis(x: f64) -> Complex64 {
    let (s, c) = x.sin_cos();
    Complex64::new(c, s)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |M - M^H|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// `(M + M^H) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest deviation of `m` from `scale * I`.
pub fn identity_deviation(m: &CMatrix, scale: f64) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut d = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j && i < n { scale } else { 0.0 };
            d = d.max((m[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    d
}

/// Factor a Hermitian PSD matrix as `L L^H` through its eigendecomposition,
/// which also covers singular (e.g. zero) covariances.
pub fn psd_factor(cov: &CMatrix, tol: f64) -> Result<CMatrix> {
    let dim = cov.nrows();
    if dim == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(cov).symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(Error::NotPositiveSemidefinite(min));
    }
    let mut factor = eig.eigenvectors;
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        for i in 0..dim {
            factor[(i, j)] *= s;
        }
    }
    Ok(factor)
}

/// Block-diagonal `I_{blocks} (x) m`.
pub fn block_diag(m: &CMatrix, blocks: usize) -> CMatrix {
    let (r, c) = m.shape();
    let mut out = CMatrix::zeros(r * blocks, c * blocks);
    for b in 0..blocks {
        out.view_mut((b * r, b * c), (r, c)).copy_from(m);
    }
    out
}

#[cfg(test)]
pub(crate) fn real_vec(v: &DVector<f64>) -> CVector {
    v.map(|x| Complex64::new(x, 0.0))
}
