//! Whitened ownership matrix `K = D_p^{-1/2} A D_s^{-1/2}` and its
//! nontrivial spectrum.
//!
//! `K` is a contraction whose top singular pair is `(√p, √s)` with value 1.
//! Removing that mode leaves `L = K − u vᵀ`, and `𝒳(A) = ‖L‖_F²` equals the
//! sum of squared nontrivial singular values of `K`.

mod jacobi;

pub use jacobi::{svd, Svd};

use crate::dependence::dependence_index;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ownership::OwnershipMatrix;
use crate::tol::TOL_SIGMA1;

#[derive(Debug, Clone)]
pub struct SpectralResidual {
    /// Whitened matrix.
    pub k: Matrix,
    /// Residual `K − u vᵀ`.
    pub l: Matrix,
    /// `√p`
    pub u: Vec<f64>,
    /// `√s`
    pub v: Vec<f64>,
    /// Singular values of `K`, descending.
    pub sigma: Vec<f64>,
    /// Second singular value of `K` (0 when there is none).
    pub rho: f64,
    /// SVD of `L`; its leading pair is the dominant overlap mode.
    pub overlap: Svd,
}

impl SpectralResidual {
    /// `Σ_{k≥2} σ_k²`.
    pub fn nontrivial_energy(&self) -> f64 {
        self.sigma.iter().skip(1).map(|s| s * s).sum()
    }
}

pub fn whiten(a: &OwnershipMatrix) -> Result<SpectralResidual> {
    let marg = a.require_active()?;
    let u: Vec<f64> = marg.p.iter().map(|x| x.sqrt()).collect();
    let v: Vec<f64> = marg.s.iter().map(|x| x.sqrt()).collect();
    let e = a.entries();
    let k = Matrix::from_fn(a.n(), a.m(), |i, j| e[(i, j)] / (u[i] * v[j]));
    let l = k.sub(&Matrix::outer(&u, &v));

    let sigma = svd(&k)?.sigma;
    if (sigma[0] - 1.0).abs() > TOL_SIGMA1 {
        return Err(Error::Inconsistent(format!(
            "top singular value of the whitened matrix is {}",
            sigma[0]
        )));
    }
    let rho = sigma.get(1).copied().unwrap_or(0.0);
    let overlap = svd(&l)?;
    Ok(SpectralResidual {
        k,
        l,
        u,
        v,
        sigma,
        rho,
        overlap,
    })
}

/// `ρ(A) = σ₂(K)`.
pub fn rho(a: &OwnershipMatrix) -> Result<f64> {
    Ok(whiten(a)?.rho)
}

/// `|𝒳(A) − Σ_{k≥2} σ_k(K)²|`.
pub fn spectral_identity_gap(a: &OwnershipMatrix) -> Result<f64> {
    let x = dependence_index(a)?.x;
    Ok((x - whiten(a)?.nontrivial_energy()).abs())
}
