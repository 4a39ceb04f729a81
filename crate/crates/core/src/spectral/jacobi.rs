//! One-sided (Hestenes) Jacobi SVD for small dense matrices.

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::tol::TOL_JACOBI;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(σ) Vᵀ` with `σ` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows × r` left singular vectors as columns.
    pub u: Matrix,
    pub sigma: Vec<f64>,
    /// `cols × r` right singular vectors as columns.
    pub v: Matrix,
}

/// Computes the thin SVD of `a`, `r = min(rows, cols)`.
///
/// Rotations act on the columns of whichever of `a`, `aᵀ` is tall, in a fixed
/// cyclic order. Signs are fixed so the largest-magnitude entry of each left
/// vector is positive.
pub fn svd(a: &Matrix) -> Result<Svd> {
    if a.rows() >= a.cols() {
        tall_svd(a)
    } else {
        let t = tall_svd(&a.transpose())?;
        let mut out = Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
        fix_signs(&mut out);
        Ok(out)
    }
}

fn tall_svd(a: &Matrix) -> Result<Svd> {
    let (rows, cols) = a.shape();
    let mut w: Vec<Vec<f64>> = (0..cols).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..cols).map(|k| if j == k { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut converged = cols < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..cols - 1 {
            for q in p + 1..cols {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= TOL_JACOBI * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::ConvergenceFailure {
            iterations: MAX_SWEEPS,
            residual: f64::NAN,
        });
    }

    let mut order: Vec<(f64, usize)> = w
        .iter()
        .enumerate()
        .map(|(j, c)| (dot(c, c).sqrt(), j))
        .collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

    let mut u = Matrix::zeros(rows, cols);
    let mut vm = Matrix::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    for (k, &(sv, j)) in order.iter().enumerate() {
        sigma.push(sv);
        if sv > 0.0 {
            for i in 0..rows {
                u[(i, k)] = w[j][i] / sv;
            }
        }
        for i in 0..cols {
            vm[(i, k)] = v[j][i];
        }
    }
    let mut out = Svd { u, sigma, v: vm };
    fix_signs(&mut out);
    Ok(out)
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

fn fix_signs(svd: &mut Svd) {
    for k in 0..svd.sigma.len() {
        let lead = (0..svd.u.rows())
            .map(|i| svd.u[(i, k)])
            .fold(
                0.0f64,
                |best, x| if x.abs() > best.abs() { x } else { best },
            );
        if lead < 0.0 {
            for i in 0..svd.u.rows() {
                svd.u[(i, k)] = -svd.u[(i, k)];
            }
            for i in 0..svd.v.rows() {
                svd.v[(i, k)] = -svd.v[(i, k)];
            }
        }
    }
}
