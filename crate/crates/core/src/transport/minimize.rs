//! Minimum-concentration member of `𝒯(p, s)` by dual block ascent.
//!
//! The minimizer has the additive-threshold form
//! `A_ij = max{0, (λ_i + μ_j)/2}`. Holding `μ` fixed, each `λ_i` solves a
//! monotone piecewise-linear equation exactly (and symmetrically for `μ`),
//! so alternating the two blocks is coordinate ascent on the concave dual.
//! Once the positive support stops changing, the equality system on that
//! support is solved directly and accepted if it meets the KKT tolerance.

use super::{active_indices, embed, marginal_residual, SolutionKind, TransportSolution};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ownership::Marginals;
use crate::tol::TOL_KKT;

/// Unique minimizer of `M` over `𝒯(p, s)`.
pub fn min_micro(marg: &Marginals) -> Result<TransportSolution> {
    min_micro_from(marg, None)
}

/// As [`min_micro`], starting the ascent from the supplied column
/// multipliers `μ` (active columns only are used).
pub fn min_micro_from(marg: &Marginals, init_mu: Option<&[f64]>) -> Result<TransportSolution> {
    let (n, m) = (marg.n(), marg.m());
    let rows = active_indices(&marg.p);
    let cols = active_indices(&marg.s);
    let p: Vec<f64> = rows.iter().map(|&i| marg.p[i]).collect();
    let s: Vec<f64> = cols.iter().map(|&j| marg.s[j]).collect();
    let mu0: Vec<f64> = match init_mu {
        Some(mu) if mu.len() == m => cols.iter().map(|&j| mu[j]).collect(),
        Some(mu) => {
            return Err(Error::DimensionMismatch(format!(
                "{} initial multipliers for {m} stocks",
                mu.len()
            )))
        }
        None => vec![0.0; s.len()],
    };

    let (lambda, mu) = solve_dual(&p, &s, mu0)?;
    let small = primal(&lambda, &mu);
    let matrix = embed(&small, &rows, &cols, n, m);

    // Inactive lines get multipliers that keep every cell at zero.
    let mu_max = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lambda_max = lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut lambda_full = vec![-mu_max; n];
    let mut mu_full = vec![-lambda_max; m];
    for (a, &i) in rows.iter().enumerate() {
        lambda_full[i] = lambda[a];
    }
    for (b, &j) in cols.iter().enumerate() {
        mu_full[j] = mu[b];
    }

    Ok(TransportSolution {
        objective: matrix.frobenius_sq(),
        matrix,
        kind: SolutionKind::Minimum,
        certified: true,
        multipliers: Some((lambda_full, mu_full)),
    })
}

fn primal(lambda: &[f64], mu: &[f64]) -> Matrix {
    Matrix::from_fn(lambda.len(), mu.len(), |i, j| {
        (0.5 * (lambda[i] + mu[j])).max(0.0)
    })
}

/// Solves `Σ_k max{0, (x − t_k)/2} = target` for `x`, with `sorted`
/// holding the thresholds `t_k` in ascending order.
fn threshold_root(sorted: &[f64], target: f64) -> f64 {
    let mut prefix = 0.0;
    for k in 0..sorted.len() {
        prefix += sorted[k];
        let x = (2.0 * target + prefix) / (k + 1) as f64;
        if k + 1 == sorted.len() || x <= sorted[k + 1] {
            return x;
        }
    }
    unreachable!("threshold_root called with no thresholds")
}

fn block_update(out: &mut [f64], other: &[f64], targets: &[f64]) {
    let mut sorted: Vec<f64> = other.iter().map(|x| -x).collect();
    sorted.sort_by(f64::total_cmp);
    for (o, &t) in out.iter_mut().zip(targets) {
        *o = threshold_root(&sorted, t);
    }
}

fn support(lambda: &[f64], mu: &[f64]) -> Vec<bool> {
    lambda
        .iter()
        .flat_map(|l| mu.iter().map(move |u| l + u > 0.0))
        .collect()
}

fn solve_dual(p: &[f64], s: &[f64], mut mu: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let (n, m) = (p.len(), s.len());
    let marg = Marginals {
        p: p.to_vec(),
        s: s.to_vec(),
    };
    let mut lambda = vec![0.0; n];
    let cap = 100 * (n + m);
    let mut last_support: Option<Vec<bool>> = None;
    let mut residual = f64::INFINITY;

    for _ in 0..cap {
        block_update(&mut lambda, &mu, p);
        block_update(&mut mu, &lambda, s);

        residual = marginal_residual(&primal(&lambda, &mu), &marg);
        if residual <= TOL_KKT {
            return Ok((lambda, mu));
        }

        let supp = support(&lambda, &mu);
        if last_support.as_ref() == Some(&supp) {
            if let Some((l, u)) = polish(p, s, &lambda, &mu, &supp) {
                let r = marginal_residual(&primal(&l, &u), &marg);
                if r <= TOL_KKT {
                    return Ok((l, u));
                }
            }
        }
        last_support = Some(supp);
    }
    Err(Error::ConvergenceFailure {
        iterations: cap,
        residual,
    })
}

/// Solves the row/column equalities restricted to `supp`, a singular but
/// consistent positive semidefinite system, by conjugate gradients.
fn polish(
    p: &[f64],
    s: &[f64],
    lambda: &[f64],
    mu: &[f64],
    supp: &[bool],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let (n, m) = (p.len(), s.len());
    let apply = |z: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|o| *o = 0.0);
        for i in 0..n {
            for j in 0..m {
                if supp[i * m + j] {
                    let v = z[i] + z[n + j];
                    out[i] += v;
                    out[n + j] += v;
                }
            }
        }
    };
    let rhs: Vec<f64> = p.iter().chain(s).map(|x| 2.0 * x).collect();
    let mut z: Vec<f64> = lambda.iter().chain(mu).copied().collect();
    let mut qz = vec![0.0; n + m];
    apply(&z, &mut qz);
    let mut r: Vec<f64> = rhs.iter().zip(&qz).map(|(b, q)| b - q).collect();
    let mut d = r.clone();
    let mut rr: f64 = r.iter().map(|x| x * x).sum();
    let scale: f64 = rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut qd = vec![0.0; n + m];

    for _ in 0..4 * (n + m) + 20 {
        if rr.sqrt() <= 1e-15 * scale {
            break;
        }
        apply(&d, &mut qd);
        let dqd: f64 = d.iter().zip(&qd).map(|(a, b)| a * b).sum();
        if dqd <= 0.0 {
            break;
        }
        let alpha = rr / dqd;
        for k in 0..n + m {
            z[k] += alpha * d[k];
            r[k] -= alpha * qd[k];
        }
        let rr_new: f64 = r.iter().map(|x| x * x).sum();
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n + m {
            d[k] = r[k] + beta * d[k];
        }
    }
    if z.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let mu = z.split_off(n);
    Some((z, mu))
}
