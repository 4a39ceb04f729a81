//! Linearized transmission through the residual operator `L`.
//!
//! Liquidation shocks `δ` act through `Lᵀ` on stock prices, and centered
//! stock returns act through `L` on benchmark-relative investor returns.
//! `ρ(A)` bounds both in the worst case; `𝒳(A)` is the isotropic average.

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::ownership::OwnershipMatrix;
use crate::spectral::{whiten, SpectralResidual};
use crate::tol::{TOL_CENTER, TOL_JACOBI};

const TOL_IDENTITY: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FireSaleResult {
    /// Market-wide component `(Σ p_i δ_i) 1`.
    pub delta_parallel: Vec<f64>,
    /// Idiosyncratic component with zero `p`-weighted mean.
    pub delta_perp: Vec<f64>,
    /// Sell pressure `F = Aᵀ δ`.
    pub pressure: Vec<f64>,
    /// Relative price impact `ΔP = F / s`.
    pub impact: Vec<f64>,
    /// `‖ΔP‖²_{D_s}`
    pub severity: f64,
    /// `‖δ_∥‖²_{D_p}`
    pub parallel_term: f64,
    /// `‖Lᵀ D_p^{1/2} δ_⊥‖²`
    pub perp_term: f64,
    /// `parallel_term + ρ² ‖δ_⊥‖²_{D_p}`
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveVarianceResult {
    /// Benchmark-relative active returns.
    pub alpha: Vec<f64>,
    /// `V(α) = Σ p_i α_i²`
    pub variance: f64,
    /// `ρ² Σ s_j R_j²`
    pub worst_case_bound: f64,
}

fn check_len(v: &[f64], len: usize, what: &str) -> Result<()> {
    if v.len() != len {
        return Err(Error::DimensionMismatch(format!(
            "{what} has length {}, expected {len}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::OutOfRange(format!("{what} has non-finite entries")));
    }
    Ok(())
}

fn weighted_sq(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(w, x)| w * x * x).sum()
}

pub fn fire_sale(a: &OwnershipMatrix, delta: &[f64]) -> Result<FireSaleResult> {
    let sr = whiten(a)?;
    fire_sale_with(a, &sr, delta)
}

/// As [`fire_sale`] with a precomputed whitening of `a`.
pub fn fire_sale_with(
    a: &OwnershipMatrix,
    sr: &SpectralResidual,
    delta: &[f64],
) -> Result<FireSaleResult> {
    let marg = a.require_active()?;
    check_len(delta, a.n(), "liquidation vector")?;
    let (p, s) = (&marg.p, &marg.s);

    let mean = dot(p, delta);
    let delta_parallel = vec![mean; a.n()];
    let delta_perp: Vec<f64> = delta.iter().map(|d| d - mean).collect();

    let pressure = a.entries().tr_mul_vec(delta);
    let impact: Vec<f64> = pressure.iter().zip(s).map(|(f, s)| f / s).collect();
    let severity = weighted_sq(s, &impact);

    let parallel_term = weighted_sq(p, &delta_parallel);
    let y_perp: Vec<f64> = delta_perp.iter().zip(&sr.u).map(|(d, u)| d * u).collect();
    let perp_term = sr.l.tr_mul_vec(&y_perp).iter().map(|x| x * x).sum::<f64>();
    let bound = parallel_term + sr.rho * sr.rho * weighted_sq(p, &delta_perp);

    let split = parallel_term + perp_term;
    if (severity - split).abs() > TOL_IDENTITY * severity.max(1.0) {
        return Err(Error::Inconsistent(format!(
            "severity {severity} differs from its decomposition {split}"
        )));
    }
    Ok(FireSaleResult {
        delta_parallel,
        delta_perp,
        pressure,
        impact,
        severity,
        parallel_term,
        perp_term,
        bound,
    })
}

/// Centered shock of unit `D_p`-norm with the largest severity, built from
/// the leading left singular vector of `L`. Its severity equals `ρ²`.
pub fn worst_case_shock(a: &OwnershipMatrix) -> Result<FireSaleResult> {
    let sr = whiten(a)?;
    let n = a.n();
    let mut delta: Vec<f64> = if sr.overlap.sigma.first().is_some_and(|&s| s > TOL_JACOBI) {
        (0..n).map(|i| sr.overlap.u[(i, 0)] / sr.u[i]).collect()
    } else {
        vec![0.0; n]
    };
    // remove round-off drift along the constant direction
    let p: Vec<f64> = sr.u.iter().map(|u| u * u).collect();
    let mean = dot(&p, &delta);
    delta.iter_mut().for_each(|d| *d -= mean);
    fire_sale_with(a, &sr, &delta)
}

/// Benchmark-relative active returns for a vector of excess stock returns.
///
/// With `project` set, `R` is first shifted so that `sᵀR = 0`.
pub fn active_variance(
    a: &OwnershipMatrix,
    returns: &[f64],
    project: bool,
) -> Result<ActiveVarianceResult> {
    let marg = a.require_active()?;
    check_len(returns, a.m(), "return vector")?;
    let (p, s) = (&marg.p, &marg.s);

    let mut r = returns.to_vec();
    if project {
        let c = dot(s, &r);
        r.iter_mut().for_each(|x| *x -= c);
    }
    let drift = dot(s, &r);
    if drift.abs() > TOL_CENTER {
        return Err(Error::NotCentered(drift));
    }

    let e = a.entries();
    let alpha: Vec<f64> = (0..a.n())
        .map(|i| (0..a.m()).map(|j| (e[(i, j)] / p[i] - s[j]) * r[j]).sum())
        .collect();
    let variance = weighted_sq(p, &alpha);

    let sr = whiten(a)?;
    let r_tilde: Vec<f64> = r.iter().zip(&sr.v).map(|(x, v)| x * v).collect();
    let lr = sr.l.mul_vec(&r_tilde);
    let operator_variance: f64 = lr.iter().map(|x| x * x).sum();
    let alpha_gap = lr
        .iter()
        .zip(&sr.u)
        .zip(&alpha)
        .map(|((y, u), al)| (y / u - al).abs())
        .fold(0.0, f64::max);
    let scale = variance.max(1.0);
    if alpha_gap > TOL_IDENTITY * scale.sqrt()
        || (operator_variance - variance).abs() > TOL_IDENTITY * scale
    {
        return Err(Error::Inconsistent(format!(
            "active returns disagree across forms (gap {alpha_gap:e})"
        )));
    }
    Ok(ActiveVarianceResult {
        alpha,
        variance,
        worst_case_bound: sr.rho * sr.rho * weighted_sq(s, &r),
    })
}

/// `E[V(α)] = Tr(L Σ Lᵀ)` for a covariance `Σ` of whitened returns with `Σ v = 0`.
pub fn expected_active_variance(a: &OwnershipMatrix, cov: &Matrix) -> Result<f64> {
    let sr = whiten(a)?;
    expected_with(&sr, cov)
}

fn expected_with(sr: &SpectralResidual, cov: &Matrix) -> Result<f64> {
    let m = sr.v.len();
    if cov.shape() != (m, m) {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {}x{}, expected {m}x{m}",
            cov.rows(),
            cov.cols()
        )));
    }
    let leak = cov
        .mul_vec(&sr.v)
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    let scale = cov
        .as_slice()
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    if leak > TOL_IDENTITY * scale.max(1.0) {
        return Err(Error::NotCentered(leak));
    }
    // Tr(L Σ Lᵀ) = Σ_i ℓ_iᵀ Σ ℓ_i over rows ℓ_i of L
    Ok((0..sr.l.rows())
        .map(|i| dot(sr.l.row(i), &cov.mul_vec(sr.l.row(i))))
        .sum())
}

/// `σ² 𝒳(A)`: expected active variance under isotropic centered dispersion.
pub fn isotropic_capacity(a: &OwnershipMatrix, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "dispersion {sigma} must be >= 0"
        )));
    }
    let x = crate::dependence::dependence_index(a)?.x;
    let capacity = sigma * sigma * x;

    let sr = whiten(a)?;
    let m = a.m();
    let var = sigma * sigma;
    let cov = Matrix::from_fn(m, m, |j, k| {
        let id = if j == k { 1.0 } else { 0.0 };
        var * (id - sr.v[j] * sr.v[k])
    });
    let trace = expected_with(&sr, &cov)?;
    if (trace - capacity).abs() > TOL_IDENTITY * capacity.max(1.0) {
        return Err(Error::Inconsistent(format!(
            "trace identity gives {trace}, expected {capacity}"
        )));
    }
    Ok(capacity)
}
