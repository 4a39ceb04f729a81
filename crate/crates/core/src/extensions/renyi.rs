use crate::error::{Error, Result};
use crate::matrix::accurate_sum_sq;
use crate::ownership::OwnershipMatrix;

/// Largest supported order; beyond it the power sums are dominated by the
/// largest share.
pub const MAX_ALPHA: f64 = 20.0;

/// Order-`α` concentrations `C_α = Σ w^α` and effective numbers
/// `C_α^{1/(1−α)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiSummary {
    pub alpha: f64,
    pub h_i: f64,
    pub h_s: f64,
    pub m: f64,
    pub n_i: f64,
    pub n_s: f64,
    pub n_m: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= MAX_ALPHA) {
        return Err(Error::OutOfRange(format!(
            "Renyi order {alpha} must lie in (0, {MAX_ALPHA}]"
        )));
    }
    if (alpha - 1.0).abs() < 1e-6 {
        return Err(Error::AlphaNearOne(alpha));
    }
    Ok(())
}

pub fn renyi_concentration(w: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(power_sum(w.iter().copied(), alpha))
}

fn power_sum(w: impl Iterator<Item = f64>, alpha: f64) -> f64 {
    if alpha == 2.0 {
        accurate_sum_sq(w)
    } else {
        w.filter(|&x| x > 0.0).map(|x| x.powf(alpha)).sum()
    }
}

pub fn renyi_summary(a: &OwnershipMatrix, alpha: f64) -> Result<RenyiSummary> {
    check_alpha(alpha)?;
    let marg = a.marginals();
    let h_i = power_sum(marg.p.iter().copied(), alpha);
    let h_s = power_sum(marg.s.iter().copied(), alpha);
    let m = power_sum(a.entries().as_slice().iter().copied(), alpha);
    let e = 1.0 / (1.0 - alpha);
    Ok(RenyiSummary {
        alpha,
        h_i,
        h_s,
        m,
        n_i: h_i.powf(e),
        n_s: h_s.powf(e),
        n_m: m.powf(e),
    })
}
