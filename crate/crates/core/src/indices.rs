//! Herfindahl marginals, raw micro concentration and its exact decompositions.

use crate::error::Result;
use crate::matrix::accurate_sum_sq;
use crate::ownership::{check_probability, OwnershipMatrix};

/// Marginal and cell-level concentration with effective counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationSummary {
    pub h_i: f64,
    pub h_s: f64,
    pub m: f64,
    pub n_i: f64,
    pub n_s: f64,
    pub n_m: f64,
}

/// Row-side and column-side decomposition of `M(A)`.
///
/// Vectors are indexed over active rows/columns only.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroDecomposition {
    /// `p_i² c_i`
    pub investor_terms: Vec<f64>,
    /// `s_j² d_j`
    pub stock_terms: Vec<f64>,
    /// Within-portfolio concentration `c_i = Σ_j q_ij²`.
    pub c: Vec<f64>,
    /// Within-owner concentration `d_j = Σ_i r_ij²`.
    pub d: Vec<f64>,
    /// Row support sizes.
    pub k: Vec<usize>,
    /// Column support sizes.
    pub l: Vec<usize>,
}

/// Lower (row-side, column-side) and upper support bounds on `M(A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportBounds {
    pub lower_row: f64,
    pub lower_col: f64,
    pub upper: f64,
}

/// Sum of squares of a probability vector.
pub fn herfindahl(w: &[f64]) -> Result<f64> {
    check_probability(w, "weight vector")?;
    Ok(sum_sq(w))
}

pub(crate) fn sum_sq(w: &[f64]) -> f64 {
    accurate_sum_sq(w.iter().copied())
}

/// `M(A) = Σ A_ij² = ‖A‖_F²`.
pub fn micro_concentration(a: &OwnershipMatrix) -> f64 {
    accurate_sum_sq(a.entries().as_slice().iter().copied())
}

pub fn summary(a: &OwnershipMatrix) -> ConcentrationSummary {
    let marg = a.marginals();
    let h_i = sum_sq(&marg.p);
    let h_s = sum_sq(&marg.s);
    let m = micro_concentration(a);
    ConcentrationSummary {
        h_i,
        h_s,
        m,
        n_i: 1.0 / h_i,
        n_s: 1.0 / h_s,
        n_m: 1.0 / m,
    }
}

/// Computes `c_i`, `d_j` and the support sizes directly from profiles.
pub fn micro_decomposition(a: &OwnershipMatrix) -> Result<MicroDecomposition> {
    let marg = a.require_active()?;
    let entries = a.entries();
    let (n, m) = entries.shape();

    let mut c = vec![0.0; n];
    let mut k = vec![0usize; n];
    let mut d = vec![0.0; m];
    let mut l = vec![0usize; m];
    for (i, j, x) in entries.iter() {
        if x > 0.0 {
            let q = x / marg.p[i];
            let r = x / marg.s[j];
            c[i] += q * q;
            d[j] += r * r;
            k[i] += 1;
            l[j] += 1;
        }
    }
    let investor_terms = marg.p.iter().zip(&c).map(|(p, c)| p * p * c).collect();
    let stock_terms = marg.s.iter().zip(&d).map(|(s, d)| s * s * d).collect();
    Ok(MicroDecomposition {
        investor_terms,
        stock_terms,
        c,
        d,
        k,
        l,
    })
}

/// Returns `(Σ p_i²/k_i, Σ s_j²/ℓ_j, min{H_I, H_S})`.
pub fn support_bounds(a: &OwnershipMatrix) -> Result<SupportBounds> {
    let marg = a.require_active()?;
    let dec = micro_decomposition(a)?;
    let lower_row = marg
        .p
        .iter()
        .zip(&dec.k)
        .map(|(p, &k)| p * p / k as f64)
        .sum();
    let lower_col = marg
        .s
        .iter()
        .zip(&dec.l)
        .map(|(s, &l)| s * s / l as f64)
        .sum();
    Ok(SupportBounds {
        lower_row,
        lower_col,
        upper: sum_sq(&marg.p).min(sum_sq(&marg.s)),
    })
}
