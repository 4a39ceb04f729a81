use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::matrix::{compensated_sum, Matrix};
use crate::tol::{TOL_FORMS, TOL_NORM};

const TOL_ETA: f64 = 1e-10;

/// Long/short book normalized by gross exposure: `A = A⁺ − A⁻` with
/// `Σ (A⁺ + A⁻) = 1` and no cell both long and short.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedOwnership {
    plus: Matrix,
    minus: Matrix,
    investor_labels: Vec<String>,
    stock_labels: Vec<String>,
}

impl SignedOwnership {
    /// Normalizes raw long and short exposures by their gross total.
    pub fn from_raw(
        long: &Matrix,
        short: &Matrix,
        investor_labels: Vec<String>,
        stock_labels: Vec<String>,
    ) -> Result<Self> {
        if long.shape() != short.shape() {
            return Err(Error::DimensionMismatch(format!(
                "long book {:?} and short book {:?}",
                long.shape(),
                short.shape()
            )));
        }
        if long.rows() == 0 || long.cols() == 0 {
            return Err(Error::EmptyMatrix);
        }
        for (what, labels, k) in [
            ("investor", &investor_labels, long.rows()),
            ("stock", &stock_labels, long.cols()),
        ] {
            if labels.len() != k {
                return Err(Error::DimensionMismatch(format!(
                    "{} {what} labels for {k} {what}s",
                    labels.len()
                )));
            }
            let mut seen = HashSet::new();
            if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
                return Err(Error::DuplicateLabel(dup.clone()));
            }
        }
        for book in [long, short] {
            for (i, j, x) in book.iter() {
                if !x.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if x < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: x,
                    });
                }
            }
        }
        if let Some((i, j, _)) = long
            .iter()
            .find(|&(i, j, x)| x > 0.0 && short[(i, j)] > 0.0)
        {
            return Err(Error::LongAndShort(i, j));
        }
        let gross = long.sum() + short.sum();
        if gross <= 0.0 {
            return Err(Error::AllZeroMatrix);
        }
        Ok(Self {
            plus: long.scale(1.0 / gross),
            minus: short.scale(1.0 / gross),
            investor_labels,
            stock_labels,
        })
    }

    /// Splits a signed exposure matrix into its long and short parts.
    pub fn from_signed(
        raw: &Matrix,
        investor_labels: Vec<String>,
        stock_labels: Vec<String>,
    ) -> Result<Self> {
        let long = Matrix::from_fn(raw.rows(), raw.cols(), |i, j| raw[(i, j)].max(0.0));
        let short = Matrix::from_fn(raw.rows(), raw.cols(), |i, j| (-raw[(i, j)]).max(0.0));
        Self::from_raw(&long, &short, investor_labels, stock_labels)
    }

    pub fn plus(&self) -> &Matrix {
        &self.plus
    }

    pub fn minus(&self) -> &Matrix {
        &self.minus
    }

    pub fn investor_labels(&self) -> &[String] {
        &self.investor_labels
    }

    pub fn stock_labels(&self) -> &[String] {
        &self.stock_labels
    }

    /// Net matrix `A⁺ − A⁻`.
    pub fn net(&self) -> Matrix {
        self.plus.sub(&self.minus)
    }

    fn gross(&self) -> Matrix {
        Matrix::from_fn(self.plus.rows(), self.plus.cols(), |i, j| {
            self.plus[(i, j)] + self.minus[(i, j)]
        })
    }

    pub fn gross_marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let g = self.gross();
        (g.row_sums(), g.col_sums())
    }

    pub fn net_marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let a = self.net();
        (a.row_sums(), a.col_sums())
    }

    /// Aggregate net exposure `η`.
    pub fn eta(&self) -> f64 {
        self.net().sum()
    }

    /// Rank-one net benchmark `B = η⁻¹ pⁿ (sⁿ)ᵀ`.
    pub fn net_benchmark(&self) -> Result<Matrix> {
        let eta = self.eta();
        if eta.abs() < TOL_ETA {
            return Err(Error::MarketNeutral(eta));
        }
        let (pn, sn) = self.net_marginals();
        Ok(Matrix::outer(&pn, &sn).scale(1.0 / eta))
    }
}

/// `Σ_ij (A_ij − B_ij)² / (p^g_i s^g_j)`, cross-checked against the
/// Frobenius norm of the gross-whitened deviation.
pub fn signed_dependence(book: &SignedOwnership) -> Result<f64> {
    let b = book.net_benchmark()?;
    let a = book.net();
    let (pg, sg) = book.gross_marginals();
    if let Some(i) = pg.iter().position(|&x| x <= 0.0) {
        return Err(Error::InactiveGrossSupport(format!(
            "investor {:?} has no gross exposure",
            book.investor_labels[i]
        )));
    }
    if let Some(j) = sg.iter().position(|&x| x <= 0.0) {
        return Err(Error::InactiveGrossSupport(format!(
            "stock {:?} has no gross exposure",
            book.stock_labels[j]
        )));
    }
    debug_assert!((pg.iter().sum::<f64>() - 1.0).abs() <= TOL_NORM);

    let sum_form = compensated_sum(a.iter().map(|(i, j, x)| {
        let d = x - b[(i, j)];
        d * d / (pg[i] * sg[j])
    }));
    let dev = a.sub(&b);
    let whitened = Matrix::from_fn(a.rows(), a.cols(), |i, j| {
        dev[(i, j)] / (pg[i].sqrt() * sg[j].sqrt())
    });
    let frob_form = whitened.frobenius_sq();
    if (sum_form - frob_form).abs() > TOL_FORMS * sum_form.max(1.0) {
        return Err(Error::Inconsistent(format!(
            "signed dependence forms disagree: {sum_form} vs {frob_form}"
        )));
    }
    Ok(sum_form)
}
