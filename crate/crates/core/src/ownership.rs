//! The normalized ownership matrix, its marginals and profiles.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::tol::TOL_NORM;

/// Nonnegative `n × m` matrix of wealth shares summing to one, with
/// investor (row) and stock (column) labels.
#[derive(Debug, Clone, PartialEq)]
pub struct OwnershipMatrix {
    entries: Matrix,
    investor_labels: Vec<String>,
    stock_labels: Vec<String>,
}

/// Investor-size vector `p` and stock-size vector `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    pub p: Vec<f64>,
    pub s: Vec<f64>,
}

/// Row profiles `q_ij = A_ij / p_i` and column profiles `r_ij = A_ij / s_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profiles {
    pub row_profiles: Matrix,
    pub col_profiles: Matrix,
}

fn default_labels(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

fn check_labels(labels: &[String], expected: usize, what: &str) -> Result<()> {
    if labels.len() != expected {
        return Err(Error::DimensionMismatch(format!(
            "{} {what} labels for {expected} {what}s",
            labels.len()
        )));
    }
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

fn check_entries(entries: &Matrix) -> Result<()> {
    if entries.rows() == 0 || entries.cols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    for (i, j, x) in entries.iter() {
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
    Ok(())
}

impl OwnershipMatrix {
    /// Divides a raw holdings matrix by its total.
    pub fn normalize(
        raw: &Matrix,
        investor_labels: Vec<String>,
        stock_labels: Vec<String>,
    ) -> Result<Self> {
        check_entries(raw)?;
        check_labels(&investor_labels, raw.rows(), "investor")?;
        check_labels(&stock_labels, raw.cols(), "stock")?;
        let total = raw.sum();
        if total <= 0.0 {
            return Err(Error::AllZeroMatrix);
        }
        Ok(Self {
            entries: raw.scale(1.0 / total),
            investor_labels,
            stock_labels,
        })
    }

    /// Normalizes with generated labels `I1..In`, `S1..Sm`.
    pub fn from_raw(raw: &Matrix) -> Result<Self> {
        Self::normalize(
            raw,
            default_labels("I", raw.rows()),
            default_labels("S", raw.cols()),
        )
    }

    /// Convenience wrapper over [`OwnershipMatrix::from_raw`] for nested rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::from_raw(&Matrix::from_rows(rows)?)
    }

    /// Wraps an already-normalized matrix without rescaling it.
    pub fn new(
        entries: Matrix,
        investor_labels: Vec<String>,
        stock_labels: Vec<String>,
    ) -> Result<Self> {
        check_entries(&entries)?;
        check_labels(&investor_labels, entries.rows(), "investor")?;
        check_labels(&stock_labels, entries.cols(), "stock")?;
        let total = entries.sum();
        if (total - 1.0).abs() > TOL_NORM {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self {
            entries,
            investor_labels,
            stock_labels,
        })
    }

    /// Rank-one proportional benchmark `p sᵀ`.
    pub fn proportional(marg: &Marginals) -> Result<Self> {
        Self::new(
            Matrix::outer(&marg.p, &marg.s),
            default_labels("I", marg.p.len()),
            default_labels("S", marg.s.len()),
        )
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.entries.cols()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn investor_labels(&self) -> &[String] {
        &self.investor_labels
    }

    pub fn stock_labels(&self) -> &[String] {
        &self.stock_labels
    }

    pub fn marginals(&self) -> Marginals {
        Marginals {
            p: self.entries.row_sums(),
            s: self.entries.col_sums(),
        }
    }

    /// True when every row and column carries positive mass.
    pub fn is_active(&self) -> bool {
        let Marginals { p, s } = self.marginals();
        p.iter().chain(&s).all(|&x| x > 0.0)
    }

    /// Fails with `InactiveSupport` unless every row and column is active.
    pub fn require_active(&self) -> Result<Marginals> {
        let marg = self.marginals();
        if let Some(i) = marg.p.iter().position(|&x| x <= 0.0) {
            return Err(Error::InactiveSupport(format!(
                "investor {:?} holds nothing",
                self.investor_labels[i]
            )));
        }
        if let Some(j) = marg.s.iter().position(|&x| x <= 0.0) {
            return Err(Error::InactiveSupport(format!(
                "stock {:?} is held by nobody",
                self.stock_labels[j]
            )));
        }
        Ok(marg)
    }

    pub fn profiles(&self) -> Result<Profiles> {
        let Marginals { p, s } = self.require_active()?;
        let a = &self.entries;
        Ok(Profiles {
            row_profiles: Matrix::from_fn(self.n(), self.m(), |i, j| a[(i, j)] / p[i]),
            col_profiles: Matrix::from_fn(self.n(), self.m(), |i, j| a[(i, j)] / s[j]),
        })
    }

    /// Drops zero rows and zero columns together with their labels.
    pub fn restrict_active(&self) -> Self {
        let Marginals { p, s } = self.marginals();
        let rows: Vec<usize> = (0..self.n()).filter(|&i| p[i] > 0.0).collect();
        let cols: Vec<usize> = (0..self.m()).filter(|&j| s[j] > 0.0).collect();
        let entries = Matrix::from_fn(rows.len(), cols.len(), |a, b| {
            self.entries[(rows[a], cols[b])]
        });
        Self {
            entries,
            investor_labels: rows
                .iter()
                .map(|&i| self.investor_labels[i].clone())
                .collect(),
            stock_labels: cols.iter().map(|&j| self.stock_labels[j].clone()).collect(),
        }
    }

    pub fn investor_index(&self, label: &str) -> Option<usize> {
        self.investor_labels.iter().position(|l| l == label)
    }

    pub fn stock_index(&self, label: &str) -> Option<usize> {
        self.stock_labels.iter().position(|l| l == label)
    }
}

impl Marginals {
    /// Validates `p` and `s` as probability vectors of equal total mass.
    pub fn new(p: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        check_probability(&p, "investor marginal")?;
        check_probability(&s, "stock marginal")?;
        Ok(Self { p, s })
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn m(&self) -> usize {
        self.s.len()
    }
}

/// Checks nonnegativity, finiteness and unit mass within [`TOL_NORM`].
pub fn check_probability(w: &[f64], what: &str) -> Result<()> {
    if w.is_empty() {
        return Err(Error::NotAProbabilityVector(format!("{what} is empty")));
    }
    if let Some(k) = w.iter().position(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::NotAProbabilityVector(format!(
            "{what} has invalid entry {} at {k}",
            w[k]
        )));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > TOL_NORM {
        return Err(Error::NotAProbabilityVector(format!(
            "{what} sums to {total}"
        )));
    }
    Ok(())
}
