//! Structural operations on ownership matrices and their closed-form effect
//! on `(H_I, H_S, M, 𝒳)`.

use crate::dependence::{dependence_index, merger_delta};
use crate::error::{Error, Result};
use crate::indices::{micro_concentration, sum_sq};
use crate::matrix::Matrix;
use crate::ownership::OwnershipMatrix;
use crate::tol::TOL_NORM;

/// `(H_I, H_S, M, 𝒳)` of a matrix; `𝒳` is taken over the active support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexTuple {
    pub h_i: f64,
    pub h_s: f64,
    pub m: f64,
    pub x: f64,
}

/// Closed-form predictions; `None` where no closed form exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedTuple {
    pub h_i: Option<f64>,
    pub h_s: Option<f64>,
    pub m: Option<f64>,
    pub x: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperationDelta {
    pub before: IndexTuple,
    pub after: IndexTuple,
    pub predicted_after: PredictedTuple,
    pub matrix_after: OwnershipMatrix,
    /// Investors removed because nothing of their holdings remained.
    pub dropped_investors: Vec<String>,
}

impl IndexTuple {
    pub fn of(a: &OwnershipMatrix) -> Result<Self> {
        let marg = a.marginals();
        Ok(Self {
            h_i: sum_sq(&marg.p),
            h_s: sum_sq(&marg.s),
            m: micro_concentration(a),
            x: dependence_index(&a.restrict_active())?.x,
        })
    }
}

impl OperationDelta {
    /// Largest gap between prediction and recomputation over predicted fields.
    pub fn max_prediction_error(&self) -> f64 {
        let p = &self.predicted_after;
        let a = &self.after;
        [(p.h_i, a.h_i), (p.h_s, a.h_s), (p.m, a.m), (p.x, a.x)]
            .iter()
            .filter_map(|(p, a)| p.map(|p| (p - a).abs()))
            .fold(0.0, f64::max)
    }
}

fn check_investor(a: &OwnershipMatrix, i: usize) -> Result<()> {
    if i >= a.n() {
        return Err(Error::IndexOutOfRange {
            what: "investors",
            index: i,
            len: a.n(),
        });
    }
    Ok(())
}

/// Sums rows `a` and `b` into one investor labelled `"<a>+<b>"`, placed at
/// the smaller of the two positions.
pub fn merge_investors(a: &OwnershipMatrix, ia: usize, ib: usize) -> Result<OperationDelta> {
    check_investor(a, ia)?;
    check_investor(a, ib)?;
    if ia == ib {
        return Err(Error::SameInvestor(ia));
    }
    let marg = a.marginals();
    for i in [ia, ib] {
        if marg.p[i] <= 0.0 {
            return Err(Error::InactiveSupport(format!(
                "investor {:?} holds nothing",
                a.investor_labels()[i]
            )));
        }
    }
    let e = a.entries();
    let (keep, gone) = (ia.min(ib), ia.max(ib));
    let mut rows = Vec::with_capacity(a.n() - 1);
    let mut labels = Vec::with_capacity(a.n() - 1);
    for i in 0..a.n() {
        if i == gone {
            continue;
        }
        if i == keep {
            rows.push(
                e.row(ia)
                    .iter()
                    .zip(e.row(ib))
                    .map(|(x, y)| x + y)
                    .collect::<Vec<_>>(),
            );
            labels.push(format!(
                "{}+{}",
                a.investor_labels()[ia],
                a.investor_labels()[ib]
            ));
        } else {
            rows.push(e.row(i).to_vec());
            labels.push(a.investor_labels()[i].clone());
        }
    }
    let after_matrix =
        OwnershipMatrix::new(Matrix::from_rows(&rows)?, labels, a.stock_labels().to_vec())?;

    let before = IndexTuple::of(a)?;
    let active = a.restrict_active();
    let pos = |i: usize| marg.p[..i].iter().filter(|&&x| x > 0.0).count();
    let dx = merger_delta(&active, pos(ia), pos(ib))?;
    let cross: f64 = e.row(ia).iter().zip(e.row(ib)).map(|(x, y)| x * y).sum();
    let predicted_after = PredictedTuple {
        h_i: Some(before.h_i + 2.0 * marg.p[ia] * marg.p[ib]),
        h_s: Some(before.h_s),
        m: Some(before.m + 2.0 * cross),
        x: Some(before.x - dx),
    };
    Ok(OperationDelta {
        before,
        after: IndexTuple::of(&after_matrix)?,
        predicted_after,
        matrix_after: after_matrix,
        dropped_investors: Vec::new(),
    })
}

/// Deletes stock `j0` and renormalizes by `w = 1 − s_{j0}`; investors left
/// with no holdings are dropped.
pub fn remove_stock(a: &OwnershipMatrix, j0: usize) -> Result<OperationDelta> {
    if j0 >= a.m() {
        return Err(Error::IndexOutOfRange {
            what: "stocks",
            index: j0,
            len: a.m(),
        });
    }
    let marg = a.marginals();
    if marg.s[j0] >= 1.0 - TOL_NORM {
        return Err(Error::RemovingEverything(j0));
    }
    let w = 1.0 - marg.s[j0];
    let e = a.entries();
    let col = e.column(j0);
    let remaining: Vec<f64> = marg.p.iter().zip(&col).map(|(p, c)| (p - c) / w).collect();

    let keep_cols: Vec<usize> = (0..a.m()).filter(|&j| j != j0).collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = Vec::new();
    for i in 0..a.n() {
        // Investors that held nothing to begin with stay; only those wiped out go.
        if marg.p[i] > 0.0 && remaining[i] < TOL_NORM {
            dropped.push(a.investor_labels()[i].clone());
            continue;
        }
        rows.push(keep_cols.iter().map(|&j| e[(i, j)]).collect::<Vec<_>>());
        labels.push(a.investor_labels()[i].clone());
    }
    let stock_labels = keep_cols
        .iter()
        .map(|&j| a.stock_labels()[j].clone())
        .collect();
    let after_matrix =
        OwnershipMatrix::normalize(&Matrix::from_rows(&rows)?, labels, stock_labels)?;

    let before = IndexTuple::of(a)?;
    let col_sq: f64 = col.iter().map(|x| x * x).sum();
    let predicted_after = PredictedTuple {
        h_i: Some(sum_sq(&remaining)),
        h_s: Some((before.h_s - marg.s[j0] * marg.s[j0]) / (w * w)),
        m: Some((before.m - col_sq) / (w * w)),
        x: None,
    };
    Ok(OperationDelta {
        before,
        after: IndexTuple::of(&after_matrix)?,
        predicted_after,
        matrix_after: after_matrix,
        dropped_investors: dropped,
    })
}

/// Scales `A` by `1 − λ` and appends an investor of mass `λ` holding the
/// market portfolio `s`.
pub fn dilute(a: &OwnershipMatrix, lambda: f64) -> Result<OperationDelta> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::OutOfRange(format!(
            "dilution weight {lambda} must lie in (0, 1)"
        )));
    }
    let marg = a.require_active()?;
    let (n, m) = (a.n(), a.m());
    let e = a.entries();
    let entries = Matrix::from_fn(n + 1, m, |i, j| {
        if i < n {
            (1.0 - lambda) * e[(i, j)]
        } else {
            lambda * marg.s[j]
        }
    });
    let base = format!("MARKET({lambda})");
    let mut label = base.clone();
    let mut k = 2;
    while a.investor_index(&label).is_some() {
        label = format!("{base}#{k}");
        k += 1;
    }
    let mut labels = a.investor_labels().to_vec();
    labels.push(label);
    let after_matrix = OwnershipMatrix::new(entries, labels, a.stock_labels().to_vec())?;

    let before = IndexTuple::of(a)?;
    let keep = 1.0 - lambda;
    let predicted_after = PredictedTuple {
        h_i: Some(keep * keep * before.h_i + lambda * lambda),
        h_s: Some(before.h_s),
        m: Some(keep * keep * before.m + lambda * lambda * before.h_s),
        x: Some(keep * before.x),
    };
    Ok(OperationDelta {
        before,
        after: IndexTuple::of(&after_matrix)?,
        predicted_after,
        matrix_after: after_matrix,
        dropped_investors: Vec::new(),
    })
}

/// Member `A(t) = [[t, ½−t], [½−t, t]]` of a family with fixed uniform
/// marginals but varying concentration and dependence.
#[derive(Debug, Clone, PartialEq)]
pub struct NonIdentified {
    pub matrix: OwnershipMatrix,
    /// `¼ + 4(t − ¼)²`
    pub m_formula: f64,
    /// `16(t − ¼)²`
    pub x_formula: f64,
}

pub fn nonid_family(t: f64) -> Result<NonIdentified> {
    if !(0.0..=0.5).contains(&t) {
        return Err(Error::OutOfRange(format!("t = {t} must lie in [0, 0.5]")));
    }
    let entries = Matrix::from_rows(&[[t, 0.5 - t], [0.5 - t, t]])?;
    let matrix = OwnershipMatrix::new(
        entries,
        vec!["I1".into(), "I2".into()],
        vec!["S1".into(), "S2".into()],
    )?;
    let d = t - 0.25;
    Ok(NonIdentified {
        matrix,
        m_formula: 0.25 + 4.0 * d * d,
        x_formula: 16.0 * d * d,
    })
}
