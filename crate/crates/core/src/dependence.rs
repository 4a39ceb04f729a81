//! Benchmark-adjusted dependence: the Pearson χ² distance between `A` and
//! the proportional benchmark `p sᵀ`, its profile decompositions and the
//! between/within aggregation law for investor partitions.

use crate::error::{Error, Result};
use crate::matrix::{compensated_sum, Matrix};
use crate::ownership::{Marginals, OwnershipMatrix};
use crate::tol::TOL_FORMS;

/// Dependence index with its per-investor and per-stock contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceReport {
    pub x: f64,
    /// `p_i · χ²(q_i ‖ s)`
    pub investor_contrib: Vec<f64>,
    /// `s_j · χ²(r_j ‖ p)`
    pub stock_contrib: Vec<f64>,
}

/// Disjoint investor groups covering every row exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    groups: Vec<Vec<usize>>,
}

/// Result of [`aggregate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation {
    pub between: f64,
    pub within: f64,
    /// `g × m` matrix whose rows are group sums.
    pub merged: OwnershipMatrix,
}

/// `χ²(u ‖ v) = Σ_k (u_k − v_k)² / v_k` over the support of `v`.
pub fn chi2_divergence(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "chi-square between vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    let mut acc = 0.0;
    for (k, (&a, &b)) in u.iter().zip(v).enumerate() {
        if b > 0.0 {
            acc += (a - b) * (a - b) / b;
        } else if a > 0.0 {
            return Err(Error::SupportMismatch(k));
        }
    }
    Ok(acc)
}

struct Forms {
    definitional: f64,
    closed: f64,
    likelihood: f64,
}

fn forms(a: &Matrix, marg: &Marginals, compensated: bool) -> Forms {
    let sum = |it: Box<dyn Iterator<Item = f64> + '_>| {
        if compensated {
            compensated_sum(it)
        } else {
            it.sum()
        }
    };
    let Marginals { p, s } = marg;
    let definitional = sum(Box::new(a.iter().map(|(i, j, x)| {
        let e = p[i] * s[j];
        (x - e) * (x - e) / e
    })));
    let closed = sum(Box::new(a.iter().map(|(i, j, x)| x * x / (p[i] * s[j])))) - 1.0;
    let likelihood = sum(Box::new(a.iter().map(|(i, j, x)| {
        let e = p[i] * s[j];
        let r = x / e;
        e * (r - 1.0) * (r - 1.0)
    })));
    Forms {
        definitional,
        closed,
        likelihood,
    }
}

fn agree(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= TOL_FORMS * scale.max(1.0)
}

/// Computes `𝒳(A)` by its definitional form and cross-checks the closed
/// form, the likelihood-ratio form and both profile decompositions.
pub fn dependence_index(a: &OwnershipMatrix) -> Result<DependenceReport> {
    let marg = a.require_active()?;
    let entries = a.entries();
    let (n, m) = entries.shape();

    let mut f = forms(entries, &marg, false);
    let consistent = |f: &Forms| {
        agree(f.definitional, f.closed, f.definitional)
            && agree(f.definitional, f.likelihood, f.definitional)
    };
    if !consistent(&f) {
        f = forms(entries, &marg, true);
        if !consistent(&f) {
            return Err(Error::Inconsistent(format!(
                "dependence forms disagree: definitional {}, closed {}, likelihood {}",
                f.definitional, f.closed, f.likelihood
            )));
        }
    }

    let investor_contrib: Vec<f64> = (0..n)
        .map(|i| {
            let q: Vec<f64> = entries.row(i).iter().map(|x| x / marg.p[i]).collect();
            chi2_divergence(&q, &marg.s).map(|c| marg.p[i] * c)
        })
        .collect::<Result<_>>()?;
    let stock_contrib: Vec<f64> = (0..m)
        .map(|j| {
            let r: Vec<f64> = entries.column(j).iter().map(|x| x / marg.s[j]).collect();
            chi2_divergence(&r, &marg.p).map(|c| marg.s[j] * c)
        })
        .collect::<Result<_>>()?;

    let x = f.definitional;
    let row_total = compensated_sum(investor_contrib.iter().copied());
    let col_total = compensated_sum(stock_contrib.iter().copied());
    if !agree(row_total, x, x) || !agree(col_total, x, x) {
        return Err(Error::Inconsistent(format!(
            "profile decompositions ({row_total}, {col_total}) disagree with {x}"
        )));
    }
    Ok(DependenceReport {
        x,
        investor_contrib,
        stock_contrib,
    })
}

impl Partition {
    /// Validates that `groups` are nonempty, disjoint and cover `0..n`.
    pub fn new(groups: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut owner = vec![None; n];
        for (g, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::InvalidPartition(format!("group {g} is empty")));
            }
            for &i in group {
                if i >= n {
                    return Err(Error::InvalidPartition(format!(
                        "investor {i} out of range for {n} investors"
                    )));
                }
                if let Some(prev) = owner[i].replace(g) {
                    return Err(Error::InvalidPartition(format!(
                        "investor {i} appears in groups {prev} and {g}"
                    )));
                }
            }
        }
        if let Some(i) = owner.iter().position(Option::is_none) {
            return Err(Error::InvalidPartition(format!(
                "investor {i} is not in any group"
            )));
        }
        Ok(Self { groups })
    }

    /// Every investor in its own group.
    pub fn singletons(n: usize) -> Self {
        Self {
            groups: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Splits `𝒳(A)` into between-group dependence and within-group
/// profile heterogeneity for an investor partition.
pub fn aggregate(a: &OwnershipMatrix, part: &Partition) -> Result<Aggregation> {
    let marg = a.require_active()?;
    let entries = a.entries();
    let (n, m) = entries.shape();
    if part.groups.iter().flatten().count() != n || part.groups.iter().flatten().any(|&i| i >= n) {
        return Err(Error::InvalidPartition(format!(
            "partition does not cover the {n} investors"
        )));
    }
    let s = &marg.s;

    let mut between = 0.0;
    let mut within = 0.0;
    let mut merged = Matrix::zeros(part.len(), m);
    for (g, group) in part.groups.iter().enumerate() {
        let row = merged.row_mut(g);
        for &i in group {
            for (o, x) in row.iter_mut().zip(entries.row(i)) {
                *o += x;
            }
        }
        let mass: f64 = group.iter().map(|&i| marg.p[i]).sum();
        let mean: Vec<f64> = row.iter().map(|x| x / mass).collect();
        between += mass * chi2_divergence(&mean, s)?;
        for &i in group {
            let spread: f64 = (0..m)
                .map(|j| {
                    let d = entries[(i, j)] / marg.p[i] - mean[j];
                    d * d / s[j]
                })
                .sum();
            within += marg.p[i] * spread;
        }
    }

    let labels = part
        .groups
        .iter()
        .map(|g| {
            g.iter()
                .map(|&i| a.investor_labels()[i].as_str())
                .collect::<Vec<_>>()
                .join("+")
        })
        .collect();
    let merged = OwnershipMatrix::new(merged, labels, a.stock_labels().to_vec())?;
    Ok(Aggregation {
        between,
        within,
        merged,
    })
}

/// Closed-form drop in `𝒳` when investors `a` and `b` merge:
/// `p_a p_b / (p_a + p_b) · Σ_j (q_aj − q_bj)² / s_j`.
pub fn merger_delta(a: &OwnershipMatrix, i: usize, k: usize) -> Result<f64> {
    let n = a.n();
    for idx in [i, k] {
        if idx >= n {
            return Err(Error::IndexOutOfRange {
                what: "investors",
                index: idx,
                len: n,
            });
        }
    }
    if i == k {
        return Err(Error::SameInvestor(i));
    }
    let marg = a.require_active()?;
    let (pa, pb) = (marg.p[i], marg.p[k]);
    let e = a.entries();
    let dist: f64 = (0..a.m())
        .map(|j| {
            let d = e[(i, j)] / pa - e[(k, j)] / pb;
            d * d / marg.s[j]
        })
        .sum();
    Ok(pa * pb / (pa + pb) * dist)
}
