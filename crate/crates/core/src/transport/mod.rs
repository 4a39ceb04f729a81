//! Fixed-marginal geometry of the transportation polytope `𝒯(p, s)`.
//!
//! `M(A) = ‖A‖_F²` is strictly convex, so its minimum over `𝒯(p, s)` is the
//! unique Euclidean projection of the origin and its maximum sits at a
//! vertex. Vertices are exactly the feasible matrices whose bipartite
//! support graph is a forest.

mod family;
mod minimize;
mod vertex;

pub use family::{family_2x2, Family2x2};
pub use minimize::{min_micro, min_micro_from};
pub use vertex::{
    basic_solution, max_micro, max_micro_with, spanning_tree_count, MaxOptions, DEFAULT_MAX_BUDGET,
    ENUMERATION_LIMIT,
};

use crate::error::{Error, Result};
use crate::indices::micro_concentration;
use crate::matrix::Matrix;
use crate::ownership::{Marginals, OwnershipMatrix};
use crate::tol::TOL_FEAS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    Minimum,
    Maximum,
}

/// An optimizer of `M` over `𝒯(p, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub matrix: Matrix,
    pub objective: f64,
    pub kind: SolutionKind,
    /// For a maximum: true when every vertex was enumerated, otherwise the
    /// objective is only a lower bound on `M_max`.
    pub certified: bool,
    /// Row and column multipliers `(λ, μ)` of the minimizer, with
    /// `A_ij = max{0, (λ_i + μ_j)/2}`.
    pub multipliers: Option<(Vec<f64>, Vec<f64>)>,
}

/// Position of `M(A)` inside the fixed-marginal range `[M_min, M_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityScore {
    pub psi: f64,
    pub m_min: f64,
    pub m_max: f64,
    pub m_observed: f64,
    pub certified: bool,
}

/// Largest absolute deviation of row and column sums from `(p, s)`.
pub fn marginal_residual(b: &Matrix, marg: &Marginals) -> f64 {
    let rows = b.row_sums();
    let cols = b.col_sums();
    rows.iter()
        .zip(&marg.p)
        .chain(cols.iter().zip(&marg.s))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Membership in `𝒯(p, s)` up to [`TOL_FEAS`] on the marginals.
pub fn is_feasible(b: &Matrix, marg: &Marginals) -> Result<bool> {
    if b.rows() != marg.n() || b.cols() != marg.m() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix against marginals of length {} and {}",
            b.rows(),
            b.cols(),
            marg.n(),
            marg.m()
        )));
    }
    let nonneg = b.as_slice().iter().all(|&x| x >= 0.0);
    Ok(nonneg && marginal_residual(b, marg) <= TOL_FEAS)
}

/// True when the bipartite support graph of `b` has no cycle.
pub fn support_is_forest(b: &Matrix) -> bool {
    let (n, m) = b.shape();
    let mut dsu = UnionFind::new(n + m);
    b.iter()
        .filter(|&(_, _, x)| x > 0.0)
        .all(|(i, j, _)| dsu.union(i, n + j))
}

/// Vertex test for a feasible matrix: acyclic support.
pub fn is_extreme_point(b: &Matrix, marg: &Marginals) -> Result<bool> {
    if !is_feasible(b, marg)? {
        return Err(Error::NotFeasible);
    }
    Ok(support_is_forest(b))
}

/// `Ψ(A | p, s) = (M(A) − M_min) / (M_max − M_min)`.
pub fn sparsity_score(a: &OwnershipMatrix, opts: &MaxOptions) -> Result<SparsityScore> {
    let marg = a.require_active()?;
    let lo = min_micro(&marg)?;
    let hi = max_micro_with(&marg, opts)?;
    let m_observed = micro_concentration(a);
    // A itself is a feasible point, so it also bounds an uncertified maximum.
    let m_max = hi.objective.max(m_observed);
    let m_min = lo.objective;
    let range = m_max - m_min;
    if range <= TOL_FEAS {
        return Err(Error::DegenerateRange(range));
    }
    let psi = ((m_observed - m_min) / range).clamp(0.0, 1.0);
    Ok(SparsityScore {
        psi,
        m_min,
        m_max,
        m_observed,
        certified: hi.certified,
    })
}

/// Indices of positive entries of a probability vector.
pub(crate) fn active_indices(w: &[f64]) -> Vec<usize> {
    (0..w.len()).filter(|&k| w[k] > 0.0).collect()
}

pub(crate) fn embed(small: &Matrix, rows: &[usize], cols: &[usize], n: usize, m: usize) -> Matrix {
    let mut out = Matrix::zeros(n, m);
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            out[(i, j)] = small[(a, b)];
        }
    }
    out
}

/// Union–find without path compression so that unions can be undone.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    history: Vec<Option<usize>>,
}

impl UnionFind {
    pub(crate) fn new(k: usize) -> Self {
        Self {
            parent: (0..k).collect(),
            size: vec![1; k],
            history: Vec::new(),
        }
    }

    pub(crate) fn find(&self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    /// Joins the components of `a` and `b`; false if they were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            self.history.push(None);
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.history.push(Some(rb));
        true
    }

    pub(crate) fn rollback(&mut self) {
        if let Some(Some(rb)) = self.history.pop() {
            let ra = self.parent[rb];
            self.size[ra] -= self.size[rb];
            self.parent[rb] = rb;
        }
    }
}
