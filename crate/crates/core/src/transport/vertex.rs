//! Maximum-concentration vertices of `𝒯(p, s)`.
//!
//! Every vertex is the basic solution of some spanning tree of the complete
//! bipartite graph `K_{n,m}`. Small instances enumerate all spanning trees
//! and keep the best feasible basic solution; larger ones run a seeded
//! vertex local search that pivots along improving edges of the polytope.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{active_indices, embed, SolutionKind, TransportSolution, UnionFind};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::ownership::Marginals;

pub const DEFAULT_MAX_BUDGET: usize = 64;

/// Spanning-tree count up to which vertices are enumerated exhaustively.
pub const ENUMERATION_LIMIT: f64 = 1e6;

/// Negative basic values above this are rounding noise.
const NEG_SLACK: f64 = 1e-12;
/// Objective differences below this are ties.
const TIE: f64 = 1e-14;

/// `(gain, entering cell, cycle, step)` of a candidate pivot.
type Pivot = (f64, (usize, usize), Vec<usize>, f64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxOptions {
    /// Local-search restarts when enumeration is too large.
    pub budget: usize,
    pub seed: u64,
    pub enumeration_limit: f64,
}

impl Default for MaxOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_MAX_BUDGET,
            seed: 0,
            enumeration_limit: ENUMERATION_LIMIT,
        }
    }
}

/// Number of spanning trees of `K_{n,m}`: `n^{m−1} m^{n−1}`.
pub fn spanning_tree_count(n: usize, m: usize) -> f64 {
    (n as f64).powi(m as i32 - 1) * (m as f64).powi(n as i32 - 1)
}

pub fn max_micro(marg: &Marginals, budget: usize) -> Result<TransportSolution> {
    max_micro_with(
        marg,
        &MaxOptions {
            budget,
            ..MaxOptions::default()
        },
    )
}

pub fn max_micro_with(marg: &Marginals, opts: &MaxOptions) -> Result<TransportSolution> {
    let (n, m) = (marg.n(), marg.m());
    let rows = active_indices(&marg.p);
    let cols = active_indices(&marg.s);
    let p: Vec<f64> = rows.iter().map(|&i| marg.p[i]).collect();
    let s: Vec<f64> = cols.iter().map(|&j| marg.s[j]).collect();

    let exhaustive = spanning_tree_count(p.len(), s.len()) <= opts.enumeration_limit;
    let best = if exhaustive {
        enumerate(&p, &s)
    } else {
        local_search(&p, &s, opts)
    };
    let matrix = embed(&best.matrix, &rows, &cols, n, m);
    Ok(TransportSolution {
        objective: matrix.frobenius_sq(),
        matrix,
        kind: SolutionKind::Maximum,
        certified: exhaustive,
        multipliers: None,
    })
}

struct Candidate {
    matrix: Matrix,
    objective: f64,
    support: Vec<(usize, usize)>,
}

impl Candidate {
    fn new(matrix: Matrix) -> Self {
        let support = matrix
            .iter()
            .filter(|&(_, _, x)| x > 0.0)
            .map(|(i, j, _)| (i, j))
            .collect();
        Self {
            objective: matrix.frobenius_sq(),
            matrix,
            support,
        }
    }

    /// Higher objective wins; ties go to the lexicographically smaller support.
    fn beats(&self, other: &Candidate) -> bool {
        if self.objective > other.objective + TIE {
            true
        } else if self.objective < other.objective - TIE {
            false
        } else {
            self.support < other.support
        }
    }
}

fn keep_best(best: &mut Option<Candidate>, cand: Candidate) {
    if best.as_ref().is_none_or(|b| cand.beats(b)) {
        *best = Some(cand);
    }
}

/// Values on the edges of a spanning tree of `K_{n,m}` that reproduce the
/// marginals, by peeling leaves. Returns `None` if any value is negative.
///
/// Edges are `(row, col)` pairs; exactly `n + m − 1` are expected.
pub fn basic_solution(p: &[f64], s: &[f64], edges: &[(usize, usize)]) -> Option<Matrix> {
    let (n, m) = (p.len(), s.len());
    let mut residual: Vec<f64> = p.iter().chain(s).copied().collect();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n + m];
    for (e, &(i, j)) in edges.iter().enumerate() {
        incident[i].push(e);
        incident[n + j].push(e);
    }
    let mut degree: Vec<usize> = incident.iter().map(Vec::len).collect();
    let mut used = vec![false; edges.len()];
    let mut stack: Vec<usize> = (0..n + m).filter(|&v| degree[v] == 1).collect();
    let mut out = Matrix::zeros(n, m);

    while let Some(v) = stack.pop() {
        if degree[v] != 1 {
            continue;
        }
        let e = *incident[v].iter().find(|&&e| !used[e])?;
        used[e] = true;
        let (i, j) = edges[e];
        let w = if v == i { n + j } else { i };
        let x = residual[v];
        if x < -NEG_SLACK {
            return None;
        }
        out[(i, j)] = x.max(0.0);
        residual[w] -= x;
        residual[v] = 0.0;
        degree[v] = 0;
        degree[w] -= 1;
        if degree[w] == 1 {
            stack.push(w);
        }
    }
    if used.iter().any(|u| !u) {
        return None;
    }
    Some(out)
}

fn enumerate(p: &[f64], s: &[f64]) -> Candidate {
    let (n, m) = (p.len(), s.len());
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let mut state = Enumeration {
        p,
        s,
        n,
        m,
        edges,
        chosen: Vec::with_capacity(n + m - 1),
        row_deg: vec![0; n],
        col_deg: vec![0; m],
        dsu: UnionFind::new(n + m),
        best: None,
    };
    state.recurse(0);
    state
        .best
        .expect("every transportation polytope has a vertex")
}

struct Enumeration<'a> {
    p: &'a [f64],
    s: &'a [f64],
    n: usize,
    m: usize,
    edges: Vec<(usize, usize)>,
    chosen: Vec<(usize, usize)>,
    row_deg: Vec<usize>,
    col_deg: Vec<usize>,
    dsu: UnionFind,
    best: Option<Candidate>,
}

impl Enumeration<'_> {
    fn recurse(&mut self, idx: usize) {
        let needed = self.n + self.m - 1;
        if self.chosen.len() == needed {
            if let Some(x) = basic_solution(self.p, self.s, &self.chosen) {
                keep_best(&mut self.best, Candidate::new(x));
            }
            return;
        }
        if self.edges.len() - idx < needed - self.chosen.len() {
            return;
        }
        let (i, j) = self.edges[idx];
        if self.dsu.union(i, self.n + j) {
            self.chosen.push((i, j));
            self.row_deg[i] += 1;
            self.col_deg[j] += 1;
            self.recurse(idx + 1);
            self.row_deg[i] -= 1;
            self.col_deg[j] -= 1;
            self.chosen.pop();
        }
        self.dsu.rollback();

        // Excluding the last edge of a still-isolated row or column leaves it
        // unreachable.
        let row_dead = j == self.m - 1 && self.row_deg[i] == 0;
        let col_dead = i == self.n - 1 && self.col_deg[j] == 0;
        if !row_dead && !col_dead {
            self.recurse(idx + 1);
        }
    }
}

/// North-west-corner basis under the given row and column orders.
fn north_west(p: &[f64], s: &[f64], rows: &[usize], cols: &[usize]) -> Vec<(usize, usize)> {
    let (n, m) = (p.len(), s.len());
    let mut rp: Vec<f64> = rows.iter().map(|&i| p[i]).collect();
    let mut cs: Vec<f64> = cols.iter().map(|&j| s[j]).collect();
    let mut edges = Vec::with_capacity(n + m - 1);
    let (mut a, mut b) = (0, 0);
    loop {
        edges.push((rows[a], cols[b]));
        if a == n - 1 && b == m - 1 {
            break;
        }
        let x = rp[a].min(cs[b]);
        rp[a] -= x;
        cs[b] -= x;
        if b == m - 1 || (a < n - 1 && rp[a] <= cs[b]) {
            a += 1;
        } else {
            b += 1;
        }
    }
    edges
}

fn local_search(p: &[f64], s: &[f64], opts: &MaxOptions) -> Candidate {
    let (n, m) = (p.len(), s.len());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..m).collect();
    let mut best = None;
    for restart in 0..opts.budget.max(1) {
        if restart > 0 {
            rows.shuffle(&mut rng);
            cols.shuffle(&mut rng);
        }
        let tree = climb(p, s, north_west(p, s, &rows, &cols));
        if let Some(x) = basic_solution(p, s, &tree) {
            keep_best(&mut best, Candidate::new(x));
        }
    }
    best.expect("north-west-corner bases are always feasible")
}

/// Rooted view of a spanning tree on `n + m` nodes (rows first).
struct Rooted {
    parent: Vec<usize>,
    parent_edge: Vec<usize>,
    depth: Vec<usize>,
}

fn root_tree(n: usize, m: usize, tree: &[(usize, usize)]) -> Rooted {
    let k = n + m;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k];
    for (e, &(i, j)) in tree.iter().enumerate() {
        adj[i].push((n + j, e));
        adj[n + j].push((i, e));
    }
    let mut parent = vec![usize::MAX; k];
    let mut parent_edge = vec![usize::MAX; k];
    let mut depth = vec![0; k];
    let mut seen = vec![false; k];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(w, e) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                parent_edge[w] = e;
                depth[w] = depth[v] + 1;
                stack.push(w);
            }
        }
    }
    Rooted {
        parent,
        parent_edge,
        depth,
    }
}

/// Tree edges on the path from node `a` to node `b`, in walking order.
fn tree_path(t: &Rooted, mut a: usize, mut b: usize) -> Vec<usize> {
    let mut head = Vec::new();
    let mut tail = Vec::new();
    while t.depth[a] > t.depth[b] {
        head.push(t.parent_edge[a]);
        a = t.parent[a];
    }
    while t.depth[b] > t.depth[a] {
        tail.push(t.parent_edge[b]);
        b = t.parent[b];
    }
    while a != b {
        head.push(t.parent_edge[a]);
        a = t.parent[a];
        tail.push(t.parent_edge[b]);
        b = t.parent[b];
    }
    head.extend(tail.into_iter().rev());
    head
}

/// Best-improvement pivoting from a starting basis until no adjacent
/// vertex has a strictly larger objective.
fn climb(p: &[f64], s: &[f64], mut tree: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    let (n, m) = (p.len(), s.len());
    let Some(mut x) = basic_solution(p, s, &tree) else {
        return tree;
    };
    // Each accepted pivot strictly increases a bounded objective.
    for _ in 0..10_000 {
        let rooted = root_tree(n, m, &tree);
        let mut in_tree = vec![false; n * m];
        for &(i, j) in &tree {
            in_tree[i * m + j] = true;
        }
        let mut best: Option<Pivot> = None;
        for i in 0..n {
            for j in 0..m {
                if in_tree[i * m + j] {
                    continue;
                }
                let path = tree_path(&rooted, n + j, i);
                let theta = path
                    .iter()
                    .step_by(2)
                    .map(|&e| x[tree[e]])
                    .fold(f64::INFINITY, f64::min);
                if theta <= 1e-15 {
                    continue;
                }
                let mut gain = theta * theta;
                for (k, &e) in path.iter().enumerate() {
                    let v = x[tree[e]];
                    gain += if k % 2 == 0 {
                        -2.0 * v * theta + theta * theta
                    } else {
                        2.0 * v * theta + theta * theta
                    };
                }
                if gain > 1e-14 && best.as_ref().is_none_or(|b| gain > b.0) {
                    best = Some((gain, (i, j), path, theta));
                }
            }
        }
        let Some((_, entering, path, theta)) = best else {
            break;
        };
        let mut leaving = None;
        for (k, &e) in path.iter().enumerate() {
            let cell = tree[e];
            if k % 2 == 0 {
                x[cell] -= theta;
                if leaving.is_none() && x[cell] <= 1e-15 {
                    leaving = Some(e);
                    x[cell] = 0.0;
                }
            } else {
                x[cell] += theta;
            }
        }
        x[entering] = theta;
        let e = leaving.expect("ratio test selects a leaving edge");
        tree[e] = entering;
    }
    tree
}
