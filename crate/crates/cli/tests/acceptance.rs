//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process fails if any criterion fails.

// `!(x <= tol)` is deliberate: NaN must fail a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write as _;
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use ownconc_cli::{ingest, Book, InputFormat};
use ownconc_core::extensions::{renyi_summary, signed_dependence, SignedOwnership};
use ownconc_core::{
    active_variance, aggregate, dependence_index, dilute, family_2x2, fire_sale,
    isotropic_capacity, max_micro, merge_investors, min_micro, nonid_family, remove_stock, rho,
    sparsity_score, summary, whiten, worst_case_shock, Marginals, Matrix, MaxOptions,
    OwnershipMatrix, Partition,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORKED_CSV: &str = "investor,stock,amount\n\
inv1,stk1,30\ninv1,stk2,10\ninv2,stk1,5\ninv2,stk2,25\ninv3,stk1,15\ninv3,stk2,15\n";

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------- independent oracles ----------

fn marginals_of(a: &Matrix) -> (Vec<f64>, Vec<f64>) {
    (a.row_sums(), a.col_sums())
}

fn m_direct(a: &Matrix) -> f64 {
    a.as_slice().iter().map(|x| x * x).sum()
}

/// `Σ A_ij² / (p_i s_j) − 1` over an all-active matrix.
fn x_direct(a: &Matrix) -> f64 {
    let (p, s) = marginals_of(a);
    let mut acc = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let x = a[(i, j)];
            acc += x * x / (p[i] * s[j]);
        }
    }
    acc - 1.0
}

fn hh(w: &[f64]) -> f64 {
    w.iter().map(|x| x * x).sum()
}

fn random_positive(rng: &mut ChaCha8Rng, n: usize, m: usize) -> OwnershipMatrix {
    let raw = Matrix::from_fn(n, m, |_, _| rng.gen_range(0.01..1.0));
    OwnershipMatrix::from_raw(&raw).unwrap()
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// All spanning trees of K_{n,m}, as lists of cells, by brute force over
/// (n+m−1)-subsets.
fn spanning_trees(n: usize, m: usize) -> Vec<Vec<(usize, usize)>> {
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let k = n + m - 1;
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(k);
    fn rec(
        cells: &[(usize, usize)],
        start: usize,
        k: usize,
        n: usize,
        pick: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if pick.len() == k {
            let mut parent: Vec<usize> = (0..n + cells.len()).collect();
            fn find(p: &mut [usize], x: usize) -> usize {
                let mut r = x;
                while p[r] != r {
                    r = p[r];
                }
                p[x] = r;
                r
            }
            for &(i, j) in pick.iter() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, n + j));
                if a == b {
                    return;
                }
                parent[a] = b;
            }
            out.push(pick.clone());
            return;
        }
        for t in start..cells.len() {
            if cells.len() - t < k - pick.len() {
                break;
            }
            pick.push(cells[t]);
            rec(cells, t + 1, k, n, pick, out);
            pick.pop();
        }
    }
    rec(&cells, 0, k, n, &mut pick, &mut out);
    out
}

/// Unique solution supported on a spanning tree, by peeling leaves.
fn tree_solution(p: &[f64], s: &[f64], tree: &[(usize, usize)]) -> Option<Matrix> {
    let (n, m) = (p.len(), s.len());
    let mut row_left = p.to_vec();
    let mut col_left = s.to_vec();
    let mut alive = vec![true; tree.len()];
    let mut x = Matrix::zeros(n, m);
    for _ in 0..tree.len() {
        let mut deg_r = vec![0; n];
        let mut deg_c = vec![0; m];
        for (e, &(i, j)) in tree.iter().enumerate() {
            if alive[e] {
                deg_r[i] += 1;
                deg_c[j] += 1;
            }
        }
        let (e, val) = tree.iter().enumerate().find_map(|(e, &(i, j))| {
            if !alive[e] {
                None
            } else if deg_r[i] == 1 {
                Some((e, row_left[i]))
            } else if deg_c[j] == 1 {
                Some((e, col_left[j]))
            } else {
                None
            }
        })?;
        let (i, j) = tree[e];
        x[(i, j)] = val;
        row_left[i] -= val;
        col_left[j] -= val;
        alive[e] = false;
    }
    let ok = x.as_slice().iter().all(|&v| v >= -1e-12)
        && row_left.iter().chain(&col_left).all(|r| r.abs() < 1e-12);
    ok.then_some(x)
}

/// Projection of the zero matrix onto 𝒯(p, s) by Dykstra's alternating
/// projections between the marginal constraints and the orthant.
fn dykstra_min(p: &[f64], s: &[f64]) -> (Matrix, usize) {
    let (n, m) = (p.len(), s.len());
    let proj_affine = |x: &Matrix| {
        let r: Vec<f64> = x.row_sums().iter().zip(p).map(|(a, b)| a - b).collect();
        let c: Vec<f64> = x.col_sums().iter().zip(s).map(|(a, b)| a - b).collect();
        let t: f64 = r.iter().sum();
        Matrix::from_fn(n, m, |i, j| {
            x[(i, j)] - r[i] / m as f64 - c[j] / n as f64 + t / (n * m) as f64
        })
    };
    let mut x = Matrix::zeros(n, m);
    let mut q = Matrix::zeros(n, m);
    for it in 1..=200_000 {
        let y = proj_affine(&x);
        let z = Matrix::from_fn(n, m, |i, j| y[(i, j)] + q[(i, j)]);
        let x_new = Matrix::from_fn(n, m, |i, j| z[(i, j)].max(0.0));
        q = Matrix::from_fn(n, m, |i, j| z[(i, j)] - x_new[(i, j)]);
        let change = x_new.max_abs_diff(&x);
        x = x_new;
        if change < 1e-14 && it > 10 {
            return (proj_affine(&x), it);
        }
    }
    (proj_affine(&x), 200_000)
}

/// Largest eigenvalue of `K Kᵀ` on the complement of `u`, by power iteration.
fn deflated_top_eigen(k: &Matrix, u: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    let n = k.rows();
    let project = |y: &mut Vec<f64>| {
        let d: f64 = y.iter().zip(u).map(|(a, b)| a * b).sum();
        y.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
    };
    let mut y: Vec<f64> = (0..n).map(|_| gauss(rng)).collect();
    let mut lambda = 0.0;
    for _ in 0..20_000 {
        project(&mut y);
        let norm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        y.iter_mut().for_each(|x| *x /= norm);
        let mut next = k.mul_vec(&k.tr_mul_vec(&y));
        project(&mut next);
        let l: f64 = next.iter().zip(&y).map(|(a, b)| a * b).sum();
        let done = (l - lambda).abs() < 1e-15;
        lambda = l;
        y = next;
        if done {
            break;
        }
    }
    lambda
}

// ---------- criteria ----------

fn worked_matrix() -> OwnershipMatrix {
    let dir = tempfile::TempDir::new().unwrap();
    let path = dir.path().join("worked.csv");
    std::fs::write(&path, WORKED_CSV).unwrap();
    match ingest(&path, InputFormat::Csv, false).unwrap().book {
        Book::Long(a) => a,
        Book::Signed(_) => unreachable!(),
    }
}

fn c1_worked_example() -> Check {
    let t0 = Instant::now();
    let a = worked_matrix();
    let s = summary(&a);
    ensure!(s.h_i == 0.34, "H_I = {:e}", s.h_i);
    ensure!(s.h_s == 0.50, "H_S = {:e}", s.h_s);
    ensure!(s.m == 0.21, "M = {:e}", s.m);
    let x = dependence_index(&a).map_err(|e| e.to_string())?.x;
    ensure!((x - 0.233333).abs() <= 1e-6, "X = {x}");
    let r = rho(&a).map_err(|e| e.to_string())?;
    ensure!((r - 0.4830).abs() <= 5e-4, "rho = {r}");
    let marg = a.marginals();
    let lo = min_micro(&marg).map_err(|e| e.to_string())?;
    ensure!(
        (lo.objective - 0.17).abs() <= 1e-6,
        "M_min = {}",
        lo.objective
    );
    let hi = max_micro(&marg, 64).map_err(|e| e.to_string())?;
    ensure!(hi.certified, "M_max not certified");
    ensure!(
        (hi.objective - 0.30).abs() <= 1e-9,
        "M_max = {}",
        hi.objective
    );
    let psi = sparsity_score(&a, &MaxOptions::default()).map_err(|e| e.to_string())?;
    ensure!((psi.psi - 0.3077).abs() <= 1e-3, "Psi = {}", psi.psi);
    let dt = t0.elapsed();
    ensure!(dt < Duration::from_secs(1), "took {dt:?}");
    Ok(format!(
        "X={x:.6} rho={r:.4} Psi={:.4} in {dt:.2?}",
        psi.psi
    ))
}

fn c2_two_by_two() -> Check {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for ai in 1..=99 {
        for bi in 1..=99 {
            let (a, b) = (ai as f64 / 100.0, bi as f64 / 100.0);
            let f = family_2x2(a, b).map_err(|e| e.to_string())?;
            let marg =
                Marginals::new(vec![a, 1.0 - a], vec![b, 1.0 - b]).map_err(|e| e.to_string())?;
            let sol = min_micro(&marg).map_err(|e| e.to_string())?;
            let gap = (f.min_micro() - sol.objective).abs();
            worst = worst.max(gap);
            ensure!(
                gap <= 1e-9,
                "a={a} b={b}: {} vs {}",
                f.min_micro(),
                sol.objective
            );
        }
    }
    let f = family_2x2(0.9, 0.9).map_err(|e| e.to_string())?;
    ensure!(
        (f.product_micro() - 0.6724).abs() <= 1e-12,
        "M_prod = {}",
        f.product_micro()
    );
    ensure!(
        (f.min_micro() - 0.66).abs() <= 1e-12,
        "M_min = {}",
        f.min_micro()
    );
    let dt = t0.elapsed();
    ensure!(dt < Duration::from_secs(10), "took {dt:?}");
    Ok(format!(
        "9801 grid points, max gap {worst:.1e}, in {dt:.2?}"
    ))
}

fn c3_spectral_identity() -> Check {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for case in 0..500 {
        let n = rng.gen_range(1..=30);
        let m = rng.gen_range(1..=20);
        let a = random_positive(&mut rng, n, m);
        let x = x_direct(a.entries());
        let sr = whiten(&a).map_err(|e| e.to_string())?;
        let tail: f64 = sr.sigma.iter().skip(1).map(|s| s * s).sum();
        let gap = (x - tail).abs();
        let scale = x.max(1.0);
        worst = worst.max(gap / scale);
        ensure!(
            gap <= 1e-9 * scale,
            "case {case} ({n}x{m}): X={x} tail={tail}"
        );
        let r2 = sr.rho * sr.rho;
        let k = n.min(m) as f64;
        let slack = 1e-12 * scale;
        ensure!(r2 <= x + slack, "case {case}: rho^2={r2} > X={x}");
        ensure!(
            x <= (k - 1.0) * r2 + slack,
            "case {case}: X={x} > (k-1) rho^2"
        );
    }
    let dt = t0.elapsed();
    ensure!(dt < Duration::from_secs(30), "took {dt:?}");
    Ok(format!(
        "500 matrices, max relative gap {worst:.1e}, in {dt:.2?}"
    ))
}

fn c4_aggregation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let n = rng.gen_range(2..=15);
        let m = rng.gen_range(1..=10);
        let a = random_positive(&mut rng, n, m);
        let g = rng.gen_range(1..=n);
        let mut groups = vec![Vec::new(); g];
        for i in 0..n {
            groups[if i < g { i } else { rng.gen_range(0..g) }].push(i);
        }
        let merged_direct = Matrix::from_fn(g, m, |k, j| {
            groups[k].iter().map(|&i| a.entries()[(i, j)]).sum()
        });
        let part = Partition::new(groups, n).map_err(|e| e.to_string())?;
        let agg = aggregate(&a, &part).map_err(|e| e.to_string())?;
        let x = x_direct(a.entries());
        let between = x_direct(&merged_direct);
        let e1 = (agg.between + agg.within - x).abs();
        let e2 = (between - agg.between).abs();
        let e3 = (x_direct(agg.merged.entries()) - between).abs();
        worst = worst.max(e1).max(e2).max(e3);
        ensure!(e1 <= 1e-10, "case {case}: between+within off by {e1:e}");
        ensure!(agg.within >= 0.0, "case {case}: within = {}", agg.within);
        ensure!(
            e2 <= 1e-10 && e3 <= 1e-10,
            "case {case}: merged X off by {e2:e}/{e3:e}"
        );
    }
    Ok(format!("200 pairs, max error {worst:.1e}"))
}

fn c5_comparative_statics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut track = |e: f64, what: &str, case: usize| -> Result<(), String> {
        worst = worst.max(e);
        if e <= 1e-9 {
            Ok(())
        } else {
            Err(format!("{what}, case {case}: error {e:e}"))
        }
    };
    for case in 0..200 {
        let n = rng.gen_range(2..=10);
        let m = rng.gen_range(2..=8);
        let a = random_positive(&mut rng, n, m);
        let e = a.entries();
        let (p, s) = marginals_of(e);

        // merger
        let ia = rng.gen_range(0..n);
        let ib = (ia + rng.gen_range(1..n)) % n;
        let d = merge_investors(&a, ia, ib).map_err(|e| e.to_string())?;
        let after = d.matrix_after.entries();
        let (pa, pb) = (p[ia], p[ib]);
        let cross: f64 = (0..m).map(|j| e[(ia, j)] * e[(ib, j)]).sum();
        let dx_closed = pa * pb / (pa + pb)
            * (0..m)
                .map(|j| (e[(ia, j)] / pa - e[(ib, j)] / pb).powi(2) / s[j])
                .sum::<f64>();
        track(
            (hh(&after.row_sums()) - hh(&p) - 2.0 * pa * pb).abs(),
            "merger dH_I",
            case,
        )?;
        track(
            (m_direct(after) - m_direct(e) - 2.0 * cross).abs(),
            "merger dM",
            case,
        )?;
        track(
            (x_direct(e) - x_direct(after) - dx_closed).abs(),
            "merger dX",
            case,
        )?;
        track(d.max_prediction_error(), "merger prediction", case)?;

        // removal
        let j0 = rng.gen_range(0..m);
        let d = remove_stock(&a, j0).map_err(|e| e.to_string())?;
        let w = 1.0 - s[j0];
        let col_sq: f64 = (0..n).map(|i| e[(i, j0)].powi(2)).sum();
        let closed = (m_direct(e) - col_sq) / (w * w);
        track(
            (m_direct(d.matrix_after.entries()) - closed).abs(),
            "removal M",
            case,
        )?;
        track(d.max_prediction_error(), "removal prediction", case)?;

        // dilution
        let lambda = rng.gen_range(0.01..0.99);
        let d = dilute(&a, lambda).map_err(|e| e.to_string())?;
        let after = d.matrix_after.entries();
        let k = 1.0 - lambda;
        let (hi, hs, mm, xx) = (hh(&p), hh(&s), m_direct(e), x_direct(e));
        track(
            (hh(&after.row_sums()) - (k * k * hi + lambda * lambda)).abs(),
            "dilution H_I",
            case,
        )?;
        track((hh(&after.col_sums()) - hs).abs(), "dilution H_S", case)?;
        track(
            (m_direct(after) - (k * k * mm + lambda * lambda * hs)).abs(),
            "dilution M",
            case,
        )?;
        track((x_direct(after) - k * xx).abs(), "dilution X", case)?;
        track(d.max_prediction_error(), "dilution prediction", case)?;
    }

    // small-mass removal: M(Â) = M(A)(1 + 2ε) + O(ε²)
    let eps = 1e-4;
    let mut worst_eps: f64 = 0.0;
    for _ in 0..20 {
        let b = random_positive(&mut rng, 5, 4);
        let c: Vec<f64> = {
            let v: Vec<f64> = (0..5).map(|_| rng.gen_range(0.1..1.0)).collect();
            let t: f64 = v.iter().sum();
            v.iter().map(|x| x / t).collect()
        };
        let full = Matrix::from_fn(5, 5, |i, j| {
            if j < 4 {
                (1.0 - eps) * b.entries()[(i, j)]
            } else {
                eps * c[i]
            }
        });
        let a = OwnershipMatrix::from_raw(&full).map_err(|e| e.to_string())?;
        let d = remove_stock(&a, 4).map_err(|e| e.to_string())?;
        let err = (d.after.m - d.before.m * (1.0 + 2.0 * eps)).abs();
        worst_eps = worst_eps.max(err);
        ensure!(err <= 1e-6, "epsilon expansion error {err:e}");
    }
    Ok(format!(
        "600 operations, max error {worst:.1e}; epsilon expansion error {worst_eps:.1e}"
    ))
}

fn c6_transport_oracles() -> Check {
    let weights = [1.0, 2.0, 3.0];
    let grid = |k: usize| -> Vec<Vec<f64>> {
        let mut out = vec![vec![]];
        for _ in 0..k {
            out = out
                .into_iter()
                .flat_map(|v| {
                    weights.iter().map(move |&w| {
                        let mut v = v.clone();
                        v.push(w);
                        v
                    })
                })
                .collect();
        }
        out.into_iter()
            .map(|v| {
                let t: f64 = v.iter().sum();
                v.iter().map(|x| x / t).collect()
            })
            .collect()
    };
    let (mut instances, mut worst_max, mut worst_min) = (0usize, 0.0f64, 0.0f64);
    for n in 1..=6 {
        for m in 1..=(7 - n) {
            let trees = spanning_trees(n, m);
            let (ps, ss) = (grid(n), grid(m));
            for p in &ps {
                for s in &ss {
                    instances += 1;
                    let marg = Marginals::new(p.clone(), s.clone()).map_err(|e| e.to_string())?;
                    let brute = trees
                        .iter()
                        .filter_map(|t| tree_solution(p, s, t))
                        .map(|x| m_direct(&x))
                        .fold(f64::NEG_INFINITY, f64::max);
                    let hi = max_micro(&marg, 64).map_err(|e| e.to_string())?;
                    ensure!(hi.certified, "{n}x{m} maximum not certified");
                    let g = (hi.objective - brute).abs();
                    worst_max = worst_max.max(g);
                    ensure!(
                        g <= 1e-12,
                        "p={p:?} s={s:?}: max {} vs brute force {brute}",
                        hi.objective
                    );

                    let lo = min_micro(&marg).map_err(|e| e.to_string())?;
                    let (oracle, iters) = dykstra_min(p, s);
                    ensure!(
                        iters < 200_000,
                        "projection oracle did not converge for p={p:?} s={s:?}"
                    );
                    let g = (lo.objective - m_direct(&oracle))
                        .abs()
                        .max(lo.matrix.max_abs_diff(&oracle));
                    worst_min = worst_min.max(g);
                    ensure!(
                        g <= 1e-6,
                        "p={p:?} s={s:?}: min differs from oracle by {g:e}"
                    );
                }
            }
        }
    }
    Ok(format!(
        "{instances} marginal pairs; max gap {worst_max:.1e}, min gap {worst_min:.1e}"
    ))
}

fn c7_dynamics() -> Check {
    let mut worst_id: f64 = 0.0;
    let mut worst_sharp: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for case in 0..50 {
        let n = rng.gen_range(2..=8);
        let m = rng.gen_range(2..=7);
        let a = random_positive(&mut rng, n, m);
        let e = a.entries();
        let (p, s) = marginals_of(e);
        let severity_of = |d: &[f64]| -> f64 {
            (0..m)
                .map(|j| {
                    let f: f64 = (0..n).map(|i| e[(i, j)] * d[i]).sum();
                    f * f / s[j]
                })
                .sum()
        };
        let delta: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean: f64 = p.iter().zip(&delta).map(|(p, d)| p * d).sum();
        let perp: Vec<f64> = delta.iter().map(|d| d - mean).collect();
        let direct = severity_of(&delta);
        let split = mean * mean + severity_of(&perp);
        let r = fire_sale(&a, &delta).map_err(|e| e.to_string())?;
        let err = (direct - split)
            .abs()
            .max((r.severity - direct).abs())
            .max((r.parallel_term + r.perp_term - direct).abs());
        worst_id = worst_id.max(err);
        ensure!(err <= 1e-9, "case {case}: decomposition error {err:e}");

        let sr = whiten(&a).map_err(|e| e.to_string())?;
        let top = deflated_top_eigen(&sr.k, &sr.u, &mut rng);
        let rho2 = rho(&a).map_err(|e| e.to_string())?.powi(2);
        let w = worst_case_shock(&a).map_err(|e| e.to_string())?;
        let wd: Vec<f64> = w.delta_perp.clone();
        let norm: f64 = p.iter().zip(&wd).map(|(p, d)| p * d * d).sum();
        let centered: f64 = p.iter().zip(&wd).map(|(p, d)| p * d).sum();
        let gap = (top - rho2).abs().max((severity_of(&wd) - top).abs());
        worst_sharp = worst_sharp.max(gap);
        ensure!(
            gap <= 1e-6,
            "case {case}: sup severity {top} vs rho^2 {rho2}"
        );
        ensure!(
            rho2 < 1e-12 || (norm - 1.0).abs() < 1e-9,
            "worst shock not unit: {norm}"
        );
        ensure!(
            centered.abs() < 1e-12,
            "worst shock not centered: {centered}"
        );
    }

    let mut mc = Vec::new();
    for seed in [1u64, 2, 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_positive(&mut rng, 6, 5);
        let sigma = 0.2;
        let e = a.entries();
        let (p, s) = marginals_of(e);
        let v: Vec<f64> = s.iter().map(|x| x.sqrt()).collect();
        let target = isotropic_capacity(&a, sigma).map_err(|e| e.to_string())?;
        let draws = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..draws {
            let z: Vec<f64> = (0..5).map(|_| gauss(&mut rng)).collect();
            let dz: f64 = z.iter().zip(&v).map(|(a, b)| a * b).sum();
            let r: Vec<f64> = (0..5).map(|j| sigma * (z[j] - dz * v[j]) / v[j]).collect();
            // componentwise active returns α_i = Σ_j (q_ij − s_j) R_j
            let var: f64 = (0..6)
                .map(|i| {
                    let al: f64 = (0..5).map(|j| (e[(i, j)] / p[i] - s[j]) * r[j]).sum();
                    p[i] * al * al
                })
                .sum();
            if sum == 0.0 {
                let lib = active_variance(&a, &r, false)
                    .map_err(|e| e.to_string())?
                    .variance;
                ensure!((lib - var).abs() <= 1e-12, "active variance {lib} vs {var}");
            }
            sum += var;
            sum_sq += var * var;
        }
        let mean = sum / draws as f64;
        let sd = ((sum_sq / draws as f64 - mean * mean) * draws as f64 / (draws - 1) as f64).sqrt();
        let se = sd / (draws as f64).sqrt();
        let z = (mean - target).abs() / se;
        ensure!(
            z <= 3.0,
            "seed {seed}: MC mean {mean} vs {target} ({z:.2} se)"
        );
        mc.push(format!("{z:.2}"));
    }
    Ok(format!(
        "identity error {worst_id:.1e}, sharpness gap {worst_sharp:.1e}, MC z-scores [{}]",
        mc.join(", ")
    ))
}

fn c8_non_identification() -> Check {
    let mut worst: f64 = 0.0;
    for t in [0.0, 0.1, 0.2, 0.25, 0.4, 0.5] {
        let f = nonid_family(t).map_err(|e| e.to_string())?;
        let s = summary(&f.matrix);
        ensure!(
            s.h_i == 0.5 && s.h_s == 0.5,
            "t={t}: H = ({}, {})",
            s.h_i,
            s.h_s
        );
        let m_formula = 2.0 * t * t + 2.0 * (0.5 - t) * (0.5 - t);
        let x_formula = 16.0 * (t - 0.25) * (t - 0.25);
        let x = dependence_index(&f.matrix).map_err(|e| e.to_string())?.x;
        let err = (s.m - m_formula).abs().max((x - x_formula).abs());
        worst = worst.max(err);
        ensure!(err <= 1e-12, "t={t}: M={} X={x}", s.m);
    }
    Ok(format!("6 grid points, max error {worst:.1e}"))
}

fn c9_extensions() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_renyi: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(1..8);
        let m = rng.gen_range(1..8);
        let norm = |v: Vec<f64>| {
            let t: f64 = v.iter().sum();
            v.into_iter().map(|x| x / t).collect::<Vec<_>>()
        };
        let p = norm((0..n).map(|_| rng.gen_range(0.01..1.0)).collect());
        let s = norm((0..m).map(|_| rng.gen_range(0.01..1.0)).collect());
        let a = OwnershipMatrix::proportional(&Marginals::new(p, s).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        for alpha in [0.5, 2.0, 3.0] {
            let r = renyi_summary(&a, alpha).map_err(|e| e.to_string())?;
            let rel = (r.m - r.h_i * r.h_s).abs() / r.m;
            worst_renyi = worst_renyi.max(rel);
            ensure!(rel <= 1e-10, "alpha={alpha}: relative gap {rel:e}");
        }
    }

    let mut worst_signed: f64 = 0.0;
    for case in 0..50 {
        let (n, m) = (rng.gen_range(2..6), rng.gen_range(2..6));
        let raw = Matrix::from_fn(n, m, |_, _| {
            let x: f64 = rng.gen_range(0.1..1.0);
            if rng.gen_bool(0.25) {
                -x
            } else {
                x
            }
        });
        let labels = |k: usize, pre: &str| (0..k).map(|i| format!("{pre}{i}")).collect::<Vec<_>>();
        let book = SignedOwnership::from_signed(&raw, labels(n, "i"), labels(m, "s"))
            .map_err(|e| e.to_string())?;
        let value = match signed_dependence(&book) {
            Ok(v) => v,
            Err(ownconc_core::Error::MarketNeutral(_)) => continue,
            Err(e) => return Err(e.to_string()),
        };
        // sum form from the raw signed matrix
        let gross_total: f64 = raw.as_slice().iter().map(|x| x.abs()).sum();
        let a = raw.scale(1.0 / gross_total);
        let pg: Vec<f64> = (0..n)
            .map(|i| (0..m).map(|j| a[(i, j)].abs()).sum())
            .collect();
        let sg: Vec<f64> = (0..m)
            .map(|j| (0..n).map(|i| a[(i, j)].abs()).sum())
            .collect();
        let (pn, sn) = (a.row_sums(), a.col_sums());
        let eta: f64 = pn.iter().sum();
        let mut sum_form = 0.0;
        for i in 0..n {
            for j in 0..m {
                let b = pn[i] * sn[j] / eta;
                sum_form += (a[(i, j)] - b).powi(2) / (pg[i] * sg[j]);
            }
        }
        let rel = (value - sum_form).abs() / sum_form.max(1.0);
        let scaled = SignedOwnership::from_signed(&raw.scale(37.5), labels(n, "i"), labels(m, "s"))
            .map_err(|e| e.to_string())?;
        let inv =
            (signed_dependence(&scaled).map_err(|e| e.to_string())? - value).abs() / value.max(1.0);
        worst_signed = worst_signed.max(rel).max(inv);
        ensure!(rel <= 1e-10, "case {case}: signed forms differ by {rel:e}");
        ensure!(
            inv <= 1e-10,
            "case {case}: gross scaling changed the value by {inv:e}"
        );
    }
    Ok(format!(
        "Renyi max relative gap {worst_renyi:.1e}; signed max gap {worst_signed:.1e}"
    ))
}

fn c10_determinism() -> Check {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let path = dir.path().join("worked.csv");
    std::fs::write(&path, WORKED_CSV).map_err(|e| e.to_string())?;
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_ownconc"))
            .args([
                "dashboard",
                path.to_str().unwrap(),
                "--format",
                "json",
                "--psi",
                "--seed",
                "0",
            ])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure!(
        a.status.success() && b.status.success(),
        "CLI failed: {}",
        String::from_utf8_lossy(&a.stderr)
    );
    ensure!(!a.stdout.is_empty(), "empty report");
    ensure!(a.stdout == b.stdout, "reports differ");
    Ok(format!("{} identical bytes", a.stdout.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("golden worked example", c1_worked_example),
        ("2x2 closed forms", c2_two_by_two),
        ("spectral identity", c3_spectral_identity),
        ("aggregation law", c4_aggregation),
        ("comparative-static closed forms", c5_comparative_statics),
        ("transport oracle equivalence", c6_transport_oracles),
        ("fire-sale and active variance", c7_dynamics),
        ("non-identification family", c8_non_identification),
        ("Renyi and signed extensions", c9_extensions),
        ("CLI determinism", c10_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let dt = t0.elapsed();
        let line = match outcome {
            Ok(detail) => format!("PASS  criterion {:>2}: {name}: {detail} [{dt:.2?}]", k + 1),
            Err(why) => {
                failed += 1;
                format!("FAIL  criterion {:>2}: {name}: {why} [{dt:.2?}]", k + 1)
            }
        };
        println!("{line}");
        std::io::stdout().flush().ok();
    }
    let _ = panic::take_hook();
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
