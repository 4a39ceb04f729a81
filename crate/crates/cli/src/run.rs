use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ownconc_core::comparative::OperationDelta;
use ownconc_core::extensions::signed_dependence;
use ownconc_core::{
    active_variance, aggregate, dependence_index, dilute, family_2x2, fire_sale, merge_investors,
    micro_decomposition, nonid_family, remove_stock, renyi_summary, rho, sparsity_score, summary,
    worst_case_shock, Error, FireSaleResult, MaxOptions, OwnershipMatrix, Partition,
};
use serde_json::{json, Value};

use crate::args::{Cli, Command, FamilyKind, GlobalOpts, InputKind};
use crate::dashboard::{dashboard, DashboardOptions, PSI_LABEL_LIMIT};
use crate::error::{CliError, Result};
use crate::ingest::{export_csv, ingest, Book, InputFormat};
use crate::report::{
    dashboard_json, dashboard_text, envelope, sig6, vector_table, OutputFormat, Provenance, Table,
};

/// Rendered report plus diagnostics destined for stderr.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub notes: Vec<String>,
}

struct Runner<'a> {
    g: &'a GlobalOpts,
    flags: BTreeMap<String, Value>,
    notes: Vec<String>,
}

pub fn run(cli: &Cli) -> Result<Output> {
    let mut r = Runner {
        g: &cli.global,
        flags: BTreeMap::new(),
        notes: Vec::new(),
    };
    r.flag(
        "format",
        json!(format!("{:?}", cli.global.format).to_lowercase()),
    );
    let stdout = r.dispatch(&cli.command)?;
    Ok(Output {
        stdout,
        notes: r.notes,
    })
}

impl Runner<'_> {
    fn flag(&mut self, k: &str, v: Value) {
        self.flags.insert(k.to_string(), v);
    }

    fn provenance(&self) -> Provenance {
        Provenance {
            seed: self.g.seed,
            flags: self.flags.clone(),
        }
    }

    fn json(&self) -> bool {
        self.g.format == OutputFormat::Json
    }

    fn emit(&self, command: &str, body: Value, text: impl FnOnce() -> String) -> String {
        if self.json() {
            envelope(command, body, &self.provenance())
        } else {
            text()
        }
    }

    fn input_format(&self, path: &Path) -> InputFormat {
        match self.g.input_format {
            Some(InputKind::Csv) => InputFormat::Csv,
            Some(InputKind::Json) => InputFormat::Json,
            None => InputFormat::from_path(path),
        }
    }

    fn load(&mut self, path: &Path) -> Result<OwnershipMatrix> {
        self.flag("input", json!(file_name(path)));
        let ing = ingest(path, self.input_format(path), self.g.signed)?;
        if !ing.dropped.is_empty() {
            self.notes.push(format!(
                "note: ignoring labels with zero holdings: {}",
                ing.dropped.join(", ")
            ));
        }
        match ing.book {
            Book::Long(a) => Ok(a),
            Book::Signed(_) => Err(CliError::Usage(
                "this command needs a long-only book; use `signed` for long/short files".into(),
            )),
        }
    }

    fn max_options(&mut self) -> MaxOptions {
        self.flag("max_budget", json!(self.g.max_budget));
        MaxOptions {
            budget: self.g.max_budget,
            seed: self.g.seed,
            ..MaxOptions::default()
        }
    }

    fn psi_enabled(&mut self, a: &OwnershipMatrix) -> bool {
        let on = if self.g.psi {
            true
        } else if self.g.no_psi {
            false
        } else {
            a.n() + a.m() <= PSI_LABEL_LIMIT
        };
        self.flag("psi", json!(on));
        on
    }

    fn dispatch(&mut self, cmd: &Command) -> Result<String> {
        match cmd {
            Command::Dashboard { input } => self.dashboard(input),
            Command::Decompose { input } => self.decompose(input),
            Command::Psi { input } => self.psi(input),
            Command::Shock { input, delta, .. } => self.shock(input, delta.as_deref()),
            Command::Alpha {
                input,
                returns,
                project_returns,
            } => self.alpha(input, returns, *project_returns),
            Command::Merge {
                input,
                first,
                second,
            } => self.merge(input, first, second),
            Command::DropStock { input, stock } => self.drop_stock(input, stock),
            Command::Dilute { input, lambda } => self.dilute(input, *lambda),
            Command::Aggregate { input, partition } => self.aggregate(input, partition),
            Command::Family { kind } => self.family(kind),
            Command::Renyi { input, alpha } => self.renyi(input, *alpha),
            Command::Signed { input } => self.signed(input),
            Command::Export { input } => Ok(export_csv(&self.load(input)?)),
        }
    }

    fn dashboard(&mut self, input: &Path) -> Result<String> {
        let a = self.load(input)?;
        let opts = DashboardOptions {
            compute_psi: self.psi_enabled(&a),
            max: self.max_options(),
        };
        let dash = dashboard(&a, &opts)?;
        let contrib = dependence_index(&a)?;
        Ok(if self.json() {
            dashboard_json(&a, &dash, &contrib, &self.provenance())
        } else {
            dashboard_text(&a, &dash, &contrib)
        })
    }

    fn decompose(&mut self, input: &Path) -> Result<String> {
        let a = self.load(input)?;
        let dec = micro_decomposition(&a)?;
        let dep = dependence_index(&a)?;
        let m = summary(&a).m;
        let marg = a.marginals();
        let k: Vec<f64> = dec.k.iter().map(|&k| k as f64).collect();
        let l: Vec<f64> = dec.l.iter().map(|&l| l as f64).collect();
        let body = json!({
            "M": m,
            "X": dep.x,
            "investors": {
                "labels": a.investor_labels(), "p": marg.p, "c": dec.c, "support": dec.k,
                "M_terms": dec.investor_terms, "X_terms": dep.investor_contrib,
            },
            "stocks": {
                "labels": a.stock_labels(), "s": marg.s, "d": dec.d, "support": dec.l,
                "M_terms": dec.stock_terms, "X_terms": dep.stock_contrib,
            },
        });
        Ok(self.emit("decompose", body, || {
            let mut out = Table::new("").num("M", m).num("X", dep.x).render();
            out.push('\n');
            out.push_str(&vector_table(
                "investors",
                a.investor_labels(),
                &[
                    ("p", &marg.p),
                    ("c", &dec.c),
                    ("holdings", &k),
                    ("M term", &dec.investor_terms),
                    ("X term", &dep.investor_contrib),
                ],
            ));
            out.push('\n');
            out.push_str(&vector_table(
                "stocks",
                a.stock_labels(),
                &[
                    ("s", &marg.s),
                    ("d", &dec.d),
                    ("owners", &l),
                    ("M term", &dec.stock_terms),
                    ("X term", &dep.stock_contrib),
                ],
            ));
            out
        }))
    }

    fn psi(&mut self, input: &Path) -> Result<String> {
        let a = self.load(input)?;
        let opts = self.max_options();
        let score = sparsity_score(&a, &opts)?;
        let body = json!({
            "M": score.m_observed,
            "M_min": score.m_min,
            "M_max": score.m_max,
            "Psi": score.psi,
            "certification": { "psi_certified": score.certified },
        });
        Ok(self.emit("psi", body, || {
            Table::new("")
                .num("M", score.m_observed)
                .num("M_min", score.m_min)
                .num("M_max", score.m_max)
                .num("Psi", score.psi)
                .text(
                    "M_max",
                    if score.certified {
                        "certified"
                    } else {
                        "heuristic lower bound"
                    },
                )
                .render()
        }))
    }

    fn shock(&mut self, input: &Path, delta: Option<&Path>) -> Result<String> {
        let a = self.load(input)?;
        let res: FireSaleResult = match delta {
            Some(path) => {
                self.flag("delta", json!(file_name(path)));
                let d = read_vector(path, a.investor_labels(), "investor")?;
                fire_sale(&a, &d)?
            }
            None => {
                self.flag("worst", json!(true));
                worst_case_shock(&a)?
            }
        };
        let rho = rho(&a)?;
        let body = json!({
            "severity": res.severity,
            "parallel_term": res.parallel_term,
            "perp_term": res.perp_term,
            "bound": res.bound,
            "rho_squared": rho * rho,
            "investors": { "labels": a.investor_labels(), "delta_parallel": res.delta_parallel, "delta_perp": res.delta_perp },
            "stocks": { "labels": a.stock_labels(), "pressure": res.pressure, "impact": res.impact },
        });
        Ok(self.emit("shock", body, || {
            let mut out = Table::new("")
                .num("severity", res.severity)
                .num("market part", res.parallel_term)
                .num("overlap part", res.perp_term)
                .num("bound", res.bound)
                .num("rho^2", rho * rho)
                .render();
            out.push('\n');
            out.push_str(&vector_table(
                "stocks",
                a.stock_labels(),
                &[("pressure", &res.pressure), ("impact", &res.impact)],
            ));
            out
        }))
    }

    fn alpha(&mut self, input: &Path, returns: &Path, project: bool) -> Result<String> {
        let a = self.load(input)?;
        self.flag("returns", json!(file_name(returns)));
        self.flag("project_returns", json!(project));
        let r = read_vector(returns, a.stock_labels(), "stock")?;
        let res = active_variance(&a, &r, project)?;
        let body = json!({
            "variance": res.variance,
            "worst_case_bound": res.worst_case_bound,
            "investors": { "labels": a.investor_labels(), "alpha": res.alpha },
        });
        Ok(self.emit("alpha", body, || {
            let mut out = Table::new("")
                .num("V(alpha)", res.variance)
                .num("bound", res.worst_case_bound)
                .render();
            out.push('\n');
            out.push_str(&vector_table(
                "investors",
                a.investor_labels(),
                &[("alpha", &res.alpha)],
            ));
            out
        }))
    }

    fn investor(&self, a: &OwnershipMatrix, label: &str) -> Result<usize> {
        a.investor_index(label)
            .ok_or_else(|| CliError::Usage(format!("unknown investor {label:?}")))
    }

    fn merge(&mut self, input: &Path, first: &str, second: &str) -> Result<String> {
        let a = self.load(input)?;
        self.flag("investors", json!([first, second]));
        let (i, k) = (self.investor(&a, first)?, self.investor(&a, second)?);
        let d = merge_investors(&a, i, k)?;
        Ok(self.operation("merge", &d))
    }

    fn drop_stock(&mut self, input: &Path, stock: &str) -> Result<String> {
        let a = self.load(input)?;
        self.flag("stock", json!(stock));
        let j = a
            .stock_index(stock)
            .ok_or_else(|| CliError::Usage(format!("unknown stock {stock:?}")))?;
        let d = remove_stock(&a, j)?;
        Ok(self.operation("drop-stock", &d))
    }

    fn dilute(&mut self, input: &Path, lambda: f64) -> Result<String> {
        let a = self.load(input)?;
        self.flag("lambda", json!(lambda));
        let d = dilute(&a, lambda)?;
        Ok(self.operation("dilute", &d))
    }

    fn operation(&self, command: &str, d: &OperationDelta) -> String {
        let p = &d.predicted_after;
        let body = json!({
            "before": { "H_I": d.before.h_i, "H_S": d.before.h_s, "M": d.before.m, "X": d.before.x },
            "after": { "H_I": d.after.h_i, "H_S": d.after.h_s, "M": d.after.m, "X": d.after.x },
            "predicted": { "H_I": p.h_i, "H_S": p.h_s, "M": p.m, "X": p.x },
            "max_prediction_error": d.max_prediction_error(),
            "investors_after": d.matrix_after.investor_labels(),
            "dropped_investors": d.dropped_investors,
        });
        self.emit(command, body, || {
            let names = ["H_I", "H_S", "M", "X"];
            let before = [d.before.h_i, d.before.h_s, d.before.m, d.before.x];
            let after = [d.after.h_i, d.after.h_s, d.after.m, d.after.x];
            let pred = [p.h_i, p.h_s, p.m, p.x];
            let mut out = format!(
                "  {:<6}  {:>14}  {:>14}  {:>14}\n",
                "", "before", "after", "closed form"
            );
            for k in 0..4 {
                out.push_str(&format!(
                    "  {:<6}  {:>14}  {:>14}  {:>14}\n",
                    names[k],
                    sig6(before[k]),
                    sig6(after[k]),
                    pred[k].map_or("-".to_string(), sig6)
                ));
            }
            if !d.dropped_investors.is_empty() {
                out.push_str(&format!(
                    "\ndropped investors: {}\n",
                    d.dropped_investors.join(", ")
                ));
            }
            out
        })
    }

    fn aggregate(&mut self, input: &Path, partition: &Path) -> Result<String> {
        let a = self.load(input)?;
        self.flag("partition", json!(file_name(partition)));
        let part = read_partition(partition, &a)?;
        let agg = aggregate(&a, &part)?;
        let x = dependence_index(&a)?.x;
        let body = json!({
            "X": x,
            "between": agg.between,
            "within": agg.within,
            "groups": agg.merged.investor_labels(),
        });
        Ok(self.emit("aggregate", body, || {
            let mut out = Table::new("")
                .num("X", x)
                .num("between", agg.between)
                .num("within", agg.within)
                .render();
            out.push_str(&format!(
                "\ngroups: {}\n",
                agg.merged.investor_labels().join(", ")
            ));
            out
        }))
    }

    fn family(&mut self, kind: &FamilyKind) -> Result<String> {
        match *kind {
            FamilyKind::TwoByTwo { a, b, x } => {
                self.flag("a", json!(a));
                self.flag("b", json!(b));
                let f = family_2x2(a, b)?;
                let at_x = match x {
                    Some(x) if !(f.lo..=f.hi).contains(&x) => {
                        return Err(Error::OutOfRange(format!(
                            "x = {x} outside [{}, {}]",
                            f.lo, f.hi
                        ))
                        .into())
                    }
                    Some(x) => {
                        self.flag("x", json!(x));
                        Some(f.micro_at(x))
                    }
                    None => None,
                };
                let body = json!({
                    "x_range": [f.lo, f.hi],
                    "x_star": f.x_star,
                    "x_min": f.x_min,
                    "M_min": f.min_micro(),
                    "M_prod": f.product_micro(),
                    "M_at_x": at_x,
                });
                Ok(self.emit("family", body, || {
                    let mut t =
                        Table::new(format!("p = ({a}, {}), s = ({b}, {})", 1.0 - a, 1.0 - b))
                            .num("x lower", f.lo)
                            .num("x upper", f.hi)
                            .num("x*", f.x_star)
                            .num("x_min", f.x_min)
                            .num("M_min", f.min_micro())
                            .num("M_prod", f.product_micro());
                    if let Some(m) = at_x {
                        t = t.num("M(x)", m);
                    }
                    t.render()
                }))
            }
            FamilyKind::Nonid { t } => {
                self.flag("t", json!(t));
                let f = nonid_family(t)?;
                let s = summary(&f.matrix);
                let x = dependence_index(&f.matrix)?.x;
                let body = json!({
                    "matrix": [f.matrix.entries().row(0), f.matrix.entries().row(1)],
                    "H_I": s.h_i, "H_S": s.h_s, "M": s.m, "X": x,
                    "M_formula": f.m_formula, "X_formula": f.x_formula,
                });
                Ok(self.emit("family", body, || {
                    Table::new(format!("A({t})"))
                        .num("H_I", s.h_i)
                        .num("H_S", s.h_s)
                        .num("M", s.m)
                        .num("M formula", f.m_formula)
                        .num("X", x)
                        .num("X formula", f.x_formula)
                        .render()
                }))
            }
        }
    }

    fn renyi(&mut self, input: &Path, alpha: f64) -> Result<String> {
        let a = self.load(input)?;
        self.flag("alpha", json!(alpha));
        let r = renyi_summary(&a, alpha)?;
        let body = json!({
            "alpha": r.alpha, "H_I": r.h_i, "H_S": r.h_s, "M": r.m,
            "N_I": r.n_i, "N_S": r.n_s, "N_M": r.n_m,
        });
        Ok(self.emit("renyi", body, || {
            Table::new(format!("order {alpha}"))
                .num("C_I", r.h_i)
                .num("C_S", r.h_s)
                .num("C_M", r.m)
                .num("N_I", r.n_i)
                .num("N_S", r.n_s)
                .num("N_M", r.n_m)
                .render()
        }))
    }

    fn signed(&mut self, input: &Path) -> Result<String> {
        self.flag("input", json!(file_name(input)));
        self.flag("signed", json!(true));
        let book = match ingest(input, self.input_format(input), true)?.book {
            Book::Signed(b) => b,
            Book::Long(_) => unreachable!("signed ingestion yields a signed book"),
        };
        let value = signed_dependence(&book)?;
        let (pg, sg) = book.gross_marginals();
        let (pn, sn) = book.net_marginals();
        let eta = book.eta();
        let body = json!({
            "eta": eta,
            "signed_X": value,
            "investors": { "labels": book.investor_labels(), "gross": pg, "net": pn },
            "stocks": { "labels": book.stock_labels(), "gross": sg, "net": sn },
        });
        Ok(self.emit("signed", body, || {
            let mut out = Table::new("")
                .num("eta", eta)
                .num("signed X", value)
                .render();
            out.push('\n');
            out.push_str(&vector_table(
                "investors",
                book.investor_labels(),
                &[("gross", &pg), ("net", &pn)],
            ));
            out.push('\n');
            out.push_str(&vector_table(
                "stocks",
                book.stock_labels(),
                &[("gross", &sg), ("net", &sn)],
            ));
            out
        }))
    }
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Lines without a comma or starting with `#` are skipped.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, line)| {
        let line = line.trim();
        (!line.is_empty() && !line.starts_with('#'))
            .then(|| (k + 1, line.split(',').map(str::trim).collect()))
    })
}

/// Reads `label,value` lines; an optional non-numeric first line is a header.
pub fn read_vector(path: &Path, labels: &[String], what: &str) -> Result<Vec<f64>> {
    let text = read_text(path)?;
    let mut out = vec![0.0; labels.len()];
    let mut seen = vec![false; labels.len()];
    for (n, (line, fields)) in data_lines(&text).enumerate() {
        let [label, value] = fields[..] else {
            return Err(CliError::parse(path, line, "expected `label,value`"));
        };
        let Ok(x) = value.parse::<f64>() else {
            if n == 0 {
                continue;
            }
            return Err(CliError::parse(
                path,
                line,
                format!("cannot parse value {value:?}"),
            ));
        };
        if !x.is_finite() {
            return Err(CliError::parse(
                path,
                line,
                format!("value {x} is not finite"),
            ));
        }
        let Some(k) = labels.iter().position(|l| l == label) else {
            return Err(CliError::parse(
                path,
                line,
                format!("unknown {what} {label:?}"),
            ));
        };
        if std::mem::replace(&mut seen[k], true) {
            return Err(CliError::parse(
                path,
                line,
                format!("{what} {label:?} listed twice"),
            ));
        }
        out[k] = x;
    }
    Ok(out)
}

pub fn read_partition(path: &Path, a: &OwnershipMatrix) -> Result<Partition> {
    let text = read_text(path)?;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut taken = vec![false; a.n()];
    for line in text.lines().enumerate().filter_map(|(k, l)| {
        let l = l.trim();
        (!l.is_empty() && !l.starts_with('#')).then_some((k + 1, l))
    }) {
        let (n, l) = line;
        let mut group = Vec::new();
        for label in l.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let i = a
                .investor_index(label)
                .ok_or_else(|| CliError::parse(path, n, format!("unknown investor {label:?}")))?;
            if std::mem::replace(&mut taken[i], true) {
                return Err(CliError::parse(
                    path,
                    n,
                    format!("investor {label:?} appears twice"),
                ));
            }
            group.push(i);
        }
        if !group.is_empty() {
            groups.push(group);
        }
    }
    groups.extend((0..a.n()).filter(|&i| !taken[i]).map(|i| vec![i]));
    Ok(Partition::new(groups, a.n())?)
}
