//! Text and JSON rendering. JSON carries full-precision numbers; text rounds
//! to six significant digits.

use std::collections::BTreeMap;
use std::fmt::Write;

use ownconc_core::{DependenceReport, OwnershipMatrix};
use serde::Serialize;
use serde_json::{json, Value};

use crate::dashboard::Dashboard;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

/// Seed and flags recorded in every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub flags: BTreeMap<String, Value>,
}

/// Six significant digits; scientific notation outside `[1e-5, 1e7)`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..7).contains(&exp) {
        format!("{:.*}", (5 - exp).max(0) as usize, x)
    } else {
        sci
    }
}

/// Two-column fixed-width table.
#[derive(Debug, Default)]
pub struct Table {
    title: String,
    rows: Vec<(String, String)>,
}

impl Table {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            rows: Vec::new(),
        }
    }

    pub fn num(mut self, key: impl Into<String>, x: f64) -> Self {
        self.rows.push((key.into(), sig6(x)));
        self
    }

    pub fn text(mut self, key: impl Into<String>, v: impl Into<String>) -> Self {
        self.rows.push((key.into(), v.into()));
        self
    }

    pub fn render(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|(k, _)| k.chars().count())
            .max()
            .unwrap_or(0)
            .max(8);
        let mut out = String::new();
        if !self.title.is_empty() {
            writeln!(out, "{}", self.title).unwrap();
        }
        for (k, v) in &self.rows {
            writeln!(out, "  {k:<width$}  {v:>14}").unwrap();
        }
        out
    }
}

/// Labelled columns of numbers, one row per label.
pub fn vector_table(title: &str, labels: &[String], columns: &[(&str, &[f64])]) -> String {
    let lw = labels
        .iter()
        .map(|l| l.chars().count())
        .max()
        .unwrap_or(0)
        .max(5);
    let mut out = String::new();
    writeln!(out, "{title}").unwrap();
    write!(out, "  {:<lw$}", "label").unwrap();
    for (name, _) in columns {
        write!(out, "  {name:>14}").unwrap();
    }
    out.push('\n');
    for (k, label) in labels.iter().enumerate() {
        write!(out, "  {label:<lw$}").unwrap();
        for (_, col) in columns {
            write!(out, "  {:>14}", sig6(col[k])).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Wraps a command's payload with the schema version and provenance.
pub fn envelope(command: &str, body: Value, prov: &Provenance) -> String {
    let mut obj = match body {
        Value::Object(map) => map,
        other => {
            let mut m = serde_json::Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
    obj.insert("command".into(), json!(command));
    obj.insert("provenance".into(), serde_json::to_value(prov).unwrap());
    let mut s = serde_json::to_string_pretty(&Value::Object(obj)).unwrap();
    s.push('\n');
    s
}

pub fn dashboard_json(
    a: &OwnershipMatrix,
    dash: &Dashboard,
    contrib: &DependenceReport,
    prov: &Provenance,
) -> String {
    let marg = a.marginals();
    let body = json!({
        "labels": { "investors": a.investor_labels(), "stocks": a.stock_labels() },
        "marginals": { "p": marg.p, "s": marg.s },
        "dashboard": dash,
        "contributions": { "investor": contrib.investor_contrib, "stock": contrib.stock_contrib },
        "certification": { "psi_certified": dash.psi_certified, "psi_note": dash.psi_note },
    });
    envelope("dashboard", body, prov)
}

pub fn dashboard_text(a: &OwnershipMatrix, dash: &Dashboard, contrib: &DependenceReport) -> String {
    let psi = match (dash.psi, &dash.psi_note) {
        (Some(p), _) => sig6(p),
        (None, Some(note)) => format!("- ({note})"),
        (None, None) => "-".to_string(),
    };
    let table = Table::new(format!("{} investors x {} stocks", a.n(), a.m()))
        .num("H_I", dash.h_i)
        .num("H_S", dash.h_s)
        .num("M", dash.m)
        .text("Psi", psi)
        .num("X", dash.x)
        .num("rho", dash.rho)
        .num("N_I", dash.n_i)
        .num("N_S", dash.n_s)
        .num("N_M", dash.n_m)
        .text("certified", if dash.psi_certified { "yes" } else { "no" });
    let marg = a.marginals();
    let mut out = table.render();
    out.push('\n');
    out.push_str(&vector_table(
        "investors",
        a.investor_labels(),
        &[("p", &marg.p), ("X share", &contrib.investor_contrib)],
    ));
    out.push('\n');
    out.push_str(&vector_table(
        "stocks",
        a.stock_labels(),
        &[("s", &marg.s), ("X share", &contrib.stock_contrib)],
    ));
    out
}
