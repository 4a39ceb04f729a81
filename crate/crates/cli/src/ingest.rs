//! Holdings files: `investor,stock,amount[,sign]` CSV or a JSON array of
//! records with the same fields.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use ownconc_core::{Matrix, OwnershipMatrix, SignedOwnership};
use serde::{Deserialize, Deserializer};

use crate::error::{CliError, Result};

/// Totals this close to one are read as shares and kept as written.
const SHARES_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Json,
}

impl InputFormat {
    /// `.json` files are JSON, everything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => InputFormat::Json,
            _ => InputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Long,
    #[serde(rename = "-")]
    Short,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoldingsRecord {
    pub investor: String,
    pub stock: String,
    #[serde(deserialize_with = "amount")]
    pub amount: f64,
    #[serde(default)]
    pub sign: Option<Sign>,
}

fn amount<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    let x = f64::deserialize(d)?;
    check_amount(x).map_err(serde::de::Error::custom)
}

fn check_amount(x: f64) -> std::result::Result<f64, String> {
    if !x.is_finite() {
        Err(format!("amount {x} is not finite"))
    } else if x < 0.0 {
        Err(format!("amount {x} is negative"))
    } else {
        Ok(x)
    }
}

/// Parsed records before aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct Holdings {
    pub records: Vec<HoldingsRecord>,
    /// Whether the file carried a sign column or field.
    pub has_sign: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Book {
    Long(OwnershipMatrix),
    Signed(SignedOwnership),
}

/// A normalized book plus the labels dropped for holding nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub book: Book,
    pub dropped: Vec<String>,
}

pub fn read_holdings(path: &Path, format: InputFormat) -> Result<Holdings> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        InputFormat::Csv => parse_csv(path, &text),
        InputFormat::Json => parse_json(path, &text),
    }
}

fn parse_csv(path: &Path, text: &str) -> Result<Holdings> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(1, |p| p.line() as usize);
        CliError::parse(path, line, e.to_string())
    };
    let header = rdr.headers().map_err(csv_err)?.clone();
    let names: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
    let has_sign = match names.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["investor", "stock", "amount"] => false,
        ["investor", "stock", "amount", "sign"] => true,
        [] | [""] => return Err(CliError::parse(path, 1, "empty file: expected a header")),
        _ => {
            return Err(CliError::parse(
                path,
                1,
                format!(
                    "expected header investor,stock,amount[,sign], found {:?}",
                    header.as_slice()
                ),
            ))
        }
    };

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let field = |k: usize| row.get(k).unwrap_or_default();
        let (investor, stock) = (field(0), field(1));
        if investor.is_empty() || stock.is_empty() {
            return Err(CliError::parse(path, line, "empty investor or stock label"));
        }
        let amount = field(2)
            .parse::<f64>()
            .map_err(|_| format!("cannot parse amount {:?}", field(2)))
            .and_then(check_amount)
            .map_err(|msg| CliError::parse(path, line, msg))?;
        let sign = if has_sign {
            match field(3) {
                "+" => Some(Sign::Long),
                "-" => Some(Sign::Short),
                other => {
                    return Err(CliError::parse(
                        path,
                        line,
                        format!("sign must be + or -, found {other:?}"),
                    ))
                }
            }
        } else {
            None
        };
        records.push(HoldingsRecord {
            investor: investor.to_string(),
            stock: stock.to_string(),
            amount,
            sign,
        });
    }
    if records.is_empty() {
        return Err(CliError::parse(path, 2, "no holdings records"));
    }
    Ok(Holdings { records, has_sign })
}

fn parse_json(path: &Path, text: &str) -> Result<Holdings> {
    let records: Vec<HoldingsRecord> = serde_json::from_str(text)
        .map_err(|e| CliError::parse(path, e.line().max(1), e.to_string()))?;
    if records.is_empty() {
        return Err(CliError::parse(path, 1, "no holdings records"));
    }
    if let Some(r) = records
        .iter()
        .find(|r| r.investor.is_empty() || r.stock.is_empty())
    {
        return Err(CliError::parse(
            path,
            1,
            format!("empty label in record {:?}/{:?}", r.investor, r.stock),
        ));
    }
    let has_sign = records.iter().any(|r| r.sign.is_some());
    Ok(Holdings { records, has_sign })
}

impl Holdings {
    /// Sums duplicates, orders labels lexicographically and normalizes.
    ///
    /// Absent (investor, stock) pairs are zero holdings.
    pub fn into_book(self, path: &Path, signed: bool) -> Result<Ingested> {
        if self.has_sign && !signed {
            return Err(CliError::MixedSignWithoutFlag(path.to_path_buf()));
        }
        let mut cells: BTreeMap<(&str, &str), (f64, f64)> = BTreeMap::new();
        let mut investors = BTreeSet::new();
        let mut stocks = BTreeSet::new();
        for r in &self.records {
            investors.insert(r.investor.as_str());
            stocks.insert(r.stock.as_str());
            let cell = cells.entry((&r.investor, &r.stock)).or_default();
            match r.sign {
                Some(Sign::Short) => cell.1 += r.amount,
                _ => cell.0 += r.amount,
            }
        }
        let inv: Vec<&str> = investors.into_iter().collect();
        let stk: Vec<&str> = stocks.into_iter().collect();
        let row_of: BTreeMap<&str, usize> = inv.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        let col_of: BTreeMap<&str, usize> = stk.iter().enumerate().map(|(j, l)| (*l, j)).collect();
        let mut long = Matrix::zeros(inv.len(), stk.len());
        let mut short = Matrix::zeros(inv.len(), stk.len());
        for ((i, s), (l, sh)) in &cells {
            long[(row_of[i], col_of[s])] = *l;
            short[(row_of[i], col_of[s])] = *sh;
        }
        let inv_labels: Vec<String> = inv.iter().map(|s| s.to_string()).collect();
        let stk_labels: Vec<String> = stk.iter().map(|s| s.to_string()).collect();

        if signed {
            let book = SignedOwnership::from_raw(&long, &short, inv_labels, stk_labels)?;
            return Ok(Ingested {
                book: Book::Signed(book),
                dropped: Vec::new(),
            });
        }
        let total = long.sum();
        let a = if (total - 1.0).abs() <= SHARES_TOL {
            OwnershipMatrix::new(long, inv_labels, stk_labels)?
        } else {
            OwnershipMatrix::normalize(&long, inv_labels, stk_labels)?
        };
        let active = a.restrict_active();
        let dropped = a
            .investor_labels()
            .iter()
            .filter(|l| active.investor_index(l).is_none())
            .chain(
                a.stock_labels()
                    .iter()
                    .filter(|l| active.stock_index(l).is_none()),
            )
            .cloned()
            .collect();
        Ok(Ingested {
            book: Book::Long(active),
            dropped,
        })
    }
}

/// Reads, aggregates and normalizes a holdings file.
pub fn ingest(path: &Path, format: InputFormat, signed: bool) -> Result<Ingested> {
    read_holdings(path, format)?.into_book(path, signed)
}

/// Writes the normalized matrix back out as a holdings CSV (nonzero cells).
pub fn export_csv(a: &OwnershipMatrix) -> String {
    let mut out = String::from("investor,stock,amount\n");
    for (i, j, x) in a.entries().iter() {
        if x > 0.0 {
            out.push_str(&format!(
                "{},{},{}\n",
                csv_field(&a.investor_labels()[i]),
                csv_field(&a.stock_labels()[j]),
                x
            ));
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
