//! Text format for cosine-series tables.
//!
//! ```text
//! # comment
//! a0 1.0
//! term 0.05 0.0
//! ```
//!
//! Exactly one `a0` line, then zero or more `term <amplitude> <phase>` lines
//! in harmonic order (first `term` is j = 1). Blank lines and `#` comments
//! are ignored; anything else is an error.

use super::table::{table_from_cosine_series, ConvexTable, CosineTerm};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub a0: f64,
    pub terms: Vec<CosineTerm>,
}

impl TableSpec {
    pub fn build(&self) -> Result<ConvexTable> {
        table_from_cosine_series(self.a0, &self.terms)
    }
}

fn number(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::InvalidInput(format!("line {line}: missing number")))?;
    let v: f64 = tok.parse().map_err(|_| Error::InvalidInput(format!("line {line}: '{tok}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::InvalidInput(format!("line {line}: non-finite value")));
    }
    Ok(v)
}

pub fn parse_table(text: &str) -> Result<TableSpec> {
    let mut a0 = None;
    let mut terms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("a0") => {
                if a0.is_some() {
                    return Err(Error::InvalidInput(format!("line {line_no}: duplicate a0")));
                }
                if !terms.is_empty() {
                    return Err(Error::InvalidInput(format!("line {line_no}: a0 must precede terms")));
                }
                a0 = Some(number(toks.next(), line_no)?);
            }
            Some("term") => {
                if a0.is_none() {
                    return Err(Error::InvalidInput(format!("line {line_no}: term before a0")));
                }
                let amplitude = number(toks.next(), line_no)?;
                let phase = number(toks.next(), line_no)?;
                terms.push(CosineTerm { amplitude, phase });
            }
            Some(other) => {
                return Err(Error::InvalidInput(format!("line {line_no}: unknown keyword '{other}'")));
            }
            None => unreachable!(),
        }
        if let Some(extra) = toks.next() {
            return Err(Error::InvalidInput(format!("line {line_no}: unexpected token '{extra}'")));
        }
    }
    let a0 = a0.ok_or_else(|| Error::InvalidInput("missing a0 line".into()))?;
    Ok(TableSpec { a0, terms })
}

pub fn render_table(spec: &TableSpec) -> String {
    let mut out = format!("a0 {:?}\n", spec.a0);
    for t in &spec.terms {
        out.push_str(&format!("term {:?} {:?}\n", t.amplitude, t.phase));
    }
    out
}
