//! Check rows, summaries and CSV emission.
//!
//! CSV output starts with `#`-prefixed provenance lines followed by a header
//! and one line per row. Nothing time-dependent is written, so identical
//! inputs give identical bytes.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A scalar on either side of a comparison.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Real(f64),
    Complex(C64),
    Int(String),
    Text(String),
}

impl Value {
    pub fn render(&self) -> String {
        match self {
            Value::Real(x) => format!("{x:.15e}"),
            Value::Complex(z) => {
                let sign = if z.im.is_sign_negative() { '-' } else { '+' };
                format!("{:.15e}{sign}{:.15e}i", z.re, z.im.abs())
            }
            Value::Int(s) | Value::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

impl From<C64> for Value {
    fn from(z: C64) -> Self {
        Value::Complex(z)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub check: String,
    /// Identity the row checks; stable and machine readable.
    pub tag: &'static str,
    pub fixture: String,
    pub lhs: Value,
    pub rhs: Value,
    pub err: f64,
    pub tol: f64,
    pub pass: bool,
    pub detail: String,
}

impl Row {
    /// `pass` iff `err ≤ tol`.
    pub fn compare(check: impl Into<String>, tag: &'static str, fixture: &str, lhs: Value, rhs: Value, err: f64, tol: f64) -> Self {
        Self {
            check: check.into(),
            tag,
            fixture: fixture.into(),
            lhs,
            rhs,
            err,
            tol,
            pass: err <= tol,
            detail: String::new(),
        }
    }

    pub fn complex(check: impl Into<String>, tag: &'static str, fixture: &str, lhs: C64, rhs: C64, tol: f64) -> Self {
        let err = (lhs - rhs).norm();
        Self::compare(check, tag, fixture, lhs.into(), rhs.into(), err, tol)
    }

    /// A row that passes or fails on a predicate rather than a tolerance.
    pub fn flag(check: impl Into<String>, tag: &'static str, fixture: &str, lhs: Value, rhs: Value, pass: bool) -> Self {
        Self {
            check: check.into(),
            tag,
            fixture: fixture.into(),
            lhs,
            rhs,
            err: if pass { 0.0 } else { 1.0 },
            tol: 0.0,
            pass,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub suite: String,
    pub fixture: String,
    pub seed: u64,
    pub version: String,
    pub config_hash: String,
    /// Flag settings that influence the rows, as `key=value` pairs.
    pub flags: Vec<(String, String)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
}

impl Summary {
    pub fn total(&self) -> usize {
        self.passed + self.failed
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
    pub provenance: Provenance,
}

impl Report {
    pub fn new(provenance: Provenance) -> Self {
        Self { rows: Vec::new(), provenance }
    }

    pub fn summary(&self) -> Summary {
        let passed = self.rows.iter().filter(|r| r.pass).count();
        Summary { passed, failed: self.rows.len() - passed }
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn to_csv(&self) -> Result<String> {
        let p = &self.provenance;
        let mut out = String::new();
        writeln!(out, "# wnfi {}", p.version).unwrap();
        writeln!(out, "# suite={} fixture={} seed={}", p.suite, p.fixture, p.seed).unwrap();
        writeln!(out, "# config_sha256={}", p.config_hash).unwrap();
        if !p.flags.is_empty() {
            let flags: Vec<String> = p.flags.iter().map(|(k, v)| format!("{k}={v}")).collect();
            writeln!(out, "# flags {}", flags.join(" ")).unwrap();
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["check", "tag", "fixture", "lhs", "rhs", "err", "tol", "pass", "detail"])
            .map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.check.as_str(),
                r.tag,
                r.fixture.as_str(),
                &r.lhs.render(),
                &r.rhs.render(),
                &format!("{:.6e}", r.err),
                &format!("{:.6e}", r.tol),
                if r.pass { "true" } else { "false" },
                r.detail.as_str(),
            ])
            .map_err(io)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        out.push_str(&String::from_utf8(body).expect("csv writes utf-8"));
        Ok(out)
    }

    /// Short human-readable summary: counts, then each failing row.
    pub fn render_summary(&self) -> String {
        let s = self.summary();
        let p = &self.provenance;
        let mut out = String::new();
        writeln!(out, "suite {} on {}: {} passed, {} failed ({} checks)", p.suite, p.fixture, s.passed, s.failed, s.total())
            .unwrap();
        let mut tags: Vec<&str> = self.rows.iter().map(|r| r.tag).collect();
        tags.sort_unstable();
        tags.dedup();
        for tag in tags {
            let rows: Vec<&Row> = self.rows.iter().filter(|r| r.tag == tag).collect();
            let bad = rows.iter().filter(|r| !r.pass).count();
            let worst = rows.iter().map(|r| r.err).fold(0.0f64, f64::max);
            writeln!(out, "  {tag:<28} {:>4} rows  {bad:>3} failed  max err {worst:.3e}", rows.len()).unwrap();
        }
        for r in self.failures() {
            writeln!(
                out,
                "  FAIL {} [{}]: lhs={} rhs={} err={:.3e} tol={:.3e} {}",
                r.check,
                r.tag,
                r.lhs.render(),
                r.rhs.render(),
                r.err,
                r.tol,
                r.detail
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance {
            suite: "x".into(),
            fixture: "f".into(),
            seed: 1,
            version: TOOL_VERSION.into(),
            config_hash: "00".into(),
            flags: vec![("tol".into(), "1e-6".into())],
        }
    }

    #[test]
    fn csv_layout_and_summary() {
        let mut r = Report::new(prov());
        r.rows.push(Row::complex("a", "t", "f", C64::new(1.0, -2.0), C64::new(1.0, -2.0), 1e-12));
        r.rows.push(Row::flag("b", "u", "f", Value::Int("3".into()), Value::Int("4".into()), false).with_detail("x, y"));
        let csv = r.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# wnfi "));
        assert_eq!(lines[4], "check,tag,fixture,lhs,rhs,err,tol,pass,detail");
        assert!(lines[5].contains("1.000000000000000e0-2.000000000000000e0i"));
        assert!(lines[6].ends_with("false,\"x, y\""));
        assert_eq!(r.summary(), Summary { passed: 1, failed: 1 });
        assert!(!r.passed());
        assert!(r.render_summary().contains("FAIL b"));
    }

    #[test]
    fn empty_report_passes() {
        let r = Report::new(prov());
        assert!(r.passed());
        assert_eq!(r.summary().total(), 0);
    }
}
