//! Check reports with a text and a structured (JSON) rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub measured: f64,
    pub relation: Relation,
    pub tolerance: f64,
}

impl Check {
    /// Passes when `measured <= tolerance` (NaN fails).
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        let ok = measured <= tolerance;
        Check {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured,
            relation: Relation::AtMost,
            tolerance,
        }
    }

    /// Passes when `measured >= tolerance` (NaN fails).
    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        let ok = measured >= tolerance;
        Check {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured,
            relation: Relation::AtLeast,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<serde_json::Value>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<serde_json::Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Tab-separated rendering with a header line.
    pub fn to_tsv(&self) -> String {
        let mut s = self.columns.join("\t");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(cell_text).collect();
            s.push_str(&cells.join("\t"));
            s.push('\n');
        }
        s
    }
}

fn cell_text(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format!("{f:.10e}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub config: BTreeMap<String, serde_json::Value>,
    pub config_digest: String,
    pub checks: Vec<Check>,
    pub values: BTreeMap<String, serde_json::Value>,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
    pub verdict: Status,
}

impl Report {
    pub fn new(command: impl Into<String>, config: BTreeMap<String, serde_json::Value>) -> Self {
        let command = command.into();
        let canonical = serde_json::to_string(&(&command, &config)).expect("config serialises");
        let digest = Sha256::digest(canonical.as_bytes());
        let config_digest = digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Report {
            command,
            config,
            config_digest,
            checks: Vec::new(),
            values: BTreeMap::new(),
            tables: Vec::new(),
            notes: Vec::new(),
            verdict: Status::Pass,
        }
    }

    pub fn check(&mut self, c: Check) {
        if !c.passed() {
            self.verdict = Status::Fail;
        }
        self.checks.push(c);
    }

    pub fn value(&mut self, key: &str, v: impl Serialize) {
        self.values.insert(key.to_string(), serde_json::to_value(v).expect("value serialises"));
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn passed(&self) -> bool {
        self.verdict == Status::Pass
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect()
    }

    pub fn to_structured(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command: {}", self.command);
        for (k, v) in &self.config {
            let _ = writeln!(s, "  {k} = {}", cell_text(v));
        }
        let _ = writeln!(s, "config digest: {}", self.config_digest);
        if !self.values.is_empty() {
            let _ = writeln!(s, "values:");
            for (k, v) in &self.values {
                let _ = writeln!(s, "  {k} = {}", cell_text(v));
            }
        }
        for t in &self.tables {
            let _ = writeln!(s, "table {}:", t.name);
            for line in t.to_tsv().lines() {
                let _ = writeln!(s, "  {line}");
            }
        }
        let _ = writeln!(s, "checks:");
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let rel = match c.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
            };
            let _ =
                writeln!(s, "  {} {:width$}  {:.6e} {rel} {:.3e}", c.status.label(), c.name, c.measured, c.tolerance);
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let _ = writeln!(s, "verdict: {}", self.verdict.label());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_tracks_checks() {
        let mut r = Report::new("demo", BTreeMap::new());
        r.check(Check::at_most("small", 1e-12, 1e-10));
        assert!(r.passed());
        r.check(Check::at_least("control", 1e-3, 1e-2));
        assert!(!r.passed());
        assert_eq!(r.failing(), vec!["control"]);
        r.check(Check::at_most("nan", f64::NAN, 1.0));
        assert_eq!(r.failing().len(), 2);
    }

    #[test]
    fn digest_depends_on_config_only() {
        let mut c = BTreeMap::new();
        c.insert("n".to_string(), serde_json::json!(3));
        let a = Report::new("x", c.clone());
        let mut b = Report::new("x", c.clone());
        b.check(Check::at_most("c", 0.0, 1.0));
        assert_eq!(a.config_digest, b.config_digest);
        c.insert("n".to_string(), serde_json::json!(4));
        assert_ne!(a.config_digest, Report::new("x", c).config_digest);
        assert_eq!(a.config_digest.len(), 64);
    }
}
