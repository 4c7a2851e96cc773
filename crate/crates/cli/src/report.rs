//! Ordered key/value reports rendered as aligned tables or JSON.

use std::fmt::Display;

use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: String,
    pub rows: Vec<(String, Value)>,
    /// Lines printed verbatim in table format (selftest PASS/FAIL lines).
    pub lines: Vec<String>,
    /// Print only `lines` in table format.
    pub quiet_rows: bool,
    pub violations: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            ..Report::default()
        }
    }

    pub fn row(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.rows.push((key.into(), value.into()));
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl Display) {
        self.row(key, value.to_string());
    }

    pub fn violation(&mut self, msg: impl Into<String>) {
        self.violations.push(msg.into());
    }

    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.table(),
            Format::Json => {
                let mut results = Map::new();
                for (k, v) in &self.rows {
                    results.insert(k.clone(), v.clone());
                }
                let mut doc = json!({
                    "command": self.command,
                    "ok": self.ok(),
                    "results": results,
                    "violations": self.violations,
                });
                if !self.lines.is_empty() {
                    doc["lines"] = json!(self.lines);
                }
                let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
                s.push('\n');
                s
            }
        }
    }

    fn table(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|(k, _)| k.chars().count())
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        for (k, v) in self.rows.iter().filter(|_| !self.quiet_rows) {
            let v = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            let pad = width - k.chars().count();
            out.push_str(&format!("{k}{}  {v}\n", " ".repeat(pad)));
        }
        for v in &self.violations {
            out.push_str(&format!("VIOLATION: {v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_aligns_keys() {
        let mut r = Report::new("x");
        r.text("a", 1);
        r.text("long key", "v");
        assert_eq!(r.render(Format::Table), "a         1\nlong key  v\n");
    }

    #[test]
    fn json_reports_violations() {
        let mut r = Report::new("x");
        r.violation("bad");
        let v: Value = serde_json::from_str(&r.render(Format::Json)).unwrap();
        assert_eq!(v["ok"], json!(false));
        assert_eq!(v["violations"][0], json!("bad"));
    }
}
