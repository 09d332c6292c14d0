//! Records and their text, JSON and CSV renderings.

use std::io::Write;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

/// Ordered field list; every row of a report shares the same keys.
pub type Record = Vec<(String, Value)>;

pub fn field(key: &str, value: impl Into<Value>) -> (String, Value) {
    (key.to_string(), value.into())
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub rows: Vec<Record>,
    /// A single record rendered as one object instead of a list.
    pub single: bool,
    /// Field printed alone in text mode.
    pub primary: Option<&'static str>,
}

impl Report {
    pub fn one(command: &str, seed: u64, record: Record) -> Self {
        Report { command: command.into(), seed, rows: vec![record], single: true, primary: None }
    }

    pub fn many(command: &str, seed: u64, rows: Vec<Record>) -> Self {
        Report { command: command.into(), seed, rows, single: false, primary: None }
    }

    pub fn with_primary(mut self, key: &'static str) -> Self {
        self.primary = Some(key);
        self
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("command".into(), self.command.clone().into());
        obj.insert("seed".into(), self.seed.into());
        let as_obj = |r: &Record| Value::Object(r.iter().cloned().collect());
        if self.single {
            for (k, v) in &self.rows[0] {
                obj.insert(k.clone(), v.clone());
            }
        } else {
            obj.insert("rows".into(), Value::Array(self.rows.iter().map(as_obj).collect()));
        }
        Value::Object(obj)
    }

    pub fn write(&self, format: Format, out: &mut impl Write) -> std::io::Result<()> {
        match format {
            Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&self.to_json())?),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                if let Some(first) = self.rows.first() {
                    w.write_record(first.iter().map(|(k, _)| k.as_str()))?;
                }
                for r in &self.rows {
                    w.write_record(r.iter().map(|(_, v)| cell(v)))?;
                }
                w.flush()
            }
            Format::Text => self.write_text(out),
        }
    }

    fn write_text(&self, out: &mut impl Write) -> std::io::Result<()> {
        if self.single {
            let r = &self.rows[0];
            if let Some(v) = self.primary.and_then(|p| r.iter().find(|(k, _)| k == p)) {
                return writeln!(out, "{}", cell(&v.1));
            }
            let width = r.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in r {
                writeln!(out, "{k:<width$}  {}", cell(v))?;
            }
            return Ok(());
        }
        let Some(first) = self.rows.first() else {
            return Ok(());
        };
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(|(_, v)| cell(v)).collect()).collect();
        let mut widths: Vec<usize> = first.iter().map(|(k, _)| k.len()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let line = |items: Vec<&str>| {
            items
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        writeln!(out, "{}", line(first.iter().map(|(k, _)| k.as_str()).collect()))?;
        for row in &cells {
            writeln!(out, "{}", line(row.iter().map(String::as_str).collect()))?;
        }
        Ok(())
    }
}

/// Plain-text cell: strings unquoted, everything else in JSON syntax.
pub fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(r: &Report, f: Format) -> String {
        let mut buf = Vec::new();
        r.write(f, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn single_record_formats() {
        let r = Report::one("x", 7, vec![field("g", 2), field("value", "1/24")]);
        assert_eq!(render(&r, Format::Text), "g      2\nvalue  1/24\n");
        assert_eq!(render(&r.clone().with_primary("value"), Format::Text), "1/24\n");
        let j: Value = serde_json::from_str(&render(&r, Format::Json)).unwrap();
        assert_eq!(j["seed"], 7);
        assert_eq!(j["value"], "1/24");
        assert_eq!(render(&r, Format::Csv), "g,value\n2,1/24\n");
    }

    #[test]
    fn table_formats() {
        let rows = vec![vec![field("g", 1), field("v", "1/6")], vec![field("g", 10), field("v", "1/36")]];
        let r = Report::many("t", 0, rows);
        assert_eq!(render(&r, Format::Text), "g   v\n1   1/6\n10  1/36\n");
        let j: Value = serde_json::from_str(&render(&r, Format::Json)).unwrap();
        assert_eq!(j["rows"][1]["v"], "1/36");
    }
}
