//! Plain CSV tables with a `# key: value` metadata header.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a table
//! written and parsed back reproduces every value bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            metadata: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a metadata entry. Values must fit on one line.
    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        let value = value.to_string().replace('\n', " ");
        self.metadata.push((key.into(), value));
        self
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Data(format!("missing column '{name}'")))
    }

    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column_index(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[idx]
                    .parse::<f64>()
                    .map_err(|e| Error::Data(format!("column '{name}': {e}")))
            })
            .collect()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut table = Table::default();
        let mut lines = text.lines();
        for line in lines.by_ref() {
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .trim_start()
                    .split_once(": ")
                    .ok_or_else(|| Error::Data(format!("malformed metadata line '{line}'")))?;
                table.metadata.push((k.to_string(), v.to_string()));
            } else {
                table.columns = line.split(',').map(str::to_string).collect();
                break;
            }
        }
        if table.columns.is_empty() {
            return Err(Error::Data("table has no column header".into()));
        }
        for line in lines.filter(|l| !l.is_empty()) {
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            if row.len() != table.columns.len() {
                return Err(Error::Data(format!(
                    "row has {} fields, expected {}",
                    row.len(),
                    table.columns.len()
                )));
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Shortest round-trip text for a float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}
