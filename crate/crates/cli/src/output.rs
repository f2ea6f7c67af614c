use serde::Serialize;
use serde_json::Value;

use crate::args::Format;
use crate::error::CliError;

/// Header plus rows, all rendered as text.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// One row holding every scalar leaf of `value`, keyed by dotted path.
    pub fn flat(value: &Value) -> Self {
        let mut leaves = Vec::new();
        flatten("", value, &mut leaves);
        let (columns, row) = leaves.into_iter().unzip();
        Self { columns, rows: vec![row] }
    }

    /// One row per element of a JSON array of objects.
    pub fn from_records(records: &[Value]) -> Self {
        let mut table = Table::default();
        for (i, r) in records.iter().enumerate() {
            let mut leaves = Vec::new();
            flatten("", r, &mut leaves);
            if i == 0 {
                table.columns = leaves.iter().map(|l| l.0.clone()).collect();
            }
            table.rows.push(leaves.into_iter().map(|l| l.1).collect());
        }
        table
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        // long vectors belong in their own table
        Value::Array(_) => {}
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Result of one command.
#[derive(Debug, Clone)]
pub struct Report {
    pub value: Value,
    pub table: Table,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    Inconclusive(String),
    ChecksFailed(usize),
}

impl Report {
    pub fn new(value: impl Serialize) -> Result<Self, CliError> {
        let value = serde_json::to_value(value)?;
        let table = Table::flat(&value);
        Ok(Self { value, table, status: Status::Ok })
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = table;
        self
    }

    pub fn inconclusive_if(mut self, flag: bool, reason: impl Into<String>) -> Self {
        if flag {
            self.status = Status::Inconclusive(reason.into());
        }
        self
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Json => {
                // serde_json maps are ordered, so keys come out sorted
                let mut s = serde_json::to_string_pretty(&self.value)?;
                s.push('\n');
                Ok(s.into_bytes())
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.table.columns)?;
                for row in &self.table.rows {
                    w.write_record(row)?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.into_error()))
            }
        }
    }
}
