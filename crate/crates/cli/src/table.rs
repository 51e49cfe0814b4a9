// SPDX-License-Identifier: Apache-2.0

//! Tabular output.
//!
//! CSV: metadata first, one `# key = <json>` comment line per entry, then a
//! header row of `name [unit]` cells, then one row per sample. Non-finite
//! values are written as `NaN`, `inf` or `-inf`.
//!
//! JSON: `{"columns": [{"name", "unit"}], "rows": [[...]], "metadata": {...}}`
//! with non-finite values as `null`.

use std::collections::BTreeMap;
use std::io::Write;

use serde_json::{json, Value};

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl OutputTable {
    pub fn column(&mut self, name: impl Into<String>, unit: impl Into<String>) {
        assert!(self.rows.is_empty(), "columns must be declared before rows");
        self.columns.push(Column { name: name.into(), unit: unit.into() });
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width differs from the header");
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.metadata.insert(key.to_owned(), value.into());
    }

    /// Values of one column, by name.
    pub fn values(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> CliResult<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.to_json()).map_err(std::io::Error::from)?;
                writeln!(out)?;
                Ok(())
            }
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> CliResult<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k} = {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| if c.unit.is_empty() { c.name.clone() } else { format!("{} [{}]", c.name, c.unit) }))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let cols: Vec<Value> = self.columns.iter().map(|c| json!({"name": c.name, "unit": c.unit})).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(|&x| serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)).collect()))
            .collect();
        json!({"columns": cols, "rows": rows, "metadata": self.metadata})
    }
}

/// JSON number, or `null` when not finite.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}
