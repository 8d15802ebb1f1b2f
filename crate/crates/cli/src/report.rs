//! Check rows and numeric tables, written as CSV or JSON.

use std::io::Write;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One verified quantity. `bound` is absent for purely informational rows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub suite: &'static str,
    pub quantity: String,
    pub computed: f64,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
    pub pass: bool,
}

impl Row {
    /// `computed <= bound`.
    pub fn at_most(
        suite: &'static str,
        quantity: impl Into<String>,
        computed: f64,
        bound: f64,
    ) -> Row {
        Row {
            suite,
            quantity: quantity.into(),
            computed,
            bound: Some(bound),
            ratio: Some(if computed == 0.0 {
                0.0
            } else if bound > 0.0 {
                computed / bound
            } else {
                f64::INFINITY
            }),
            pass: computed <= bound,
        }
    }

    pub fn flag(
        suite: &'static str,
        quantity: impl Into<String>,
        computed: f64,
        pass: bool,
    ) -> Row {
        Row {
            suite,
            quantity: quantity.into(),
            computed,
            bound: None,
            ratio: None,
            pass,
        }
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[Row], format: Format) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()
        }
        Format::Json => write_json(out, &rows),
    }
}

/// Columns of numbers, one header per column.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: Vec<&'static str>) -> Table {
        Table {
            headers,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.headers.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn write_table<W: Write>(out: W, table: &Table, format: Format) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.headers)?;
            for r in &table.rows {
                w.write_record(r.iter().map(|v| v.to_string()))?;
            }
            w.flush()
        }
        Format::Json => {
            let objects: Vec<serde_json::Map<String, serde_json::Value>> = table
                .rows
                .iter()
                .map(|r| {
                    table
                        .headers
                        .iter()
                        .zip(r)
                        .map(|(h, v)| (h.to_string(), serde_json::json!(v)))
                        .collect()
                })
                .collect();
            write_json(out, &objects)
        }
    }
}

fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)
}
