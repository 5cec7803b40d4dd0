use std::io::Write;

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Num(if v { 1.0 } else { 0.0 })
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn csv_field(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // non-finite values become null
            Cell::Num(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A column table plus the sweep's configuration, axes and free-form summary.
#[derive(Debug, Clone)]
pub struct Table {
    pub config: Value,
    pub axes: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Option<Value>,
}

impl Table {
    pub fn new(config: Value, columns: &[&str]) -> Self {
        Table {
            config,
            axes: Map::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            summary: None,
        }
    }

    pub fn axis(mut self, name: &str, values: &[f64]) -> Self {
        self.axes.insert(name.to_string(), json!(values));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_field))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let mut values = Map::new();
        for (k, name) in self.columns.iter().enumerate() {
            values.insert(name.clone(), Value::Array(self.rows.iter().map(|r| r[k].json()).collect()));
        }
        let mut top = Map::new();
        top.insert("config".into(), self.config.clone());
        top.insert("axes".into(), Value::Object(self.axes.clone()));
        top.insert("values".into(), Value::Object(values));
        if let Some(s) = &self.summary {
            top.insert("summary".into(), s.clone());
        }
        Value::Object(top)
    }

    pub fn write(&self, format: Format, mut out: impl Write) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out).map_err(std::io::Error::other),
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, &self.to_json())?;
                writeln!(out)
            }
        }
    }
}
