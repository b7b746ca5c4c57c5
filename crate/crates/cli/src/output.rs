//! Result rows and their CSV / JSON serialization.
//!
//! Floats are written with 17 significant digits in scientific notation so
//! that every value round-trips exactly. Both formats carry the same keys in
//! the same order.

use std::io::Write;

use anyhow::{bail, Result};

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i128),
    Float(f64),
    Str(String),
    Bool(bool),
    FloatList(Vec<f64>),
    IntList(Vec<i128>),
    Null,
}

impl From<i128> for Value {
    fn from(v: i128) -> Self {
        Value::Int(v)
    }
}

macro_rules! int_value {
    ($($t:ty),*) => {
        $(impl From<$t> for Value {
            fn from(v: $t) -> Self {
                Value::Int(v as i128)
            }
        })*
    };
}
int_value!(u32, u64, usize, i64);

impl From<u128> for Value {
    fn from(v: u128) -> Self {
        i128::try_from(v).map(Value::Int).unwrap_or(Value::Float(v as f64))
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

pub fn format_float(x: f64) -> Option<String> {
    x.is_finite().then(|| format!("{x:.16e}"))
}

fn float_list_json(xs: &[f64]) -> String {
    let items: Vec<String> = xs
        .iter()
        .map(|&x| format_float(x).unwrap_or_else(|| "null".to_string()))
        .collect();
    format!("[{}]", items.join(","))
}

fn int_list_json(xs: &[i128]) -> String {
    let items: Vec<String> = xs.iter().map(i128::to_string).collect();
    format!("[{}]", items.join(","))
}

impl Value {
    fn csv_cell(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) => format_float(*v).unwrap_or_default(),
            Value::Str(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
            Value::FloatList(xs) => float_list_json(xs),
            Value::IntList(xs) => int_list_json(xs),
            Value::Null => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) => format_float(*v).unwrap_or_else(|| "null".to_string()),
            Value::Str(s) => serde_json::to_string(s).expect("strings always serialize"),
            Value::Bool(b) => b.to_string(),
            Value::FloatList(xs) => float_list_json(xs),
            Value::IntList(xs) => int_list_json(xs),
            Value::Null => "null".to_string(),
        }
    }
}

/// Flat, ordered key-value record.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultRow {
    fields: Vec<(&'static str, Value)>,
}

impl ResultRow {
    pub fn new(subcommand: &str) -> Self {
        Self::default()
            .with("schema_version", SCHEMA_VERSION)
            .with("subcommand", subcommand)
    }

    pub fn with(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.fields.push((key, value.into()));
        self
    }

    pub fn push(&mut self, key: &'static str, value: impl Into<Value>) {
        self.fields.push((key, value.into()));
    }

    pub fn keys(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.fields.iter().map(|(k, _)| *k)
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn check_schema(rows: &[ResultRow]) -> Result<()> {
    if let Some(first) = rows.first() {
        let keys: Vec<_> = first.keys().collect();
        if rows.iter().any(|r| r.keys().collect::<Vec<_>>() != keys) {
            bail!("rows of one run must share a schema");
        }
    }
    Ok(())
}

pub fn write_rows<W: Write>(rows: &[ResultRow], format: Format, out: W) -> Result<()> {
    check_schema(rows)?;
    match format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(rows, out),
    }
}

fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    if let Some(first) = rows.first() {
        w.write_record(first.keys())?;
    }
    for row in rows {
        w.write_record(row.fields.iter().map(|(_, v)| v.csv_cell()))?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    writeln!(out, "[")?;
    for (i, row) in rows.iter().enumerate() {
        let body: Vec<String> = row
            .fields
            .iter()
            .map(|(k, v)| Ok(format!("{}:{}", serde_json::to_string(k)?, v.json())))
            .collect::<std::result::Result<_, serde_json::Error>>()?;
        let sep = if i + 1 == rows.len() { "" } else { "," };
        writeln!(out, "{{{}}}{sep}", body.join(","))?;
    }
    writeln!(out, "]")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<ResultRow> {
        vec![
            ResultRow::new("demo")
                .with("n", 4u32)
                .with("p", 0.6875)
                .with("label", "a,b")
                .with("norms", Value::FloatList(vec![0.0, 1.0]))
                .with("missing", Option::<f64>::None),
            ResultRow::new("demo")
                .with("n", 5u32)
                .with("p", 0.1)
                .with("label", "q\"x")
                .with("norms", Value::FloatList(vec![]))
                .with("missing", Some(f64::NAN)),
        ]
    }

    #[test]
    fn floats_round_trip_with_17_digits() {
        for x in [0.1, 1.0 / 3.0, 0.6875, 1e-300, 123456.789] {
            let s = format_float(x).unwrap();
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let digits = s.split('e').next().unwrap().replace('.', "");
            assert_eq!(digits.trim_start_matches('-').len(), 17);
        }
        assert_eq!(format_float(f64::INFINITY), None);
    }

    #[test]
    fn csv_and_json_carry_the_same_data() {
        let rows = sample();
        let mut csv_out = Vec::new();
        write_rows(&rows, Format::Csv, &mut csv_out).unwrap();
        let mut json_out = Vec::new();
        write_rows(&rows, Format::Json, &mut json_out).unwrap();

        let parsed: serde_json::Value = serde_json::from_slice(&json_out).unwrap();
        let mut reader = csv::Reader::from_reader(&csv_out[..]);
        let headers = reader.headers().unwrap().clone();
        for (record, obj) in reader.records().zip(parsed.as_array().unwrap()) {
            let record = record.unwrap();
            let obj = obj.as_object().unwrap();
            let mut want: Vec<&str> = headers.iter().collect();
            want.sort_unstable();
            assert_eq!(obj.keys().map(String::as_str).collect::<Vec<_>>(), want);
            for (key, cell) in headers.iter().zip(record.iter()) {
                let v = &obj[key];
                match v {
                    serde_json::Value::String(s) => assert_eq!(s, cell),
                    serde_json::Value::Null => assert_eq!(cell, ""),
                    serde_json::Value::Number(num) => {
                        assert_eq!(num.as_f64().unwrap(), cell.parse::<f64>().unwrap())
                    }
                    serde_json::Value::Array(_) => {
                        let from_cell: serde_json::Value = serde_json::from_str(cell).unwrap();
                        assert_eq!(&from_cell, v);
                    }
                    other => assert_eq!(other.to_string(), cell),
                }
            }
        }
    }

    #[test]
    fn mixed_schemas_are_rejected() {
        let rows = vec![ResultRow::new("a").with("x", 1u32), ResultRow::new("a").with("y", 1u32)];
        assert!(write_rows(&rows, Format::Csv, Vec::new()).is_err());
    }
}
