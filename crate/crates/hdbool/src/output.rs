//! CSV and JSON emitters.
//!
//! Floats are written with 17 significant digits in exponent notation, which
//! does not depend on locale and round-trips exactly.

use std::io::Write;

use serde_json::{Map, Number};

/// Line that closes every CSV table; a table without it is incomplete.
pub const TERMINATOR: &str = "# complete";

/// One cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Null,
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x)
    }
}

impl From<u32> for Value {
    fn from(x: u32) -> Self {
        Value::Int(x.into())
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_owned())
    }
}

impl From<Option<f64>> for Value {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Value::Null, Value::Num)
    }
}

/// `x` with 17 significant digits; `inf`, `-inf` and `nan` otherwise.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

impl Value {
    fn to_field(&self) -> String {
        match self {
            Value::Num(x) => format_float(*x),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
            Value::Null => String::new(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Num(x) => Number::from_f64(*x).map_or_else(|| format_float(*x).into(), serde_json::Value::Number),
            Value::Int(i) => (*i).into(),
            Value::Bool(b) => (*b).into(),
            Value::Text(s) => s.clone().into(),
            Value::Null => serde_json::Value::Null,
        }
    }
}

/// Ordered `(name, value)` pairs.
pub type Record = Vec<(String, Value)>;

/// Builds a [`Record`] from `name => value` pairs.
#[macro_export]
macro_rules! record {
    ($($k:expr => $v:expr),* $(,)?) => {
        vec![$(($k.to_string(), $crate::output::Value::from($v))),*]
    };
}

/// Streaming CSV table: comment lines, a header, rows flushed one by one,
/// then [`TERMINATOR`].
pub struct CsvTable<W: Write> {
    wtr: csv::Writer<W>,
}

impl<W: Write> CsvTable<W> {
    pub fn new(mut out: W, notes: &[String], header: &[&str]) -> csv::Result<Self> {
        for n in notes {
            writeln!(out, "# {n}")?;
        }
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(header)?;
        wtr.flush()?;
        Ok(Self { wtr })
    }

    pub fn row(&mut self, values: &[Value]) -> csv::Result<()> {
        self.wtr.write_record(values.iter().map(Value::to_field))?;
        self.wtr.flush()?;
        Ok(())
    }

    pub fn finish(self) -> csv::Result<W> {
        let mut out = self.wtr.into_inner().map_err(|e| e.into_error())?;
        writeln!(out, "{TERMINATOR}")?;
        out.flush()?;
        Ok(out)
    }
}

/// A whole table rendered in one of the two formats.
pub fn render_table(format: crate::Format, notes: &[String], rows: &[Record]) -> csv::Result<Vec<u8>> {
    match format {
        crate::Format::Csv => {
            let header: Vec<&str> = rows
                .first()
                .map(|r| r.iter().map(|(k, _)| k.as_str()).collect())
                .unwrap_or_default();
            let mut t = CsvTable::new(Vec::new(), notes, &header)?;
            for r in rows {
                t.row(&r.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>())?;
            }
            t.finish()
        }
        crate::Format::Json => {
            let doc = serde_json::json!({
                "notes": notes,
                "rows": rows.iter().map(record_json).collect::<Vec<_>>(),
            });
            Ok(json_bytes(&doc))
        }
    }
}

/// A key-value report: CSV with columns `quantity,value`, or a JSON object.
pub fn render_report(format: crate::Format, notes: &[String], record: &Record) -> csv::Result<Vec<u8>> {
    match format {
        crate::Format::Csv => {
            let mut t = CsvTable::new(Vec::new(), notes, &["quantity", "value"])?;
            for (k, v) in record {
                t.row(&[Value::Text(k.clone()), v.clone()])?;
            }
            t.finish()
        }
        crate::Format::Json => {
            let mut obj = record_json(record);
            obj.insert("notes".into(), serde_json::json!(notes));
            Ok(json_bytes(&serde_json::Value::Object(obj)))
        }
    }
}

pub fn record_json(record: &Record) -> Map<String, serde_json::Value> {
    record.iter().map(|(k, v)| (k.clone(), v.to_json())).collect()
}

fn json_bytes(doc: &serde_json::Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(doc).expect("JSON values serialize");
    bytes.push(b'\n');
    bytes
}
