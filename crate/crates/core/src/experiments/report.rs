use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// Schema tag written into every JSON sidecar.
pub const SCHEMA: &str = "riskrobust-report-v1";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_number(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn parse(text: &str) -> Cell {
        if let Ok(v) = text.parse::<u64>() {
            return Cell::Int(v);
        }
        match text {
            "inf" => return Cell::Num(f64::INFINITY),
            "-inf" => return Cell::Num(f64::NEG_INFINITY),
            "nan" => return Cell::Num(f64::NAN),
            _ => {}
        }
        match text.parse::<f64>() {
            Ok(v) => Cell::Num(v),
            Err(_) => Cell::Text(text.to_string()),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => json!(format_number(*v)),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Twelve significant digits; fixed notation for decimal exponents in
/// `[-5, 12)`, scientific otherwise, trailing zeros trimmed.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let rounded: f64 = sci.parse().expect("round trip");
        trim_zeros(format!("{rounded:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

/// Tabular experiment output with free-form metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub kind: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: BTreeMap<String, Value>,
}

impl ExperimentReport {
    pub fn new(kind: &str, columns: &[&str]) -> Self {
        ExperimentReport {
            kind: kind.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn set_meta<V: Into<Value>>(&mut self, key: &str, value: V) {
        self.metadata.insert(key.to_string(), value.into());
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column (non-numeric cells become NaN).
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else {
            return Vec::new();
        };
        self.rows.iter().map(|r| r[i].as_f64().unwrap_or(f64::NAN)).collect()
    }

    /// CSV with a header row and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    /// Read back the rows of [`ExperimentReport::to_csv`]; kind and
    /// metadata come from the sidecar and are left empty here.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let columns: Vec<String> = r
            .headers()
            .map_err(|e| Error::Parse(format!("report header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::Parse(format!("report row: {e}")))?;
            if rec.len() != columns.len() {
                return Err(Error::Parse(format!("row has {} cells, header has {}", rec.len(), columns.len())));
            }
            rows.push(rec.iter().map(Cell::parse).collect());
        }
        Ok(ExperimentReport {
            kind: String::new(),
            columns,
            rows,
            metadata: BTreeMap::new(),
        })
    }

    /// Metadata sidecar accompanying the CSV.
    pub fn sidecar(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "kind": self.kind,
            "columns": self.columns,
            "row_count": self.rows.len(),
            "metadata": self.metadata,
        })
    }

    /// Whole report as one JSON document.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (c, cell) in self.columns.iter().zip(row) {
                    obj.insert(c.clone(), cell.to_json());
                }
                Value::Object(obj)
            })
            .collect();
        json!({
            "schema": SCHEMA,
            "kind": self.kind,
            "columns": self.columns,
            "metadata": self.metadata,
            "rows": rows,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(1000.0), "1000");
        assert_eq!(format_number(-2.0627), "-2.0627");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(2.0 / 3.0 * 1e-7), "6.66666666667e-8");
        assert_eq!(format_number(1.5e20), "1.5e20");
        assert_eq!(format_number(f64::INFINITY), "inf");
        assert_eq!(format_number(0.0), "0");
    }

    #[test]
    fn empty_and_single_row() {
        let mut r = ExperimentReport::new("demo", &["theta", "d", "note"]);
        assert_eq!(r.to_csv(), "theta,d,note\n");
        r.push_row(vec![0.1.into(), 0.25.into(), "a, quoted".into()]);
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 2);
        assert!(!csv.contains('\r'));
        assert_eq!(ExperimentReport::from_csv(&csv).unwrap().to_csv(), csv);
    }

    #[test]
    fn sidecar_carries_schema() {
        let mut r = ExperimentReport::new("demo", &["n"]);
        r.set_meta("seed", 7u64);
        let s = r.sidecar();
        assert_eq!(s["schema"], SCHEMA);
        assert_eq!(s["metadata"]["seed"], 7);
    }

    proptest! {
        #[test]
        fn render_parse_render_is_stable(
            rows in prop::collection::vec((any::<f64>(), any::<u64>(), "[a-z ,\"]{0,8}"), 0..20)
        ) {
            let mut r = ExperimentReport::new("p", &["x", "seed", "label"]);
            for (x, s, t) in rows {
                r.push_row(vec![Cell::Num(x), Cell::Int(s), Cell::Text(format!("t{t}"))]);
            }
            let once = r.to_csv();
            let twice = ExperimentReport::from_csv(&once).unwrap().to_csv();
            prop_assert_eq!(once, twice);
        }
    }
}
