//! Record tables and their CSV and JSON renderings.

use serde_json::{Map, Number, Value as Json};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Null,
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(x: Option<T>) -> Self {
        x.map_or(Value::Null, Into::into)
    }
}

/// Reals with 17 significant digits, which round-trip every `f64`.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Value {
    fn csv_field(&self) -> String {
        match self {
            Value::Real(x) => format_real(*x),
            Value::Int(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
            Value::Null => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Real(x) => Number::from_f64(*x).map_or(Json::Null, Json::Number),
            Value::Int(n) => Json::from(*n),
            Value::Bool(b) => Json::Bool(*b),
            Value::Text(s) => Json::String(s.clone()),
            Value::Null => Json::Null,
        }
    }
}

/// Rows sharing one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    /// Appends a row given as `(column, value)` pairs. Missing columns are
    /// null.
    ///
    /// # Panics
    /// On a column outside the schema.
    pub fn push(&mut self, fields: Vec<(&'static str, Value)>) {
        let mut row = vec![Value::Null; self.columns.len()];
        for (k, v) in fields {
            let j = self
                .columns
                .iter()
                .position(|c| *c == k)
                .unwrap_or_else(|| panic!("column {k} is not in the schema"));
            row[j] = v;
        }
        self.rows.push(row);
    }

    pub fn set_all(&mut self, column: &str, v: Value) {
        if let Some(j) = self.columns.iter().position(|c| *c == column) {
            for row in &mut self.rows {
                row[j] = v.clone();
            }
        }
    }
}

pub fn emit_csv(t: &Table) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(&t.columns)?;
    for row in &t.rows {
        w.write_record(row.iter().map(Value::csv_field))?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn emit_json(t: &Table) -> Vec<u8> {
    let rows: Vec<Json> = t
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            for (k, v) in t.columns.iter().zip(row) {
                m.insert(k.to_string(), v.json());
            }
            Json::Object(m)
        })
        .collect();
    let mut out = serde_json::to_vec_pretty(&Json::Array(rows)).expect("values serialize");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_tables() {
        let t = Table::new(&["a", "b"]);
        assert_eq!(emit_csv(&t).unwrap(), b"a,b\r\n");
        assert_eq!(emit_json(&t), b"[]\n");
    }

    #[test]
    fn quoting_and_reals() {
        let mut t = Table::new(&["x", "name", "gap"]);
        t.push(vec![("x", 0.1.into()), ("name", "a,\"b\"".into())]);
        let s = String::from_utf8(emit_csv(&t).unwrap()).unwrap();
        assert_eq!(s, "x,name,gap\r\n1.0000000000000001e-1,\"a,\"\"b\"\"\",\r\n");
    }
}
