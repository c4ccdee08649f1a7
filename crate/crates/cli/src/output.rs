//! Tabular records written as CSV or JSON lines with fixed 17-digit floats.

use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(u64),
    Text(String),
    Missing,
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(x)
    }
}

impl From<usize> for Field {
    fn from(x: usize) -> Self {
        Field::Int(x as u64)
    }
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Text(s.to_owned())
    }
}

impl From<String> for Field {
    fn from(s: String) -> Self {
        Field::Text(s)
    }
}

impl<T: Into<Field>> From<Option<T>> for Field {
    fn from(x: Option<T>) -> Self {
        x.map_or(Field::Missing, Into::into)
    }
}

/// 17 significant digits, so every f64 round-trips.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string().to_lowercase()
    }
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Num(x) => fmt_float(*x),
            Field::Int(i) => i.to_string(),
            Field::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Field::Text(s) => s.clone(),
            Field::Missing => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Field::Num(x) if x.is_finite() => fmt_float(*x),
            Field::Num(_) | Field::Missing => "null".into(),
            Field::Int(i) => i.to_string(),
            Field::Text(s) => serde_json::to_string(s).expect("strings always serialize"),
        }
    }
}

/// One row: ordered (column, value) pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(&'static str, Field)>);

impl Record {
    pub fn push(&mut self, key: &'static str, value: impl Into<Field>) -> &mut Self {
        self.0.push((key, value.into()));
        self
    }
}

/// Renders `records` as CSV (header from the first record) or JSON lines.
pub fn render(records: &[Record], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            if let Some(first) = records.first() {
                let header: Vec<&str> = first.0.iter().map(|(k, _)| *k).collect();
                out.push_str(&header.join(","));
                out.push('\n');
            }
            for r in records {
                let row: Vec<String> = r.0.iter().map(|(_, v)| v.csv()).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        Format::Json => {
            for r in records {
                let fields: Vec<String> = r
                    .0
                    .iter()
                    .map(|(k, v)| format!("{}:{}", serde_json::to_string(k).unwrap(), v.json()))
                    .collect();
                let _ = writeln!(out, "{{{}}}", fields.join(","));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_and_json() {
        let mut r = Record::default();
        r.push("a", 1.5).push("b", "x,y").push("c", None::<f64>).push("d", f64::NAN);
        let csv = render(&[r.clone()], Format::Csv);
        assert_eq!(csv, "a,b,c,d\n1.5000000000000000e0,\"x,y\",,nan\n");
        let json = render(&[r], Format::Json);
        let v: serde_json::Value = serde_json::from_str(json.trim_end()).unwrap();
        assert_eq!(v["a"], 1.5);
        assert_eq!(v["b"], "x,y");
        assert!(v["c"].is_null() && v["d"].is_null());
    }
}
