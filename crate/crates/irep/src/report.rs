//! Report serialization: versioned JSON with numbers rounded to 12
//! significant digits, and RFC 4180 CSV tables.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// One checked property of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contract {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    /// `"<="` or `">="`.
    pub relation: String,
    pub limit: f64,
}

impl Contract {
    pub fn at_most(name: impl Into<String>, observed: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            passed: observed <= limit,
            observed,
            relation: "<=".into(),
            limit,
        }
    }

    pub fn at_least(name: impl Into<String>, observed: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            passed: observed >= limit,
            observed,
            relation: ">=".into(),
            limit,
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "{}: observed {} (limit {} {})",
            self.name,
            short(self.observed),
            self.relation,
            short(self.limit)
        )
    }
}

fn short(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e6 || v.abs() < 1e-4) {
        format!("{v:.6e}")
    } else {
        format!("{}", round_significant(v, 6))
    }
}

pub fn all_passed(contracts: &[Contract]) -> bool {
    contracts.iter().all(|c| c.passed)
}

pub fn failures(contracts: &[Contract]) -> Vec<String> {
    contracts
        .iter()
        .filter(|c| !c.passed)
        .map(Contract::describe)
        .collect()
}

/// `x` rounded to `digits` significant decimal digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

/// Rounds every non-integer number inside `value`.
pub fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            if let Some(r) = serde_json::Number::from_f64(round_significant(x, SIGNIFICANT_DIGITS))
            {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Serializes `report` to pretty JSON with rounded numbers.
pub fn to_json_string<T: Serialize>(report: &T) -> Result<String> {
    let mut value = serde_json::to_value(report)?;
    round_json(&mut value);
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<T: Serialize>(dir: &Path, file: &str, report: &T) -> Result<PathBuf> {
    let path = dir.join(file);
    fs::write(&path, to_json_string(report)?).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `header` and `rows` as an RFC 4180 CSV file. Floats are rounded
/// like the JSON reports.
pub fn write_csv(dir: &Path, file: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<PathBuf> {
    let path = dir.join(file);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(&path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => round_significant(*v, SIGNIFICANT_DIGITS).to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_owned(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_significant(0.1 + 0.2, 12), 0.3);
        assert_eq!(
            round_significant(123_456_789.123_456_78, 12),
            123_456_789.123
        );
        assert_eq!(round_significant(-2.5e-20, 12), -2.5e-20);
        assert_eq!(round_significant(0.0, 12), 0.0);
    }

    #[test]
    fn json_numbers_are_rounded_but_integers_kept() {
        let mut v =
            serde_json::json!({"a": 1.0000000000004, "b": [2, 0.30000000000000004], "c": u64::MAX});
        round_json(&mut v);
        assert_eq!(
            v,
            serde_json::json!({"a": 1.0, "b": [2, 0.3], "c": u64::MAX})
        );
    }

    #[test]
    fn contracts() {
        assert!(Contract::at_most("x", 0.0, 0.0).passed);
        assert!(!Contract::at_most("x", 1e-9, 0.0).passed);
        assert!(Contract::at_least("y", 4.0, 4.0).passed);
        assert!(!Contract::at_least("y", f64::NAN, 4.0).passed);
    }

    #[test]
    fn csv_quoting() {
        let dir = std::env::temp_dir().join(format!("irep-csv-{}", std::process::id()));
        ensure_dir(&dir).unwrap();
        let path = write_csv(
            &dir,
            "t.csv",
            &["a", "b"],
            &[vec![Cell::from("x,y"), Cell::from(0.5)]],
        )
        .unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a,b\r\n\"x,y\",0.5\r\n");
        fs::remove_dir_all(dir).unwrap();
    }
}
