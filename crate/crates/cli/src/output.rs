//! CSV and JSON dataset writers.

use std::io::Write;

use serde_json::{json, Map, Value as Json};

use crate::config::{RunConfig, Value};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(&'static str),
}

/// A point that produced no row, or a warning worth keeping with the data.
#[derive(Debug, Clone, PartialEq)]
pub struct Note {
    pub kind: &'static str,
    pub key: &'static str,
    pub at: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub config: RunConfig,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<Note>,
}

/// `%.9g`: nine significant digits, trailing zeros removed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell_text(cell: &Cell) -> String {
    match cell {
        Cell::Num(x) => format_sig(*x),
        Cell::Text(s) => (*s).to_string(),
    }
}

fn cell_json(cell: &Cell) -> Json {
    match cell {
        Cell::Num(x) => format_sig(*x)
            .parse::<f64>()
            .ok()
            .and_then(serde_json::Number::from_f64)
            .map_or(Json::Null, Json::Number),
        Cell::Text(s) => Json::String((*s).to_string()),
    }
}

fn value_json(value: &Value) -> Json {
    match value {
        Value::Float(x) => serde_json::Number::from_f64(*x).map_or(Json::Null, Json::Number),
        Value::Count(n) => json!(n),
        Value::Text(s) => json!(s),
        Value::List(items) => Json::Array(
            items
                .iter()
                .map(|x| serde_json::Number::from_f64(*x).map_or(Json::Null, Json::Number))
                .collect(),
        ),
    }
}

pub fn write_csv<W: Write>(data: &Dataset, out: &mut W) -> Result<(), CliError> {
    writeln!(out, "# cavrot dataset")?;
    for (key, value) in data.config.entries() {
        writeln!(out, "# {key}={value}")?;
    }
    for note in &data.notes {
        writeln!(
            out,
            "# {} {}={:?}: {}",
            note.kind,
            note.key,
            note.at,
            note.message.replace('\n', " ")
        )?;
    }
    writeln!(out, "{}", data.columns.join(","))?;
    for row in &data.rows {
        let line: Vec<String> = row.iter().map(cell_text).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_json<W: Write>(data: &Dataset, out: &mut W) -> Result<(), CliError> {
    let config: Map<String, Json> = data
        .config
        .entries()
        .into_iter()
        .map(|(k, v)| (k.to_string(), value_json(&v)))
        .collect();
    let notes: Vec<Json> = data
        .notes
        .iter()
        .map(|n| {
            let mut m = Map::new();
            m.insert("kind".to_string(), json!(n.kind));
            m.insert(n.key.to_string(), json!(n.at));
            m.insert("message".to_string(), json!(n.message));
            Json::Object(m)
        })
        .collect();
    let records: Vec<Json> = data
        .rows
        .iter()
        .map(|row| {
            let record: Map<String, Json> = data
                .columns
                .iter()
                .zip(row)
                .map(|(c, cell)| (c.to_string(), cell_json(cell)))
                .collect();
            Json::Object(record)
        })
        .collect();
    let doc = json!({ "config": config, "notes": notes, "records": records });
    serde_json::to_writer_pretty(&mut *out, &doc).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

pub fn write<W: Write>(data: &Dataset, out: &mut W) -> Result<(), CliError> {
    match data.config.format {
        crate::config::Format::Csv => write_csv(data, out),
        crate::config::Format::Json => write_json(data, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(-0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(std::f64::consts::PI), "3.14159265");
        assert_eq!(format_sig(0.7909016181173275), "0.790901618");
        assert_eq!(format_sig(-12.0), "-12");
        assert_eq!(format_sig(1.23456789012e-7), "1.23456789e-07");
        assert_eq!(format_sig(6.02214076e23), "6.02214076e+23");
        assert_eq!(format_sig(123456789.4), "123456789");
        assert_eq!(format_sig(1234567890.0), "1.23456789e+09");
        assert_eq!(format_sig(0.0001), "0.0001");
        assert_eq!(format_sig(9.9999999996), "10");
    }
}
