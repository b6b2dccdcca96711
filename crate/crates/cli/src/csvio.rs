//! Signals as CSV: a header row of channel identifiers, then one row per
//! timestep. A column named `t` holds timestamps; it sets the timestep and is
//! otherwise ignored.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use maskstl::{NamedSignals, Signal};

use crate::error::{CliError, CliResult};

const TIME_COLUMN: &str = "t";

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Raw columns of a CSV file in header order.
pub fn read_columns<R: Read>(reader: R) -> CliResult<Vec<(String, Vec<f64>)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| CliError::Csv(e.to_string()))?.clone();
    if header.is_empty() {
        return Err(CliError::Csv("empty header".into()));
    }
    let mut cols: Vec<(String, Vec<f64>)> = Vec::with_capacity(header.len());
    for name in header.iter() {
        if !is_identifier(name) {
            return Err(CliError::Csv(format!("header `{name}` is not an identifier")));
        }
        if cols.iter().any(|(n, _)| n == name) {
            return Err(CliError::Csv(format!("duplicate column `{name}`")));
        }
        cols.push((name.to_string(), Vec::new()));
    }
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Csv(e.to_string()))?;
        for (field, (name, col)) in rec.iter().zip(cols.iter_mut()) {
            let v: f64 = field
                .parse()
                .map_err(|_| CliError::Csv(format!("row {}: column `{name}`: `{field}` is not a number", row + 2)))?;
            col.push(v);
        }
    }
    if cols[0].1.is_empty() {
        return Err(CliError::Csv("no data rows".into()));
    }
    Ok(cols)
}

/// Reads named signals. The timestep comes from the `t` column when present
/// (first difference), otherwise it is 1.
pub fn read_signals<R: Read>(reader: R) -> CliResult<NamedSignals> {
    let cols = read_columns(reader)?;
    let dt = match cols.iter().find(|(n, _)| n == TIME_COLUMN) {
        Some((_, t)) if t.len() >= 2 => t[1] - t[0],
        _ => 1.0,
    };
    let channels = cols
        .into_iter()
        .filter(|(n, _)| n != TIME_COLUMN)
        .map(|(n, v)| Signal::new(v, dt).map(|s| (n, s)))
        .collect::<Result<Vec<_>, _>>()?;
    if channels.is_empty() {
        return Err(CliError::Csv("no signal columns besides `t`".into()));
    }
    Ok(NamedSignals::new(channels)?)
}

pub fn read_signals_file(path: &Path) -> CliResult<NamedSignals> {
    read_signals(File::open(path).map_err(|e| CliError::io(path, e))?)
}

/// Writes columns with shortest round-trip formatting, so reading the file
/// back gives bit-identical samples.
pub fn write_columns<W: Write>(writer: W, names: &[&str], columns: &[&[f64]]) -> CliResult<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let len = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != len) || names.len() != columns.len() {
        return Err(CliError::Csv("columns differ in length".into()));
    }
    let csv_err = |e: csv::Error| CliError::Csv(e.to_string());
    wtr.write_record(names).map_err(csv_err)?;
    for i in 0..len {
        wtr.write_record(columns.iter().map(|c| c[i].to_string()))
            .map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| CliError::Csv(e.to_string()))
}

pub fn write_signals<W: Write>(writer: W, signals: &NamedSignals) -> CliResult<()> {
    let names: Vec<&str> = signals.names().collect();
    let cols: Vec<&[f64]> = signals.iter().map(|(_, s)| s.values()).collect();
    write_columns(writer, &names, &cols)
}

pub fn create(path: &Path) -> CliResult<File> {
    File::create(path).map_err(|e| CliError::io(path, e))
}
