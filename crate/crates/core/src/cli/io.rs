use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use crate::error::Arm;

use super::CliError;

/// Rows of an input file: outcome, treatment and optional covariates `x1..xp`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputTable {
    pub outcomes: Vec<f64>,
    pub treatments: Vec<Arm>,
    /// One row per unit; empty rows when the file has no `x` columns.
    pub covariates: Vec<Vec<f64>>,
    pub covariate_dim: usize,
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::input(format!("cannot open {}: {e}", path.display())))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r)
}

/// Indices of `x1, x2, …` in header order, stopping at the first gap.
fn covariate_columns(headers: &csv::StringRecord) -> Vec<usize> {
    let mut cols = Vec::new();
    for k in 1.. {
        match headers.iter().position(|h| h == format!("x{k}")) {
            Some(i) => cols.push(i),
            None => break,
        }
    }
    cols
}

fn parse_float(field: &str, column: &str, line: u64) -> Result<f64, CliError> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::input(format!("line {line}: column {column}: cannot parse {field:?} as a finite number"))),
    }
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map(|p| format!("line {}: ", p.line())).unwrap_or_default();
    CliError::input(format!("{}: {line}{e}", path.display()))
}

/// Reads `outcome,treatment[,x1..xp]` with a header row.
pub fn read_input(path: &Path) -> Result<InputTable, CliError> {
    let mut rdr = reader(open(path)?);
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::input(format!("{}: missing required column {name:?}", path.display())))
    };
    let y_col = find("outcome")?;
    let w_col = find("treatment")?;
    let x_cols = covariate_columns(&headers);
    let mut table = InputTable {
        outcomes: Vec::new(),
        treatments: Vec::new(),
        covariates: Vec::new(),
        covariate_dim: x_cols.len(),
    };
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record_line(&record);
        table.outcomes.push(parse_float(&record[y_col], "outcome", line)?);
        let arm = match &record[w_col] {
            "0" => Arm::Control,
            "1" => Arm::Treated,
            other => {
                return Err(CliError::input(format!(
                    "line {line}: column treatment: expected 0 or 1, got {other:?}"
                )))
            }
        };
        table.treatments.push(arm);
        table.covariates.push(
            x_cols
                .iter()
                .enumerate()
                .map(|(k, &c)| parse_float(&record[c], &format!("x{}", k + 1), line))
                .collect::<Result<_, _>>()?,
        );
    }
    if table.outcomes.is_empty() {
        return Err(CliError::input(format!("{}: no data rows", path.display())));
    }
    Ok(table)
}

/// Reads a query grid with columns `x1..xp`.
pub fn read_x_grid(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rdr = reader(open(path)?);
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let cols = covariate_columns(&headers);
    if cols.is_empty() {
        return Err(CliError::input(format!("{}: query grid needs columns x1..xp", path.display())));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record_line(&record);
        rows.push(
            cols.iter()
                .enumerate()
                .map(|(k, &c)| parse_float(&record[c], &format!("x{}", k + 1), line))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    if rows.is_empty() {
        return Err(CliError::input(format!("{}: query grid has no rows", path.display())));
    }
    Ok(rows)
}

/// A `(delta, lower, upper)` table as written by `pibt bounds`.
pub fn read_bounds(path: &Path) -> Result<Vec<[f64; 3]>, CliError> {
    let mut rdr = reader(open(path)?);
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["delta", "lower", "upper"] {
        return Err(CliError::input(format!("{}: expected header delta,lower,upper", path.display())));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record_line(&record);
        let mut row = [0.0; 3];
        for (k, name) in ["delta", "lower", "upper"].iter().enumerate() {
            row[k] = parse_float(&record[k], name, line)?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Sink for data output: a file when given, stdout otherwise.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::input(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes a CSV table; numbers are formatted with `f64`'s shortest round-trip `Display`.
pub fn write_csv(out: Box<dyn Write>, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io_err = |e: csv::Error| CliError::input(format!("write failed: {e}"));
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::input(format!("write failed: {e}")))
}

pub fn write_json(path: Option<&Path>, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n";
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display()))),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::input(format!("write failed: {e}"))),
    }
}
