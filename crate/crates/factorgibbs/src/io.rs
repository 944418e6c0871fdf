//! CSV datasets, draw files and key=value sidecars.
//!
//! Numbers are written with Rust's shortest round-trip formatting, which
//! never uses exponent notation for `f64`, so files re-read bit-exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use factorgibbs_core::{Dataset, DrawStore, Matrix};

use crate::error::{CliError, CliResult};

pub fn read_matrix_csv(path: &Path, has_header: bool) -> CliResult<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::format(path, e))?;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::format(path, e))?;
        if *cols.get_or_insert(record.len()) != record.len() {
            return Err(CliError::format(path, format!("row {} has {} fields", line + 1, record.len())));
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| CliError::format(path, format!("row {}: '{field}' is not a number", line + 1)))?;
            values.push(v);
        }
        rows += 1;
    }
    let cols = cols.unwrap_or_else(|| {
        if has_header {
            reader.headers().map(|h| h.len()).unwrap_or(0)
        } else {
            0
        }
    });
    Matrix::from_vec(rows, cols, values).map_err(|e| CliError::format(path, e))
}

/// Reads an `n x m` dataset: a header row, then one observation per row.
pub fn read_dataset_csv(path: &Path) -> CliResult<Dataset> {
    let y = read_matrix_csv(path, true)?;
    Dataset::new(y).map_err(|e| CliError::format(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}

fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

/// Writes `Y` with header `v1,...,vm`.
pub fn write_dataset_csv(path: &Path, y: &Dataset) -> CliResult<()> {
    let header: Vec<String> = (1..=y.m()).map(|i| format!("v{i}")).collect();
    let m = y.matrix();
    let rows = (0..y.n()).map(|t| m.row(t).iter().map(|v| v.to_string()).collect());
    write_file(path, &csv_bytes(&header, rows))
}

/// Writes stored draws with a leading `iter` column.
pub fn write_draws_csv(path: &Path, store: &DrawStore) -> CliResult<()> {
    let mut header = vec!["iter".to_string()];
    header.extend(store.columns.iter().cloned());
    let rows = (0..store.len()).map(|d| {
        let mut r = vec![store.iterations[d].to_string()];
        r.extend(store.row(d).iter().map(|v| v.to_string()));
        r
    });
    write_file(path, &csv_bytes(&header, rows))
}

/// Writes a table of already formatted cells.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    write_file(path, &csv_bytes(&header, rows.iter().cloned()))
}

/// Writes `key=value` lines in the given order.
pub fn write_sidecar(path: &Path, entries: &[(String, String)]) -> CliResult<()> {
    let mut s = String::new();
    for (k, v) in entries {
        s.push_str(k);
        s.push('=');
        s.push_str(&v.replace('\n', " "));
        s.push('\n');
    }
    write_file(path, s.as_bytes())
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::format(path, e))?;
    bytes.push(b'\n');
    write_file(path, &bytes)
}

pub fn ensure_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}
