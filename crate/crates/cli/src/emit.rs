//! Writing and re-reading result bundles.
//!
//! CSV output is one file per table, `<run>__<table>.csv`, with values in
//! 17 significant digits, plus `<run>__metadata.json`. JSON output is a
//! single `<run>__bundle.json` holding metadata and every table.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::bundle::{ResultBundle, Table};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Formats a value so that parsing it back gives the same bits.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub fn table_csv(t: &Table) -> String {
    let mut s = t.columns.join(",");
    s.push('\n');
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(contents).map_err(io_err(path))
}

/// Writes the bundle into `dir`, creating it if needed. Returns the files written.
pub fn emit(bundle: &ResultBundle, dir: &Path, format: Format) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let run = &bundle.metadata.run;
    let mut written = Vec::new();
    match format {
        Format::Csv => {
            for t in &bundle.tables {
                let path = dir.join(format!("{run}__{}.csv", t.name));
                write_file(&path, table_csv(t).as_bytes())?;
                written.push(path);
            }
            let path = dir.join(format!("{run}__metadata.json"));
            let text = serde_json::to_string_pretty(&bundle.metadata).expect("metadata serializes");
            write_file(&path, text.as_bytes())?;
            written.push(path);
        }
        Format::Json => {
            let path = dir.join(format!("{run}__bundle.json"));
            let text = serde_json::to_string(bundle).expect("bundle serializes");
            write_file(&path, text.as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Parses a table written by [`emit`].
pub fn read_csv_table(path: &Path, name: &str) -> Result<Table, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_csv_table(&text, name).map_err(|message| CliError::Config { field: path.display().to_string(), message })
}

pub fn parse_csv_table(text: &str, name: &str) -> Result<Table, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("empty file")?;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|e| format!("row {}: {e}", i + 1)))
            .collect::<Result<_, _>>()?;
        if row.len() != columns.len() {
            return Err(format!("row {} has {} values, header {}", i + 1, row.len(), columns.len()));
        }
        rows.push(row);
    }
    Ok(Table { name: name.into(), columns, rows })
}

pub fn read_json_bundle(path: &Path) -> Result<ResultBundle, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}
