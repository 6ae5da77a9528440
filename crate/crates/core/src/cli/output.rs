//! Report records and deterministic CSV/JSON writers.

use std::path::Path;

use serde::Serialize;

use super::CliError;

/// One verified quantity. `pass` is `value <= threshold` unless set
/// otherwise by the producer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, pass: value <= threshold }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, pass: value >= threshold }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub details: serde_json::Value,
}

impl RunReport {
    pub fn new(command: &str, seed: u64, checks: Vec<Check>, details: serde_json::Value) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        RunReport { command: command.into(), seed, checks, pass, details }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Seventeen significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Numeric table: header plus rows of floats, except for integer columns
/// listed by position.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub int_cols: Vec<usize>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: vec![], int_cols: vec![] }
    }

    pub fn with_int_cols(mut self, cols: &[usize]) -> Self {
        self.int_cols = cols.to_vec();
        self
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
        w.write_record(&self.header).map_err(|e| io_error(path, e))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(i, v)| if self.int_cols.contains(&i) { format!("{}", *v as i64) } else { fmt_f64(*v) })
                .collect();
            w.write_record(&cells).map_err(|e| io_error(path, e))?;
        }
        w.flush().map_err(|e| io_error(path, e))
    }

    pub fn write_json(&self, path: &Path) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Json<'a> {
            columns: &'a [String],
            rows: &'a [Vec<f64>],
        }
        write_json(path, &Json { columns: &self.header, rows: &self.rows })
    }

    pub fn write(&self, dir: &Path, stem: &str, format: OutputFormat) -> Result<(), CliError> {
        match format {
            OutputFormat::Csv => self.write_csv(&dir.join(format!("{stem}.csv"))),
            OutputFormat::Json => self.write_json(&dir.join(format!("{stem}.json"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

pub fn write_checks_csv(path: &Path, checks: &[Check]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(["name", "value", "threshold", "pass"]).map_err(|e| io_error(path, e))?;
    for c in checks {
        w.write_record([c.name.clone(), fmt_f64(c.value), fmt_f64(c.threshold), c.pass.to_string()])
            .map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Read a numeric CSV written by [`Table::write_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let header: Vec<String> = r.headers().map_err(|e| io_error(path, e))?.iter().map(String::from).collect();
    let mut rows = vec![];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| io_error(path, e))?;
        let row = rec
            .iter()
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(format!("{}: row {}: {e}", path.display(), line + 2)))?;
        rows.push(row);
    }
    Ok((header, rows))
}
