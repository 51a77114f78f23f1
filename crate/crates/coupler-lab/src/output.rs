use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::fmt_num;
use crate::CliError;

/// One CSV file: `#` comment lines, a header row, then records.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(comments: Vec<String>, header: &[&str]) -> Self {
        Self {
            comments,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
        let mut out = BufWriter::new(File::create(path).map_err(io)?);
        for c in &self.comments {
            writeln!(out, "# {c}").map_err(io)?;
        }
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush().map_err(io)
    }
}

pub fn num(x: f64) -> String {
    fmt_num(x)
}

/// Output file `<dir>/<name>.csv`, creating `dir` if needed.
pub fn path_in(dir: &Path, name: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir.join(format!("{name}.csv")))
}
