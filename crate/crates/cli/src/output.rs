//! Plain-text writers. Numbers use Rust's shortest round-trip formatting,
//! which is independent of the process locale.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use lindloc::ComplexMatrix;

use crate::CliError;

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: impl IntoIterator<Item = f64>) {
        self.push(row.into_iter().map(num).collect());
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// `i,j,re,im` per entry.
pub fn matrix_csv(m: &ComplexMatrix) -> String {
    let mut t = Table::new(["i", "j", "re", "im"]);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m[(i, j)];
            t.push(vec![i.to_string(), j.to_string(), num(z.re), num(z.im)]);
        }
    }
    t.to_csv()
}

/// Aligned `key = value` lines.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn add(&mut self, key: impl Into<String>, value: impl ToString) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn add_num(&mut self, key: impl Into<String>, value: f64) {
        self.add(key, num(value));
    }

    pub fn render(&self) -> String {
        let width = self.lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut s = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(s, "{k:<width$} = {v}");
        }
        s
    }
}

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Io(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -1.2235554416286393e-05, 1e300, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(["a", "b"]);
        t.push_numbers([1.0, 0.5]);
        assert_eq!(t.to_csv(), "a,b\n1.0,0.5\n");
    }
}
