use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

use super::ExperimentReport;
use crate::error::{Error, Result};

/// A table of numbers written as CSV and as two-column plot data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Scientific notation with 17 significant digits; round-trips every `f64`.
pub fn format17(x: f64) -> String {
    format!("{x:.16e}")
}

impl Curve {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(|&x| format17(x)).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    /// Whitespace-separated first two columns with a commented header.
    pub fn to_plot_data(&self) -> String {
        let mut s = format!("# {} {}\n", self.columns[0], self.columns.get(1).map_or("", |c| c));
        for r in &self.rows {
            s.push_str(&format17(r[0]));
            if let Some(y) = r.get(1) {
                s.push(' ');
                s.push_str(&format17(*y));
            }
            s.push('\n');
        }
        s
    }
}

/// Writes `report.json`, `<curve>.csv` and `<curve>.dat` into `dir`.
pub fn write_outputs(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json = dir.join("report.json");
    fs::write(&json, serde_json::to_string_pretty(report)?)?;
    written.push(json);
    for c in &report.curves {
        if c.name.contains(['/', '\\']) {
            return Err(Error::Config(format!("curve name `{}` is not a file name", c.name)));
        }
        let csv = dir.join(format!("{}.csv", c.name));
        fs::write(&csv, c.to_csv())?;
        let dat = dir.join(format!("{}.dat", c.name));
        fs::write(&dat, c.to_plot_data())?;
        written.push(csv);
        written.push(dat);
    }
    Ok(written)
}
