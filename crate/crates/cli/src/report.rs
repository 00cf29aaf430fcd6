//! Report structure and output files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ultralab::mollifier::NetStats;

use crate::config::{RunConfig, ThresholdConfig};
use crate::error::CliError;

/// One checked claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// A CSV table; `plot` names the two columns written to a `.dat` file as well.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub plot: Option<(usize, usize)>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: Vec<&'static str>) -> Self {
        Self { name: name.into(), header, rows: Vec::new(), plot: None }
    }

    pub fn plotted(mut self, x: usize, y: usize) -> Self {
        self.plot = Some((x, y));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub index: usize,
    pub id: String,
    pub passed: bool,
    pub assertions: Vec<Assertion>,
    pub error: Option<String>,
    pub result: serde_json::Value,
    /// File names of the traces, relative to the output directory.
    pub traces: Vec<String>,
}

/// Fields that legitimately differ between identical runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WallClock {
    pub total_seconds: f64,
    pub experiment_seconds: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub thresholds: ThresholdConfig,
    pub config: RunConfig,
    pub passed: bool,
    pub experiments: Vec<ExperimentOutcome>,
    pub cache: NetStats,
    pub wall_clock: WallClock,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(contents)?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes the CSV (and `.dat`, if plotted) for `table`; returns the file names.
pub fn write_table(dir: &Path, stem: &str, table: &Table) -> Result<Vec<String>, CliError> {
    let csv_name = format!("{stem}.csv");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header)?;
    for r in &table.rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    write_atomic(&dir.join(&csv_name), &bytes)?;
    let mut names = vec![csv_name];
    if let Some((x, y)) = table.plot {
        let dat_name = format!("{stem}.dat");
        let mut s = format!("# {} {}\n", table.header[x], table.header[y]);
        for r in &table.rows {
            let finite = |c: &str| c.parse::<f64>().is_ok_and(f64::is_finite);
            if finite(&r[x]) && finite(&r[y]) {
                s.push_str(&format!("{} {}\n", r[x], r[y]));
            }
        }
        write_atomic(&dir.join(&dat_name), s.as_bytes())?;
        names.push(dat_name);
    }
    Ok(names)
}

pub fn write_report(dir: &Path, report: &RunReport) -> Result<PathBuf, CliError> {
    let path = dir.join("report.json");
    let mut text = serde_json::to_vec_pretty(report)?;
    text.push(b'\n');
    write_atomic(&path, &text)?;
    Ok(path)
}
