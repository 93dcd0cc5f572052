//! CSV and JSON result files. Every file is written to a temporary in the
//! target directory and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Experiment;
use crate::error::RunError;
use crate::runner::Row;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Both,
}

/// Contents of the JSON result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub version: String,
    pub config: Experiment,
    pub rows: Vec<Row>,
}

/// Run metadata that is allowed to differ between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub version: String,
    pub wall_clock_seconds: f64,
    pub workers: usize,
    pub rows: usize,
}

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.11e}")
    }
}

/// Long-format CSV: axis columns, then the fixed columns.
pub fn to_csv(rows: &[Row], axis_names: &[&str]) -> Result<Vec<u8>, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let enc = |e: csv::Error| RunError::Encode(e.to_string());
    let fixed = [
        "observable",
        "channel",
        "bin",
        "estimate",
        "stderr",
        "n_traj",
        "seed",
        "fingerprint",
        "flags",
    ];
    w.write_record(axis_names.iter().copied().chain(fixed)).map_err(enc)?;
    for r in rows {
        let mut rec: Vec<String> = r.axes.iter().map(|(_, v)| num(*v)).collect();
        rec.extend([
            r.observable.clone(),
            r.channel.clone(),
            r.bin.map(|b| b.to_string()).unwrap_or_default(),
            num(r.estimate),
            num(r.stderr),
            r.n_traj.to_string(),
            r.seed.to_string(),
            r.fingerprint.clone(),
            r.flags.join(";"),
        ]);
        w.write_record(&rec).map_err(enc)?;
    }
    w.into_inner().map_err(|e| RunError::Encode(e.to_string()))
}

pub fn to_json(results: &ResultsFile) -> Result<Vec<u8>, RunError> {
    let mut v = serde_json::to_vec_pretty(results).map_err(|e| RunError::Encode(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

pub fn read_json(path: &Path) -> Result<ResultsFile, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| RunError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| RunError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| RunError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| RunError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| RunError::io(path, e.error))?;
    Ok(())
}

/// Writes the result files for `exp` and returns their paths.
pub fn write_results(
    dir: &Path,
    exp: &Experiment,
    rows: Vec<Row>,
    format: Format,
    meta: &RunMeta,
) -> Result<Vec<PathBuf>, RunError> {
    let mut written = Vec::new();
    if matches!(format, Format::Csv | Format::Both) {
        let path = dir.join(format!("{}.csv", exp.name));
        write_atomic(&path, &to_csv(&rows, &exp.axis_names())?)?;
        written.push(path);
    }
    if matches!(format, Format::Json | Format::Both) {
        let path = dir.join(format!("{}.json", exp.name));
        let results = ResultsFile {
            version: VERSION.to_string(),
            config: exp.clone(),
            rows,
        };
        write_atomic(&path, &to_json(&results)?)?;
        written.push(path);
    }
    let path = dir.join(format!("{}.meta.json", exp.name));
    let bytes = serde_json::to_vec_pretty(meta).map_err(|e| RunError::Encode(e.to_string()))?;
    write_atomic(&path, &bytes)?;
    written.push(path);
    Ok(written)
}
