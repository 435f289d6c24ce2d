//! CSV artifacts. Each file starts with one `#` provenance line, then a
//! header row, then data rows.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use crate::error::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One CSV table produced by an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Artifact {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Header and data rows as CSV text, without the provenance line.
    pub fn to_csv(&self) -> Result<String, Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Shortest round-tripping decimal; `inf`, `-inf` and `NaN` for non-finite values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

pub fn provenance_line(cfg: &ExperimentConfig) -> String {
    format!("# mimolab {VERSION} experiment={} seed={} config_sha256={}", cfg.kind(), cfg.seed, cfg.hash())
}

/// File name of `artifact` for this configuration.
pub fn artifact_path(dir: &Path, cfg: &ExperimentConfig, artifact: &Artifact) -> PathBuf {
    dir.join(format!("{}_{}.csv", cfg.kind(), artifact.name))
}

/// Writes every artifact into `dir` (created if missing) and returns the paths.
pub fn write_artifacts(dir: &Path, cfg: &ExperimentConfig, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, Error> {
    fs::create_dir_all(dir)?;
    let prov = provenance_line(cfg);
    let mut out = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let path = artifact_path(dir, cfg, a);
        let mut f = fs::File::create(&path)?;
        writeln!(f, "{prov}")?;
        f.write_all(a.to_csv()?.as_bytes())?;
        f.flush()?;
        out.push(path);
    }
    Ok(out)
}
