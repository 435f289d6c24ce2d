//! TOML experiment configuration.
//!
//! ```toml
//! experiment = "detect"   # required
//! seed = 7                # default 1
//! workers = 0             # 0 = all cores
//! output = "out/detect"   # optional file stem
//!
//! [detect]                # optional; every key has a default
//! m = [40]
//! k = 40
//! ```
//!
//! Unknown keys anywhere are rejected with the offending key named.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;
use toml::{Table, Value};

use super::params::ExperimentParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("syntax: {0}")]
    Syntax(String),
    #[error("missing key `{0}`")]
    MissingKey(String),
    #[error("key `{key}` must be {expected}")]
    TypeMismatch { key: String, expected: &'static str },
    #[error("key `{key}` out of range: {detail}")]
    RangeViolation { key: String, detail: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Capacity,
    Precoding,
    Multicell,
    Detect,
    Focusing,
    EigenCdf,
    NeumannBench,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        Self::Capacity,
        Self::Precoding,
        Self::Multicell,
        Self::Detect,
        Self::Focusing,
        Self::EigenCdf,
        Self::NeumannBench,
    ];

    /// Name used in configs and as the parameter section header.
    pub fn name(self) -> &'static str {
        match self {
            Self::Capacity => "capacity",
            Self::Precoding => "precoding",
            Self::Multicell => "multicell",
            Self::Detect => "detect",
            Self::Focusing => "focusing",
            Self::EigenCdf => "eigen_cdf",
            Self::NeumannBench => "neumann_bench",
        }
    }

    /// Stream tag separating the random draws of different experiments.
    pub fn stream_id(self) -> u64 {
        crate::rng::tag(self.name())
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.replace('-', "_");
        Self::ALL.into_iter().find(|k| k.name() == norm).ok_or_else(|| ConfigError::RangeViolation {
            key: "experiment".into(),
            detail: format!("unknown experiment `{s}`"),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// 0 uses every available core. Never affects results.
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub params: ExperimentParams,
}

impl ExperimentConfig {
    pub fn new(params: ExperimentParams) -> Self {
        Self { seed: 1, workers: 0, output: None, params }
    }

    pub fn defaults(kind: ExperimentKind) -> Self {
        Self::new(ExperimentParams::defaults(kind))
    }

    pub fn kind(&self) -> ExperimentKind {
        self.params.kind()
    }

    /// Canonical text of everything that determines the results
    /// (experiment, seed and parameters; not workers or output).
    pub fn canonical(&self) -> String {
        let mut t = Table::new();
        t.insert("experiment".into(), Value::String(self.kind().name().into()));
        t.insert("seed".into(), seed_value(self.seed));
        t.insert(self.kind().name().into(), Value::Table(self.params.to_table()));
        toml::to_string(&t).expect("tables of plain values always serialize")
    }

    /// Hex SHA-256 of [`canonical`](Self::canonical).
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

/// Seeds above `i64::MAX` do not fit a TOML integer and are written as strings.
fn seed_value(seed: u64) -> Value {
    match i64::try_from(seed) {
        Ok(v) => Value::Integer(v),
        Err(_) => Value::String(seed.to_string()),
    }
}

pub fn parse_config(doc: &str) -> Result<ExperimentConfig, ConfigError> {
    let root: Table = doc.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
    let mut top = Section::new("", Some(&root));
    let kind: ExperimentKind = top.required_str("experiment")?.parse()?;
    let seed = top.seed("seed", 1)?;
    let workers = top.usize("workers", 0)?;
    let output = top.opt_str("output")?.map(PathBuf::from);
    let sub = match top.take(kind.name()) {
        None => None,
        Some(Value::Table(t)) => Some(t),
        Some(_) => return Err(ConfigError::TypeMismatch { key: kind.name().into(), expected: "a table" }),
    };
    top.finish()?;
    let mut sec = Section::new(kind.name(), sub);
    let params = ExperimentParams::read(kind, &mut sec)?;
    sec.finish()?;
    Ok(ExperimentConfig { seed, workers, output, params })
}

/// Inverse of [`parse_config`]: `parse_config(&emit_config(c)) == c`.
pub fn emit_config(cfg: &ExperimentConfig) -> String {
    let mut t = Table::new();
    t.insert("experiment".into(), Value::String(cfg.kind().name().into()));
    t.insert("seed".into(), seed_value(cfg.seed));
    t.insert("workers".into(), Value::Integer(cfg.workers as i64));
    if let Some(o) = &cfg.output {
        t.insert("output".into(), Value::String(o.to_string_lossy().into_owned()));
    }
    t.insert(cfg.kind().name().into(), Value::Table(cfg.params.to_table()));
    toml::to_string(&t).expect("tables of plain values always serialize")
}

/// Typed, use-tracked view of one TOML table.
pub struct Section<'a> {
    prefix: String,
    table: Option<&'a Table>,
    used: BTreeSet<String>,
}

impl<'a> Section<'a> {
    pub fn new(prefix: &str, table: Option<&'a Table>) -> Self {
        Self { prefix: prefix.to_string(), table, used: BTreeSet::new() }
    }

    /// Fully qualified key name for messages.
    pub fn qualified(&self, key: &str) -> String {
        if self.prefix.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.prefix)
        }
    }

    pub fn take(&mut self, key: &str) -> Option<&'a Value> {
        self.used.insert(key.to_string());
        self.table.and_then(|t| t.get(key))
    }

    fn mismatch(&self, key: &str, expected: &'static str) -> ConfigError {
        ConfigError::TypeMismatch { key: self.qualified(key), expected }
    }

    pub fn range(&self, key: &str, detail: impl Into<String>) -> ConfigError {
        ConfigError::RangeViolation { key: self.qualified(key), detail: detail.into() }
    }

    /// Rejects any key that was never asked for.
    pub fn finish(self) -> Result<(), ConfigError> {
        if let Some(t) = self.table {
            if let Some(k) = t.keys().find(|k| !self.used.contains(*k)) {
                return Err(ConfigError::UnknownKey(self.qualified(k)));
            }
        }
        Ok(())
    }

    pub fn required_str(&mut self, key: &str) -> Result<String, ConfigError> {
        match self.take(key) {
            None => Err(ConfigError::MissingKey(self.qualified(key))),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(self.mismatch(key, "a string")),
        }
    }

    pub fn opt_str(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(self.mismatch(key, "a string")),
        }
    }

    pub fn str(&mut self, key: &str, default: &str) -> Result<String, ConfigError> {
        Ok(self.opt_str(key)?.unwrap_or_else(|| default.to_string()))
    }

    pub fn bool(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(_) => Err(self.mismatch(key, "a boolean")),
        }
    }

    fn to_usize(&self, key: &str, v: &Value) -> Result<usize, ConfigError> {
        match v {
            Value::Integer(i) if *i >= 0 => Ok(*i as usize),
            Value::Integer(_) => Err(self.range(key, "must be >= 0")),
            _ => Err(self.mismatch(key, "a non-negative integer")),
        }
    }

    fn to_f64(&self, key: &str, v: &Value) -> Result<f64, ConfigError> {
        match v {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(self.mismatch(key, "a number")),
        }
    }

    pub fn usize(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => self.to_usize(key, v),
        }
    }

    pub fn u64(&mut self, key: &str, default: u64) -> Result<u64, ConfigError> {
        Ok(self.usize(key, default as usize)? as u64)
    }

    /// Integer, or a decimal string for values above `i64::MAX`.
    pub fn seed(&mut self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as u64),
            Some(Value::String(s)) => s.parse().map_err(|_| self.mismatch(key, "a 64-bit unsigned integer")),
            Some(_) => Err(self.mismatch(key, "a 64-bit unsigned integer")),
        }
    }

    pub fn f64(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => self.to_f64(key, v),
        }
    }

    /// A number, or `"inf"` for `None`.
    pub fn opt_db(&mut self, key: &str, default: Option<f64>) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(Value::String(s)) if s == "inf" => Ok(None),
            Some(v) => self.to_f64(key, v).map(Some).map_err(|_| self.mismatch(key, "a number or \"inf\"")),
        }
    }

    /// An integer, or `"none"`.
    pub fn opt_usize(&mut self, key: &str, default: Option<usize>) -> Result<Option<usize>, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(Value::String(s)) if s == "none" => Ok(None),
            Some(v) => self.to_usize(key, v).map(Some),
        }
    }

    fn array(&mut self, key: &str) -> Result<Option<&'a Vec<Value>>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Array(a)) => Ok(Some(a)),
            Some(_) => Err(self.mismatch(key, "an array")),
        }
    }

    pub fn f64_list(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.array(key)? {
            None => Ok(default.to_vec()),
            Some(a) => a.iter().map(|v| self.to_f64(key, v)).collect(),
        }
    }

    pub fn usize_list(&mut self, key: &str, default: &[usize]) -> Result<Vec<usize>, ConfigError> {
        match self.array(key)? {
            None => Ok(default.to_vec()),
            Some(a) => a.iter().map(|v| self.to_usize(key, v)).collect(),
        }
    }

    pub fn str_list(&mut self, key: &str, default: &[&str]) -> Result<Vec<String>, ConfigError> {
        match self.array(key)? {
            None => Ok(default.iter().map(|s| s.to_string()).collect()),
            Some(a) => a
                .iter()
                .map(|v| v.as_str().map(str::to_string).ok_or_else(|| self.mismatch(key, "an array of strings")))
                .collect(),
        }
    }
}

/// Builders for the emitting side.
pub(crate) fn int(v: usize) -> Value {
    Value::Integer(v as i64)
}

pub(crate) fn float(v: f64) -> Value {
    Value::Float(v)
}

pub(crate) fn opt_db(v: Option<f64>) -> Value {
    v.map_or_else(|| Value::String("inf".into()), Value::Float)
}

pub(crate) fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| Value::Float(x)).collect())
}

pub(crate) fn ints(v: &[usize]) -> Value {
    Value::Array(v.iter().map(|&x| int(x)).collect())
}

pub(crate) fn strs<S: AsRef<str>>(v: &[S]) -> Value {
    Value::Array(v.iter().map(|s| Value::String(s.as_ref().to_string())).collect())
}
