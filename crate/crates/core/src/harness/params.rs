//! Parameters of each experiment. Defaults reproduce the reference
//! settings where those exist.

use toml::Table;

use super::config::{float, floats, int, ints, opt_db, strs, ConfigError, ExperimentKind, Section};
use crate::channel::ScattererConfig;
use crate::detection::{DetectorConfig, FCSD_DEFAULT_BUDGET};
use crate::multicell::{FiniteMConfig, MulticellConfig, MulticellPrecoder};

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentParams {
    Capacity(CapacityParams),
    Precoding(PrecodingParams),
    Multicell(FiniteMConfig),
    Detect(DetectParams),
    Focusing(FocusingParams),
    EigenCdf(EigenCdfParams),
    NeumannBench(NeumannBenchParams),
}

impl ExperimentParams {
    pub fn defaults(kind: ExperimentKind) -> Self {
        match kind {
            ExperimentKind::Capacity => Self::Capacity(CapacityParams::default()),
            ExperimentKind::Precoding => Self::Precoding(PrecodingParams::default()),
            ExperimentKind::Multicell => Self::Multicell(FiniteMConfig::default()),
            ExperimentKind::Detect => Self::Detect(DetectParams::default()),
            ExperimentKind::Focusing => Self::Focusing(FocusingParams::default()),
            ExperimentKind::EigenCdf => Self::EigenCdf(EigenCdfParams::default()),
            ExperimentKind::NeumannBench => Self::NeumannBench(NeumannBenchParams::default()),
        }
    }

    pub fn kind(&self) -> ExperimentKind {
        match self {
            Self::Capacity(_) => ExperimentKind::Capacity,
            Self::Precoding(_) => ExperimentKind::Precoding,
            Self::Multicell(_) => ExperimentKind::Multicell,
            Self::Detect(_) => ExperimentKind::Detect,
            Self::Focusing(_) => ExperimentKind::Focusing,
            Self::EigenCdf(_) => ExperimentKind::EigenCdf,
            Self::NeumannBench(_) => ExperimentKind::NeumannBench,
        }
    }

    pub fn read(kind: ExperimentKind, sec: &mut Section) -> Result<Self, ConfigError> {
        Ok(match kind {
            ExperimentKind::Capacity => Self::Capacity(CapacityParams::read(sec)?),
            ExperimentKind::Precoding => Self::Precoding(PrecodingParams::read(sec)?),
            ExperimentKind::Multicell => Self::Multicell(read_multicell(sec)?),
            ExperimentKind::Detect => Self::Detect(DetectParams::read(sec)?),
            ExperimentKind::Focusing => Self::Focusing(FocusingParams::read(sec)?),
            ExperimentKind::EigenCdf => Self::EigenCdf(EigenCdfParams::read(sec)?),
            ExperimentKind::NeumannBench => Self::NeumannBench(NeumannBenchParams::read(sec)?),
        })
    }

    pub fn to_table(&self) -> Table {
        match self {
            Self::Capacity(p) => p.to_table(),
            Self::Precoding(p) => p.to_table(),
            Self::Multicell(p) => write_multicell(p),
            Self::Detect(p) => p.to_table(),
            Self::Focusing(p) => p.to_table(),
            Self::EigenCdf(p) => p.to_table(),
            Self::NeumannBench(p) => p.to_table(),
        }
    }

    /// Re-reads the emitted table, which applies every range check.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = self.to_table();
        let mut sec = Section::new(self.kind().name(), Some(&t));
        Self::read(self.kind(), &mut sec)?;
        sec.finish()
    }
}

fn check(sec: &Section, key: &str, ok: bool, detail: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(sec.range(key, detail))
    }
}

fn check_subset(sec: &Section, key: &str, values: &[String], allowed: &[&str]) -> Result<(), ConfigError> {
    if values.is_empty() {
        return Err(sec.range(key, "must not be empty"));
    }
    for (i, v) in values.iter().enumerate() {
        if !allowed.contains(&v.as_str()) {
            return Err(sec.range(key, format!("`{v}` is not one of {allowed:?}")));
        }
        if values[..i].contains(v) {
            return Err(sec.range(key, format!("`{v}` listed twice")));
        }
    }
    Ok(())
}

/// Ergodic sum rates of the single-cell forward link.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityParams {
    pub k: usize,
    pub m: Vec<usize>,
    pub rho_f_db: Vec<f64>,
    /// Subset of `if`, `dpc`, `zf`, `mf`.
    pub techniques: Vec<String>,
    pub trials: usize,
}

impl Default for CapacityParams {
    fn default() -> Self {
        Self {
            k: 15,
            m: vec![15, 40, 100],
            rho_f_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            techniques: strs_vec(&["if", "dpc", "zf", "mf"]),
            trials: 500,
        }
    }
}

fn strs_vec(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl CapacityParams {
    fn read(sec: &mut Section) -> Result<Self, ConfigError> {
        let d = Self::default();
        let p = Self {
            k: sec.usize("k", d.k)?,
            m: sec.usize_list("m", &d.m)?,
            rho_f_db: sec.f64_list("rho_f_db", &d.rho_f_db)?,
            techniques: sec.str_list("techniques", &["if", "dpc", "zf", "mf"])?,
            trials: sec.usize("trials", d.trials)?,
        };
        check(sec, "k", p.k >= 1, "must be >= 1")?;
        check(sec, "m", !p.m.is_empty() && p.m.iter().all(|&m| m >= p.k), "must be non-empty with every M >= K")?;
        check(sec, "rho_f_db", !p.rho_f_db.is_empty() && p.rho_f_db.iter().all(|r| r.is_finite()), "must be non-empty and finite")?;
        check_subset(sec, "techniques", &p.techniques, &["if", "dpc", "zf", "mf"])?;
        check(sec, "trials", p.trials >= 100, "must be >= 100")?;
        Ok(p)
    }

    fn to_table(&self) -> Table {
        let mut t = Table::new();
        t.insert("k".into(), int(self.k));
        t.insert("m".into(), ints(&self.m));
        t.insert("rho_f_db".into(), floats(&self.rho_f_db));
        t.insert("techniques".into(), strs(&self.techniques));
        t.insert("trials".into(), int(self.trials));
        t
    }
}

/// Monte-Carlo forward-link SINR against the large-system closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodingParams {
    pub k: usize,
    pub alpha: Vec<f64>,
    pub rho_f_db: Vec<f64>,
    /// Estimate reliabilities; 1 is perfect CSI.
    pub xi: Vec<f64>,
    /// Subset of `if`, `zf`, `mf`.
    pub techniques: Vec<String>,
    pub trials: usize,
}

impl Default for PrecodingParams {
    fn default() -> Self {
        Self {
            k: 20,
            alpha: vec![2.0, 4.0, 8.0],
            rho_f_db: vec![0.0, 10.0, 30.0],
            xi: vec![1.0, 0.9],
            techniques: strs_vec(&["if", "zf", "mf"]),
            trials: 500,
        }
    }
}

impl PrecodingParams {
    fn read(sec: &mut Section) -> Result<Self, ConfigError> {
        let d = Self::default();
        let p = Self {
            k: sec.usize("k", d.k)?,
            alpha: sec.f64_list("alpha", &d.alpha)?,
            rho_f_db: sec.f64_list("rho_f_db", &d.rho_f_db)?,
            xi: sec.f64_list("xi", &d.xi)?,
            techniques: sec.str_list("techniques", &["if", "zf", "mf"])?,
            trials: sec.usize("trials", d.trials)?,
        };
        check(sec, "k", p.k >= 1, "must be >= 1")?;
        check(sec, "alpha", !p.alpha.is_empty() && p.alpha.iter().all(|&a| a > 1.0 && a.is_finite()), "every alpha must exceed 1")?;
        check(sec, "rho_f_db", !p.rho_f_db.is_empty() && p.rho_f_db.iter().all(|r| r.is_finite()), "must be non-empty and finite")?;
        check(sec, "xi", !p.xi.is_empty() && p.xi.iter().all(|x| (0.0..=1.0).contains(x)), "entries must lie in [0, 1]")?;
        check_subset(sec, "techniques", &p.techniques, &["if", "zf", "mf"])?;
        check(sec, "trials", p.trials >= 100, "must be >= 100")?;
        Ok(p)
    }

    fn to_table(&self) -> Table {
        let mut t = Table::new();
        t.insert("k".into(), int(self.k));
        t.insert("alpha".into(), floats(&self.alpha));
        t.insert("rho_f_db".into(), floats(&self.rho_f_db));
        t.insert("xi".into(), floats(&self.xi));
        t.insert("techniques".into(), strs(&self.techniques));
        t.insert("trials".into(), int(self.trials));
        t
    }
}

const RZF_DEFAULT_DELTA_OVER_M: f64 = 0.05;

fn read_multicell(sec: &mut Section) -> Result<FiniteMConfig, ConfigError> {
    let d = FiniteMConfig::default();
    let dl = MulticellConfig::default();
    let layout = MulticellConfig {
        radius: sec.f64("radius", dl.radius)?,
        tiers: sec.usize("tiers", dl.tiers)?,
        wraparound: sec.bool("wraparound", dl.wraparound)?,
        terminals: sec.usize("terminals", dl.terminals)?,
        min_distance: sec.f64("min_distance", dl.min_distance)?,
        exponent: sec.f64("exponent", dl.exponent)?,
        sigma_shadow_db: sec.f64("sigma_shadow_db", dl.sigma_shadow_db)?,
        max_retries: sec.usize("max_retries", dl.max_retries)?,
    };
    check(sec, "radius", layout.radius > 0.0 && layout.radius.is_finite(), "must be positive")?;
    check(sec, "tiers", layout.tiers >= 1, "must be >= 1")?;
    check(sec, "terminals", layout.terminals >= 1, "must be >= 1")?;
    check(sec, "min_distance", layout.min_distance >= 0.0 && layout.min_distance < layout.radius, "must lie in [0, radius)")?;
    check(sec, "exponent", layout.exponent > 0.0 && layout.exponent.is_finite(), "must be positive")?;
    check(sec, "sigma_shadow_db", layout.sigma_shadow_db >= 0.0 && layout.sigma_shadow_db.is_finite(), "must be >= 0")?;
    check(sec, "max_retries", layout.max_retries >= 1, "must be >= 1")?;
    let m_values = sec.usize_list("m", &d.m_values)?;
    let drops = sec.usize("drops", d.drops)?;
    let rho_p_db = sec.opt_db("rho_p_db", d.rho_p_db)?;
    let rho_f_db = sec.opt_db("rho_f_db", d.rho_f_db)?;
    let names = sec.str_list("precoders", &["mf", "zf", "rzf"])?;
    let delta_over_m = sec.f64("rzf_delta_over_m", RZF_DEFAULT_DELTA_OVER_M)?;
    check(sec, "m", !m_values.is_empty() && m_values.iter().all(|&m| m >= layout.terminals), "must be non-empty with every M >= terminals")?;
    check(sec, "drops", drops >= 1, "must be >= 1")?;
    for (key, v) in [("rho_p_db", rho_p_db), ("rho_f_db", rho_f_db)] {
        check(sec, key, v.map_or(true, f64::is_finite), "must be finite or \"inf\"")?;
    }
    check_subset(sec, "precoders", &names, &["mf", "zf", "rzf"])?;
    check(sec, "rzf_delta_over_m", delta_over_m >= 0.0 && delta_over_m.is_finite(), "must be >= 0")?;
    let precoders = names
        .iter()
        .map(|n| match n.as_str() {
            "mf" => MulticellPrecoder::Mf,
            "zf" => MulticellPrecoder::Zf,
            _ => MulticellPrecoder::Rzf { delta_over_m },
        })
        .collect();
    Ok(FiniteMConfig { layout, m_values, drops, rho_p_db, rho_f_db, precoders })
}

fn write_multicell(c: &FiniteMConfig) -> Table {
    let mut t = Table::new();
    let l = &c.layout;
    t.insert("radius".into(), float(l.radius));
    t.insert("tiers".into(), int(l.tiers));
    t.insert("wraparound".into(), toml::Value::Boolean(l.wraparound));
    t.insert("terminals".into(), int(l.terminals));
    t.insert("min_distance".into(), float(l.min_distance));
    t.insert("exponent".into(), float(l.exponent));
    t.insert("sigma_shadow_db".into(), float(l.sigma_shadow_db));
    t.insert("max_retries".into(), int(l.max_retries));
    t.insert("m".into(), ints(&c.m_values));
    t.insert("drops".into(), int(c.drops));
    t.insert("rho_p_db".into(), opt_db(c.rho_p_db));
    t.insert("rho_f_db".into(), opt_db(c.rho_f_db));
    let mut names = Vec::new();
    let mut delta = RZF_DEFAULT_DELTA_OVER_M;
    for p in &c.precoders {
        names.push(match p {
            MulticellPrecoder::Mf => "mf",
            MulticellPrecoder::Zf => "zf",
            MulticellPrecoder::Rzf { delta_over_m } => {
                delta = *delta_over_m;
                "rzf"
            }
        });
    }
    t.insert("precoders".into(), strs(&names));
    t.insert("rzf_delta_over_m".into(), float(delta));
    t
}

/// Uncoded QPSK BER of the uplink detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectParams {
    pub k: usize,
    /// One BER table per entry.
    pub m: Vec<usize>,
    pub rho_db: Vec<f64>,
    /// When set, ρ scales as `1/M` and `rho_db` applies at this `M`.
    pub rho_reference_m: Option<usize>,
    pub detectors: Vec<DetectorConfig>,
    pub target_errors: u64,
    pub max_vectors: u64,
    pub batch_size: u64,
    pub round_batches: u64,
    pub include_genie: bool,
    /// Off writes `wall_ns = 0`, making the CSV byte-reproducible.
    pub record_timing: bool,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            k: 15,
            m: vec![15, 30, 45, 60, 75, 90],
            rho_db: vec![12.0],
            rho_reference_m: Some(15),
            detectors: vec![
                DetectorConfig::Mmse,
                DetectorConfig::mmse_sic(),
                DetectorConfig::bigdfe(),
                DetectorConfig::ts(),
                DetectorConfig::fcsd(),
            ],
            target_errors: 500,
            max_vectors: 200_000,
            batch_size: 32,
            round_batches: 8,
            include_genie: true,
            record_timing: false,
        }
    }
}

const DETECTOR_NAMES: [&str; 7] = ["mmse", "mmse-sic", "bi-gdfe", "las", "ts", "fcsd", "ml"];

impl DetectParams {
    fn read(sec: &mut Section) -> Result<Self, ConfigError> {
        let d = Self::default();
        let k = sec.usize("k", d.k)?;
        let m = sec.usize_list("m", &d.m)?;
        let rho_db = sec.f64_list("rho_db", &d.rho_db)?;
        let rho_reference_m = sec.opt_usize("rho_reference_m", d.rho_reference_m)?;
        let names = sec.str_list("detectors", &["mmse", "mmse-sic", "bi-gdfe", "ts", "fcsd"])?;
        let sic_iter = sec.usize("sic_iter", 6)?;
        let bigdfe_iter = sec.usize("bigdfe_iter", 4)?;
        let idc = match sec.take("bigdfe_idc") {
            None => None,
            Some(_) => Some(sec.f64_list("bigdfe_idc", &[])?),
        };
        let las_iter = sec.usize("las_iter", 1000)?;
        let ts_iter = sec.usize("ts_iter", 60)?;
        let ts_tabu = sec.usize("ts_tabu", 60)?;
        let fcsd_r = sec.usize("fcsd_r", 8)?;
        let fcsd_budget = sec.u64("fcsd_budget", FCSD_DEFAULT_BUDGET)?;
        let p = Self {
            k,
            m,
            rho_db,
            rho_reference_m,
            detectors: Vec::new(),
            target_errors: sec.u64("target_errors", d.target_errors)?,
            max_vectors: sec.u64("max_vectors", d.max_vectors)?,
            batch_size: sec.u64("batch_size", d.batch_size)?,
            round_batches: sec.u64("round_batches", d.round_batches)?,
            include_genie: sec.bool("include_genie", d.include_genie)?,
            record_timing: sec.bool("record_timing", d.record_timing)?,
        };
        check(sec, "k", p.k >= 1, "must be >= 1")?;
        check(sec, "m", !p.m.is_empty() && p.m.iter().all(|&m| m >= p.k), "must be non-empty with every M >= K")?;
        check(sec, "rho_db", !p.rho_db.is_empty() && p.rho_db.iter().all(|r| r.is_finite()), "must be non-empty and finite")?;
        check(sec, "rho_reference_m", p.rho_reference_m != Some(0), "must be positive or \"none\"")?;
        check_subset(sec, "detectors", &names, &DETECTOR_NAMES)?;
        check(sec, "sic_iter", sic_iter >= 1, "must be >= 1")?;
        check(sec, "ts_iter", ts_iter >= 1, "must be >= 1")?;
        if let Some(c) = &idc {
            check(sec, "bigdfe_idc", c.len() == bigdfe_iter && c.iter().all(|x| (0.0..=1.0).contains(x)), "needs bigdfe_iter entries in [0, 1]")?;
        }
        check(sec, "bigdfe_iter", bigdfe_iter >= 1, "must be >= 1")?;
        if names.iter().any(|n| n == "fcsd") {
            check(sec, "fcsd_r", fcsd_r <= p.k, "must not exceed K")?;
        }
        check(sec, "fcsd_budget", fcsd_budget >= 1, "must be >= 1")?;
        if names.iter().any(|n| n == "ml") {
            check(sec, "k", p.k <= crate::detection::ML_MAX_K, "ML detection is limited to small K")?;
        }
        check(sec, "target_errors", p.target_errors >= 1, "must be >= 1")?;
        check(sec, "max_vectors", p.max_vectors >= 1, "must be >= 1")?;
        check(sec, "batch_size", p.batch_size >= 1, "must be >= 1")?;
        check(sec, "round_batches", p.round_batches >= 1, "must be >= 1")?;
        let detectors = names
            .iter()
            .map(|n| match n.as_str() {
                "mmse" => DetectorConfig::Mmse,
                "mmse-sic" => DetectorConfig::MmseSic { n_iter: sic_iter },
                "bi-gdfe" => DetectorConfig::BiGdfe { n_iter: bigdfe_iter, idc: idc.clone() },
                "las" => DetectorConfig::Las { max_iter: las_iter },
                "ts" => DetectorConfig::Ts { n_iter: ts_iter, n_tabu: ts_tabu },
                "fcsd" => DetectorConfig::Fcsd { r: fcsd_r, budget: fcsd_budget },
                _ => DetectorConfig::Ml,
            })
            .collect();
        Ok(Self { detectors, ..p })
    }

    fn to_table(&self) -> Table {
        let mut t = Table::new();
        t.insert("k".into(), int(self.k));
        t.insert("m".into(), ints(&self.m));
        t.insert("rho_db".into(), floats(&self.rho_db));
        t.insert("rho_reference_m".into(), self.rho_reference_m.map_or_else(|| toml::Value::String("none".into()), int));
        let mut names = Vec::new();
        for d in &self.detectors {
            let name = match d {
                DetectorConfig::Mmse => "mmse",
                DetectorConfig::MmseSic { n_iter } => {
                    t.insert("sic_iter".into(), int(*n_iter));
                    "mmse-sic"
                }
                DetectorConfig::BiGdfe { n_iter, idc } => {
                    t.insert("bigdfe_iter".into(), int(*n_iter));
                    if let Some(c) = idc {
                        t.insert("bigdfe_idc".into(), floats(c));
                    }
                    "bi-gdfe"
                }
                DetectorConfig::Las { max_iter } => {
                    t.insert("las_iter".into(), int(*max_iter));
                    "las"
                }
                DetectorConfig::Ts { n_iter, n_tabu } => {
                    t.insert("ts_iter".into(), int(*n_iter));
                    t.insert("ts_tabu".into(), int(*n_tabu));
                    "ts"
                }
                DetectorConfig::Fcsd { r, budget } => {
                    t.insert("fcsd_r".into(), int(*r));
                    t.insert("fcsd_budget".into(), int(*budget as usize));
                    "fcsd"
                }
                DetectorConfig::Ml => "ml",
            };
            names.push(name);
        }
        t.insert("detectors".into(), strs(&names));
        t.insert("target_errors".into(), int(self.target_errors as usize));
        t.insert("max_vectors".into(), int(self.max_vectors as usize));
        t.insert("batch_size".into(), int(self.batch_size as usize));
        t.insert("round_batches".into(), int(self.round_batches as usize));
        t.insert("include_genie".into(), toml::Value::Boolean(self.include_genie));
        t.insert("record_timing".into(), toml::Value::Boolean(self.record_timing));
        t
    }
}

/// Normalized field strength around a focused receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct FocusingParams {
    pub m: Vec<usize>,
    /// Grid spans `[-half_width, half_width]²` wavelengths around the receiver.
    pub half_width: f64,
    pub step: f64,
    pub scatterer: ScattererConfig,
    /// Level used for the coverage summary, dB.
    pub threshold_db: f64,
}

impl Default for FocusingParams {
    fn default() -> Self {
        Self { m: vec![10, 100], half_width: 5.0, step: 0.1, scatterer: ScattererConfig::default(), threshold_db: -5.0 }
    }
}

impl FocusingParams {
    fn read(sec: &mut Section) -> Result<Self, ConfigError> {
        let d = Self::default();
        let s = &d.scatterer;
        let p = Self {
            m: sec.usize_list("m", &d.m)?,
            half_width: sec.f64("half_width", d.half_width)?,
            step: sec.f64("step", d.step)?,
            scatterer: ScattererConfig {
                scatterers: sec.usize("scatterers", s.scatterers)?,
                square_side: sec.f64("square_side", s.square_side)?,
                standoff: sec.f64("standoff", s.standoff)?,
                element_spacing: sec.f64("element_spacing", s.element_spacing)?,
                amp_exponent: sec.f64("amp_exponent", s.amp_exponent)?,
            },
            threshold_db: sec.f64("threshold_db", d.threshold_db)?,
        };
        check(sec, "m", !p.m.is_empty() && p.m.iter().all(|&m| m >= 1), "must be non-empty and positive")?;
        check(sec, "step", p.step > 0.0 && p.step.is_finite(), "must be positive")?;
        check(sec, "half_width", p.half_width >= 0.0 && p.half_width / p.step <= 5000.0, "must be >= 0 and at most 5000 steps")?;
        check(sec, "scatterers", p.scatterer.scatterers >= 1, "must be >= 1")?;
        check(sec, "square_side", p.scatterer.square_side > 0.0, "must be positive")?;
        check(sec, "standoff", p.scatterer.standoff >= 0.0, "must be >= 0")?;
        check(sec, "element_spacing", p.scatterer.element_spacing > 0.0, "must be positive")?;
        check(sec, "amp_exponent", p.scatterer.amp_exponent >= 0.0, "must be >= 0")?;
        check(sec, "threshold_db", p.threshold_db.is_finite(), "must be finite")?;
        Ok(p)
    }

    fn to_table(&self) -> Table {
        let mut t = Table::new();
        t.insert("m".into(), ints(&self.m));
        t.insert("half_width".into(), float(self.half_width));
        t.insert("step".into(), float(self.step));
        t.insert("scatterers".into(), int(self.scatterer.scatterers));
        t.insert("square_side".into(), float(self.scatterer.square_side));
        t.insert("standoff".into(), float(self.scatterer.standoff));
        t.insert("element_spacing".into(), float(self.scatterer.element_spacing));
        t.insert("amp_exponent".into(), float(self.scatterer.amp_exponent));
        t.insert("threshold_db".into(), float(self.threshold_db));
        t
    }
}

/// Ordered eigenvalues of `GᴴG` for IID channels.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCdfParams {
    pub m: Vec<usize>,
    pub k: usize,
    pub draws: usize,
}

impl Default for EigenCdfParams {
    fn default() -> Self {
        Self { m: vec![6, 128], k: 6, draws: 1000 }
    }
}

impl EigenCdfParams {
    fn read(sec: &mut Section) -> Result<Self, ConfigError> {
        let d = Self::default();
        let p = Self { m: sec.usize_list("m", &d.m)?, k: sec.usize("k", d.k)?, draws: sec.usize("draws", d.draws)? };
        check(sec, "k", p.k >= 1, "must be >= 1")?;
        check(sec, "m", !p.m.is_empty() && p.m.iter().all(|&m| m >= 1), "must be non-empty and positive")?;
        check(sec, "draws", p.draws >= 1, "must be >= 1")?;
        Ok(p)
    }

    fn to_table(&self) -> Table {
        let mut t = Table::new();
        t.insert("m".into(), ints(&self.m));
        t.insert("k".into(), int(self.k));
        t.insert("draws".into(), int(self.draws));
        t
    }
}

/// Accuracy of the truncated Neumann inverse, plus the extreme-eigenvalue
/// check of `GᴴG/M` that governs its convergence.
#[derive(Debug, Clone, PartialEq)]
pub struct NeumannBenchParams {
    pub alpha: f64,
    pub k: usize,
    pub terms: Vec<usize>,
    /// `None` picks the default for `alpha`.
    pub delta: Option<f64>,
    /// `fixed` (`M + K`) or `trace`.
    pub weighting: String,
    pub draws: usize,
    pub spectrum_alpha: f64,
    pub spectrum_k: usize,
    pub spectrum_draws: usize,
}

impl Default for NeumannBenchParams {
    fn default() -> Self {
        Self {
            alpha: 8.0,
            k: 50,
            terms: vec![0, 1, 2, 3, 4, 6, 8],
            delta: None,
            weighting: "fixed".into(),
            draws: 100,
            spectrum_alpha: 4.0,
            spectrum_k: 200,
            spectrum_draws: 10,
        }
    }
}

impl NeumannBenchParams {
    fn read(sec: &mut Section) -> Result<Self, ConfigError> {
        let d = Self::default();
        let delta = match sec.take("delta") {
            Some(toml::Value::String(s)) if s == "auto" => None,
            Some(_) => Some(sec.f64("delta", 1.0)?),
            None => d.delta,
        };
        let p = Self {
            alpha: sec.f64("alpha", d.alpha)?,
            k: sec.usize("k", d.k)?,
            terms: sec.usize_list("terms", &d.terms)?,
            delta,
            weighting: sec.str("weighting", &d.weighting)?,
            draws: sec.usize("draws", d.draws)?,
            spectrum_alpha: sec.f64("spectrum_alpha", d.spectrum_alpha)?,
            spectrum_k: sec.usize("spectrum_k", d.spectrum_k)?,
            spectrum_draws: sec.usize("spectrum_draws", d.spectrum_draws)?,
        };
        check(sec, "alpha", p.alpha >= 1.0 && p.alpha.is_finite(), "must be >= 1")?;
        check(sec, "k", p.k >= 1, "must be >= 1")?;
        check(sec, "terms", !p.terms.is_empty() && p.terms.iter().all(|&l| l <= crate::numerics::MAX_TERMS), "must be non-empty and within the term cap")?;
        check(sec, "delta", p.delta.map_or(true, |x| x > 0.0 && x <= 1.0), "must lie in (0, 1] or be \"auto\"")?;
        check(sec, "weighting", p.weighting == "fixed" || p.weighting == "trace", "must be \"fixed\" or \"trace\"")?;
        check(sec, "draws", p.draws >= 1, "must be >= 1")?;
        check(sec, "spectrum_alpha", p.spectrum_alpha >= 1.0 && p.spectrum_alpha.is_finite(), "must be >= 1")?;
        check(sec, "spectrum_k", p.spectrum_k >= 1, "must be >= 1")?;
        Ok(p)
    }

    fn to_table(&self) -> Table {
        let mut t = Table::new();
        t.insert("alpha".into(), float(self.alpha));
        t.insert("k".into(), int(self.k));
        t.insert("terms".into(), ints(&self.terms));
        t.insert("delta".into(), self.delta.map_or_else(|| toml::Value::String("auto".into()), float));
        t.insert("weighting".into(), toml::Value::String(self.weighting.clone()));
        t.insert("draws".into(), int(self.draws));
        t.insert("spectrum_alpha".into(), float(self.spectrum_alpha));
        t.insert("spectrum_k".into(), int(self.spectrum_k));
        t.insert("spectrum_draws".into(), int(self.spectrum_draws));
        t
    }
}
