//! Uplink hard detection of QPSK vectors from `x = √p G q + w`, `w ~ CN(0, I)`,
//! with per-terminal symbol power `p = ρ/K`.
//!
//! Detectors range from linear MMSE through soft/hard interference
//! cancellation and local search to tree search, plus an exact ML oracle.
//! Each reports a rough flop estimate alongside the decision.

mod ber;
mod cancel;
mod complexity;
mod linear;
mod search;
mod tree;

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{ComplexMatrix, NumericsError};

pub use ber::{
    ber_experiment, genie_ber_closed_form, rho_at_ber, wilson_interval, BerConfig, BerPoint, BerTable, GENIE,
};
pub use cancel::{detect_bigdfe, detect_mmse_sic, idc_ramp, BiGdfeFilters};
pub use complexity::{table2_complexity, ComplexityParams, Flops, Technique};
pub use linear::{detect_linear_mmse, mmse_filter};
pub use search::{detect_random_step, detect_random_step_traced, SearchMode, SearchStep, SearchTrace};
pub use tree::{detect_fcsd, detect_fcsd_ordered, fcsd_order, detect_ml_brute_force, detect_ml_oracle, zf_df, FCSD_DEFAULT_BUDGET, ML_MAX_K};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectionError {
    #[error("QPSK needs an even number of bits, got {0}")]
    OddBitCount(usize),
    #[error("FCSD would enumerate {candidates} candidates, budget is {budget}")]
    BudgetExceeded { candidates: u128, budget: u64 },
    #[error("exhaustive search over K = {k} terminals exceeds the limit of {max}")]
    TooLarge { k: usize, max: usize },
    #[error("unknown detection technique `{0}`")]
    UnknownTechnique(String),
    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Gray-mapped unit-energy QPSK: bit pair `(b0, b1)` maps to
/// `((1 − 2b0) + j(1 − 2b1))/√2`. Symbols are carried as indices `b0 | b1 << 1`.
pub fn qpsk_symbol(index: u8) -> Complex64 {
    Complex64::new(if index & 1 == 0 { H } else { -H }, if index & 2 == 0 { H } else { -H })
}

/// Nearest constellation index (per-dimension sign decision).
pub fn qpsk_slice(z: Complex64) -> u8 {
    u8::from(z.re < 0.0) | (u8::from(z.im < 0.0) << 1)
}

pub fn qpsk_map(bits: &[bool]) -> Result<Vec<Complex64>, DetectionError> {
    if bits.len() % 2 != 0 {
        return Err(DetectionError::OddBitCount(bits.len()));
    }
    Ok(bits.chunks(2).map(|b| qpsk_symbol(u8::from(b[0]) | (u8::from(b[1]) << 1))).collect())
}

/// Hard demapping of (possibly noisy) symbols.
pub fn qpsk_demap(symbols: &[Complex64]) -> Vec<bool> {
    symbols.iter().flat_map(|&z| [z.re < 0.0, z.im < 0.0]).collect()
}

pub fn indices_to_symbols(idx: &[u8]) -> Vec<Complex64> {
    idx.iter().map(|&i| qpsk_symbol(i)).collect()
}

/// One received vector and the channel that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionProblem {
    pub g: ComplexMatrix,
    pub x: Vec<Complex64>,
    /// Total transmit power ρ (linear); each terminal sends with `p = ρ/K`.
    pub rho: f64,
}

impl DetectionProblem {
    pub fn new(g: ComplexMatrix, x: Vec<Complex64>, rho: f64) -> Result<Self, DetectionError> {
        if x.len() != g.rows() {
            return Err(DetectionError::DimensionMismatch(format!("x has {} entries, G has {} rows", x.len(), g.rows())));
        }
        if g.cols() == 0 {
            return Err(DetectionError::DimensionMismatch("no terminals".into()));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(DetectionError::InvalidParameter(format!("rho must be positive and finite, got {rho}")));
        }
        Ok(Self { g, x, rho })
    }

    pub fn m(&self) -> usize {
        self.g.rows()
    }

    pub fn k(&self) -> usize {
        self.g.cols()
    }

    /// Per-terminal symbol power `ρ/K`.
    pub fn p(&self) -> f64 {
        self.rho / self.k() as f64
    }

    /// Effective channel `√p G`.
    pub fn h(&self) -> ComplexMatrix {
        self.g.scale_real(self.p().sqrt())
    }

    /// `‖x − √p G q‖²` for symbol indices `q`.
    pub fn metric(&self, q: &[u8]) -> f64 {
        let s = indices_to_symbols(q);
        let hq = self.g.mat_vec(&s);
        let sp = self.p().sqrt();
        self.x.iter().zip(&hq).map(|(x, y)| (x - y * sp).norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    /// Detected symbol indices, see [`qpsk_symbol`].
    pub q_hat: Vec<u8>,
    pub metric: f64,
    /// Candidate vectors whose metric was evaluated (or tree leaves reached).
    pub visited: u64,
    pub flops: Flops,
    pub wall_ns: u64,
}

impl DetectionResult {
    pub fn symbols(&self) -> Vec<Complex64> {
        indices_to_symbols(&self.q_hat)
    }

    pub(crate) fn finish(problem: &DetectionProblem, q_hat: Vec<u8>, visited: u64, flops: Flops, start: Instant) -> Self {
        let metric = problem.metric(&q_hat);
        Self { q_hat, metric, visited, flops, wall_ns: start.elapsed().as_nanos() as u64 }
    }
}

/// Detector and its parameters, with the customary defaults
/// (6 SIC iterations, 4 BI-GDFE iterations, TS 60/60, FCSD r = 8).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "technique", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DetectorConfig {
    Mmse,
    MmseSic {
        #[serde(default = "default_sic_iter")]
        n_iter: usize,
    },
    BiGdfe {
        #[serde(default = "default_bigdfe_iter")]
        n_iter: usize,
        /// Input-decision correlation per iteration; a 0.5 → 1 geometric ramp if absent.
        #[serde(default)]
        idc: Option<Vec<f64>>,
    },
    Las {
        #[serde(default = "default_las_iter")]
        max_iter: usize,
    },
    Ts {
        #[serde(default = "default_ts")]
        n_iter: usize,
        #[serde(default = "default_ts")]
        n_tabu: usize,
    },
    Fcsd {
        #[serde(default = "default_fcsd_r")]
        r: usize,
        #[serde(default = "default_fcsd_budget")]
        budget: u64,
    },
    Ml,
}

fn default_sic_iter() -> usize {
    6
}
fn default_bigdfe_iter() -> usize {
    4
}
fn default_las_iter() -> usize {
    1000
}
fn default_ts() -> usize {
    60
}
fn default_fcsd_r() -> usize {
    8
}
fn default_fcsd_budget() -> u64 {
    FCSD_DEFAULT_BUDGET
}

impl DetectorConfig {
    pub fn mmse_sic() -> Self {
        Self::MmseSic { n_iter: default_sic_iter() }
    }

    pub fn bigdfe() -> Self {
        Self::BiGdfe { n_iter: default_bigdfe_iter(), idc: None }
    }

    pub fn las() -> Self {
        Self::Las { max_iter: default_las_iter() }
    }

    pub fn ts() -> Self {
        Self::Ts { n_iter: default_ts(), n_tabu: default_ts() }
    }

    pub fn fcsd() -> Self {
        Self::Fcsd { r: default_fcsd_r(), budget: FCSD_DEFAULT_BUDGET }
    }

    pub fn technique(&self) -> Technique {
        match self {
            Self::Mmse => Technique::Mmse,
            Self::MmseSic { .. } => Technique::MmseSic,
            Self::BiGdfe { .. } => Technique::BiGdfe,
            Self::Las { .. } => Technique::Las,
            Self::Ts { .. } => Technique::Ts,
            Self::Fcsd { .. } => Technique::Fcsd,
            Self::Ml => Technique::Ml,
        }
    }

    pub fn label(&self) -> &'static str {
        self.technique().label()
    }

    pub fn validate(&self) -> Result<(), DetectionError> {
        let bad = |what: &str| Err(DetectionError::InvalidParameter(what.to_string()));
        match self {
            Self::MmseSic { n_iter } | Self::BiGdfe { n_iter, .. } if *n_iter == 0 => bad("n_iter must be >= 1"),
            Self::BiGdfe { n_iter, idc: Some(s) } if s.len() != *n_iter || s.iter().any(|c| !(0.0..=1.0).contains(c)) => {
                bad("IDC schedule must have n_iter entries in [0, 1]")
            }
            Self::Ts { n_iter, .. } if *n_iter == 0 => bad("n_iter must be >= 1"),
            _ => Ok(()),
        }
    }

    pub fn detect(&self, problem: &DetectionProblem) -> Result<DetectionResult, DetectionError> {
        self.validate()?;
        match self {
            Self::Mmse => detect_linear_mmse(problem),
            Self::MmseSic { n_iter } => detect_mmse_sic(problem, *n_iter),
            Self::BiGdfe { n_iter, idc } => {
                let schedule = idc.clone().unwrap_or_else(|| idc_ramp(*n_iter));
                detect_bigdfe(problem, &schedule)
            }
            Self::Las { max_iter } => detect_random_step(problem, SearchMode::Las, *max_iter, 0),
            Self::Ts { n_iter, n_tabu } => detect_random_step(problem, SearchMode::Ts, *n_iter, *n_tabu),
            Self::Fcsd { r, budget } => detect_fcsd(problem, *r, *budget),
            Self::Ml => detect_ml_oracle(problem),
        }
    }
}
