//! Multicell pilot contamination: hexagonal layouts and drops, contaminated
//! channel estimates, the `M → ∞` SIR limits for MF and ZF precoding, and a
//! finite-`M` Monte-Carlo that precodes through the contaminated estimates.
//!
//! Large-scale gains use raw path loss (`β ≈ r^-3.8` with `r` in metres), so
//! SNRs in configs are given as cell-edge SNRs in dB and converted with
//! [`edge_snr_to_raw`].

mod finite;
mod layout;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{gen_large_scale, ChannelError, LargeScaleProfile};
use crate::numerics::ComplexMatrix;
use crate::precoding::PrecodingError;
use crate::rng::{tag, RngStreamKey, Stream};

pub use finite::{finite_m_sir_monte_carlo, FiniteMConfig, MulticellPrecoder, SirSample, SirTable};
pub use layout::{CellLayout, UserDrop};

const DROP: u64 = tag("multicell/drop");
const SHADOW: u64 = tag("multicell/shadow");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MulticellError {
    #[error("could not place terminal {terminal} of cell {cell} after {retries} retries")]
    RetriesExhausted { cell: usize, terminal: usize, retries: usize },
    #[error("no interfering cells: SIR is unbounded")]
    NoInterferers,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Precoding(#[from] PrecodingError),
}

/// Layout and propagation parameters shared by every multicell computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MulticellConfig {
    /// Centre-to-vertex cell radius, metres.
    pub radius: f64,
    pub tiers: usize,
    pub wraparound: bool,
    pub terminals: usize,
    pub min_distance: f64,
    pub exponent: f64,
    pub sigma_shadow_db: f64,
    pub max_retries: usize,
}

impl Default for MulticellConfig {
    fn default() -> Self {
        Self {
            radius: 1600.0,
            tiers: 2,
            wraparound: true,
            terminals: 10,
            min_distance: 100.0,
            exponent: 3.8,
            sigma_shadow_db: 8.0,
            max_retries: 10_000,
        }
    }
}

/// Cell-edge SNR (dB) to the raw SNR that multiplies `β = z/r^exponent`.
/// `None` (infinite SNR) maps to `f64::INFINITY`.
pub fn edge_snr_to_raw(snr_db: Option<f64>, radius: f64, exponent: f64) -> f64 {
    match snr_db {
        Some(db) => 10f64.powf(db / 10.0) * radius.powf(exponent),
        None => f64::INFINITY,
    }
}

/// Builds the layout, drops terminals and draws the large-scale profile for drop `key.trial`.
pub fn build_layout_and_drop(
    cfg: &MulticellConfig,
    key: RngStreamKey,
) -> Result<(CellLayout, UserDrop, LargeScaleProfile), MulticellError> {
    if cfg.terminals == 0 {
        return Err(MulticellError::InvalidParameter("terminals must be positive".into()));
    }
    let layout = CellLayout::new(cfg.radius, cfg.tiers, cfg.wraparound)?;
    let drop = UserDrop::generate(&layout, cfg.terminals, cfg.min_distance, cfg.max_retries, &mut key.with_purpose(DROP).stream())?;
    let beta = gen_large_scale(&layout, &drop, cfg.sigma_shadow_db, cfg.exponent, &mut key.with_purpose(SHADOW).stream())?;
    Ok((layout, drop, beta))
}

/// `Ĝ_nn = √ρ_p Σ_i G_in + V_n` as seen by base station `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContaminatedEstimate {
    pub g_hat: ComplexMatrix,
    pub cells: Vec<usize>,
    pub rho_p: f64,
}

/// Sums the channels of every cell sharing the pilots and adds CN(0,1)
/// estimation noise. With `ρ_p = ∞` the noise vanishes and the estimate is
/// reported in units of `√ρ_p`, i.e. `Σ_i G_in`.
pub fn pilot_contaminated_estimate(
    channels: &[ComplexMatrix],
    cells: Vec<usize>,
    rho_p: f64,
    rng: &mut Stream,
) -> Result<ContaminatedEstimate, MulticellError> {
    if !(rho_p > 0.0) {
        return Err(MulticellError::InvalidParameter(format!("rho_p must be positive, got {rho_p}")));
    }
    let first = channels.first().ok_or_else(|| MulticellError::InvalidParameter("no channels to combine".into()))?;
    if cells.len() != channels.len() {
        return Err(MulticellError::InvalidParameter("one cell index per channel is required".into()));
    }
    let (m, k) = first.shape();
    if channels.iter().any(|g| g.shape() != (m, k)) {
        return Err(MulticellError::InvalidParameter("channels differ in shape".into()));
    }
    let mut sum = ComplexMatrix::zeros(m, k);
    for g in channels {
        sum.axpy(Complex64::new(1.0, 0.0), g);
    }
    let g_hat = if rho_p.is_infinite() {
        sum
    } else {
        let noise = ComplexMatrix::from_col_major(m, k, rng.cn_vec(m * k));
        let mut est = sum.scale_real(rho_p.sqrt());
        est.axpy(Complex64::new(1.0, 0.0), &noise);
        est
    };
    Ok(ContaminatedEstimate { g_hat, cells, rho_p })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SirKind {
    Mf,
    Zf,
}

/// `M → ∞` SIR of terminal `l` in cell `j`:
/// MF `β²_jjℓ / Σ_{n≠j} β²_jnℓ`;
/// ZF `[β²_jjℓ/(Σ_i β_ijℓ + 1/ρ_p)²] / Σ_{n≠j} β²_jnℓ/(Σ_i β_inℓ + 1/ρ_p)²`.
/// Only large-scale quantities enter; `ρ_p = ∞` is allowed.
pub fn asymptotic_sir(kind: SirKind, beta: &LargeScaleProfile, rho_p: f64, j: usize, l: usize) -> Result<f64, MulticellError> {
    let cells = beta.cells();
    if j >= cells || l >= beta.terminals() {
        return Err(MulticellError::InvalidParameter(format!("cell {j} / terminal {l} out of range")));
    }
    if !(rho_p > 0.0) {
        return Err(MulticellError::InvalidParameter(format!("rho_p must be positive, got {rho_p}")));
    }
    if cells < 2 {
        return Err(MulticellError::NoInterferers);
    }
    let inv_rho = 1.0 / rho_p;
    let weight = |n: usize| -> f64 {
        let b = beta.beta(j, n, l);
        match kind {
            SirKind::Mf => b * b,
            SirKind::Zf => {
                let tot: f64 = (0..cells).map(|i| beta.beta(i, n, l)).sum::<f64>() + inv_rho;
                (b / tot).powi(2)
            }
        }
    };
    let signal = weight(j);
    let interference: f64 = (0..cells).filter(|&n| n != j).map(weight).sum();
    if interference == 0.0 {
        return Err(MulticellError::NoInterferers);
    }
    Ok(signal / interference)
}

/// Regularized ZF in the `M → ∞` limit with `δ = ratio · M`: the ZF
/// expression with `1/ρ_p` replaced by `(1 + ratio)/ρ_p`.
pub fn asymptotic_sir_rzf(beta: &LargeScaleProfile, rho_p: f64, delta_over_m: f64, j: usize, l: usize) -> Result<f64, MulticellError> {
    if !(delta_over_m >= 0.0) {
        return Err(MulticellError::InvalidParameter(format!("delta/M must be >= 0, got {delta_over_m}")));
    }
    asymptotic_sir(SirKind::Zf, beta, rho_p / (1.0 + delta_over_m), j, l)
}

/// [`asymptotic_sir`] with an unbounded SIR mapped to `+∞`.
pub fn asymptotic_sir_or_inf(kind: SirKind, beta: &LargeScaleProfile, rho_p: f64, j: usize, l: usize) -> Result<f64, MulticellError> {
    match asymptotic_sir(kind, beta, rho_p, j, l) {
        Err(MulticellError::NoInterferers) => Ok(f64::INFINITY),
        other => other,
    }
}
