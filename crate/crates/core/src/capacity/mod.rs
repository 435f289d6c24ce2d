//! Point-to-point and multiuser rate evaluators, their large-array closed
//! forms, and the large-system SINR table for forward-link precoders.
//! All rates are in bits per channel use.

mod forward;
mod limits;

use std::f64::consts::LN_2;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{log2_det_hpd, ComplexMatrix, NumericsError};

pub use forward::{forward_sum_capacity, forward_sum_rate_at, ForwardSolution, PowerAllocation};
pub use limits::{large_system_sinr, Csi, LimitTechnique};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("non-finite rate")]
    NonFinite,
    #[error("unknown regime `{0}`")]
    UnknownRegime(String),
    #[error("missing parameter `{0}` for this regime")]
    MissingParameter(&'static str),
    #[error("forward sum-capacity optimizer stalled after {iterations} iterations (projected gradient {residual:e})")]
    OptimizerStall { iterations: usize, residual: f64 },
    #[error("vector-perturbation expression exceeds the interference-free value at alpha = {alpha}")]
    VpRangeExceeded { alpha: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    LowSnr,
    ManyTx,
    ManyRx,
    ReverseSum,
    ForwardSum,
}

impl FromStr for Regime {
    type Err = CapacityError;

    fn from_str(s: &str) -> Result<Self, CapacityError> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "lowsnr" => Ok(Regime::LowSnr),
            "manytx" => Ok(Regime::ManyTx),
            "manyrx" => Ok(Regime::ManyRx),
            "reversesum" => Ok(Regime::ReverseSum),
            "forwardsum" => Ok(Regime::ForwardSum),
            _ => Err(CapacityError::UnknownRegime(s.to_string())),
        }
    }
}

/// Rate with the trace bounds and a coarse regime label for the link shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub rate: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub regime: RegimeTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeTag {
    /// `ρ · Tr(GGᴴ)/n_t < 0.1`.
    LowSnr,
    /// `n_t >= 10 n_r`.
    ManyTx,
    /// `n_r >= 10 n_t`.
    ManyRx,
    General,
}

fn check_rho(rho: f64) -> Result<(), CapacityError> {
    if rho >= 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(CapacityError::InvalidParameter(format!("SNR must be finite and >= 0, got {rho}")))
    }
}

fn finite(x: f64) -> Result<f64, CapacityError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CapacityError::NonFinite)
    }
}

/// `log2 det(I + s·AᴴA)`, computed on the smaller Gram side.
pub fn log2_det_i_plus(a: &ComplexMatrix, s: f64) -> Result<f64, CapacityError> {
    let gram = if a.rows() >= a.cols() { a.gram() } else { a.outer_gram() };
    if gram.rows() == 0 {
        return Ok(0.0);
    }
    let m = gram.scale_real(s).add_identity(1.0);
    finite(log2_det_hpd(&m)?)
}

/// `C = log2 det(I + (ρ/n_t) GGᴴ)` for an `n_r x n_t` channel, with
/// `log2(1+ρTr/n_t) <= C <= n·log2(1+ρTr/(n_t n))`, `n = min(n_t, n_r)`.
pub fn p2p_rate(g: &ComplexMatrix, rho: f64) -> Result<RateReport, CapacityError> {
    check_rho(rho)?;
    if !g.all_finite() {
        return Err(CapacityError::NonFinite);
    }
    let (n_r, n_t) = g.shape();
    if n_r == 0 || n_t == 0 {
        return Err(CapacityError::InvalidParameter("empty channel".into()));
    }
    let rate = log2_det_i_plus(g, rho / n_t as f64)?;
    let tr = g.frobenius_norm_sqr();
    let n = n_t.min(n_r) as f64;
    let lower_bound = (1.0 + rho * tr / n_t as f64).log2();
    let upper_bound = n * (1.0 + rho * tr / (n_t as f64 * n)).log2();
    let regime = if rho * tr / (n_t as f64) < 0.1 {
        RegimeTag::LowSnr
    } else if n_t >= 10 * n_r {
        RegimeTag::ManyTx
    } else if n_r >= 10 * n_t {
        RegimeTag::ManyRx
    } else {
        RegimeTag::General
    };
    Ok(RateReport { rate, lower_bound: finite(lower_bound)?, upper_bound: finite(upper_bound)?, regime })
}

/// Inputs for [`asymptotic_rate`]; each regime reads only what it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticParams {
    pub rho: Option<f64>,
    pub n_r: Option<usize>,
    pub n_t: Option<usize>,
    pub m: Option<usize>,
    pub beta: Option<Vec<f64>>,
}

/// Large-array closed forms:
/// `ρn_r/ln2`, `n_r log2(1+ρ)`, `n_t log2(1+ρn_r/n_t)`,
/// `Σ log2(1+Mρβ_k)` and `max_γ Σ log2(1+Mργ_kβ_k)` (water-filling).
pub fn asymptotic_rate(regime: Regime, p: &AsymptoticParams) -> Result<f64, CapacityError> {
    let rho = p.rho.ok_or(CapacityError::MissingParameter("rho"))?;
    check_rho(rho)?;
    let v = match regime {
        Regime::LowSnr => rho * p.n_r.ok_or(CapacityError::MissingParameter("n_r"))? as f64 / LN_2,
        Regime::ManyTx => p.n_r.ok_or(CapacityError::MissingParameter("n_r"))? as f64 * (1.0 + rho).log2(),
        Regime::ManyRx => {
            let n_r = p.n_r.ok_or(CapacityError::MissingParameter("n_r"))? as f64;
            let n_t = p.n_t.ok_or(CapacityError::MissingParameter("n_t"))? as f64;
            n_t * (1.0 + rho * n_r / n_t).log2()
        }
        Regime::ReverseSum => {
            let m = p.m.ok_or(CapacityError::MissingParameter("m"))? as f64;
            let beta = p.beta.as_ref().ok_or(CapacityError::MissingParameter("beta"))?;
            beta.iter().map(|b| (1.0 + m * rho * b).log2()).sum()
        }
        Regime::ForwardSum => {
            let m = p.m.ok_or(CapacityError::MissingParameter("m"))? as f64;
            let beta = p.beta.as_ref().ok_or(CapacityError::MissingParameter("beta"))?;
            let gains: Vec<f64> = beta.iter().map(|b| m * rho * b).collect();
            let gamma = water_fill(&gains, 1.0);
            gains.iter().zip(&gamma).map(|(g, x)| (1.0 + g * x).log2()).sum()
        }
    };
    finite(v)
}

/// Maximizes `Σ log(1 + g_k x_k)` over `x >= 0`, `Σx = total`.
pub fn water_fill(gains: &[f64], total: f64) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..gains.len()).filter(|&i| gains[i] > 0.0).collect();
    idx.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]));
    let mut out = vec![0.0; gains.len()];
    if idx.is_empty() {
        return out;
    }
    // Largest active set whose water level clears every member's floor.
    let mut active = idx.len();
    loop {
        let inv_sum: f64 = idx[..active].iter().map(|&i| 1.0 / gains[i]).sum();
        let level = (total + inv_sum) / active as f64;
        if level > 1.0 / gains[idx[active - 1]] || active == 1 {
            for &i in &idx[..active] {
                out[i] = (level - 1.0 / gains[i]).max(0.0);
            }
            return out;
        }
        active -= 1;
    }
}

/// `log2 det(I_K + ρ_r GᴴG)`.
pub fn reverse_sum_rate(g: &ComplexMatrix, rho_r: f64) -> Result<f64, CapacityError> {
    check_rho(rho_r)?;
    if !g.all_finite() {
        return Err(CapacityError::NonFinite);
    }
    log2_det_i_plus(g, rho_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn scalar_rate() {
        let g = ComplexMatrix::from_rows(&[vec![Complex64::new(0.6, 0.8)]]);
        let r = p2p_rate(&g, 3.0).unwrap();
        assert!((r.rate - 2.0).abs() < 1e-12);
        assert!(r.lower_bound <= r.rate + 1e-12 && r.rate <= r.upper_bound + 1e-9);
    }

    #[test]
    fn equal_singular_values_meet_upper_bound() {
        let g = ComplexMatrix::from_real_rows(&[vec![2.0, 0.0], vec![0.0, 2.0], vec![0.0, 0.0]]);
        let r = p2p_rate(&g, 5.0).unwrap();
        assert!((r.rate - r.upper_bound).abs() < 1e-9);
    }

    #[test]
    fn closed_forms() {
        let p = |rho, n_r, n_t| AsymptoticParams { rho: Some(rho), n_r, n_t, ..Default::default() };
        assert!((asymptotic_rate(Regime::LowSnr, &p(0.01, Some(100), None)).unwrap() - std::f64::consts::LOG2_E).abs() < 1e-4);
        assert!((asymptotic_rate(Regime::ManyTx, &p(1.0, Some(4), None)).unwrap() - 4.0).abs() < 1e-12);
        let rs = AsymptoticParams { rho: Some(0.1), m: Some(100), beta: Some(vec![1.0, 1.0]), ..Default::default() };
        assert!((asymptotic_rate(Regime::ReverseSum, &rs).unwrap() - 2.0 * 11f64.log2()).abs() < 1e-12);
        assert!(matches!("sideways".parse::<Regime>(), Err(CapacityError::UnknownRegime(_))));
        assert!(matches!(
            asymptotic_rate(Regime::ManyRx, &p(1.0, Some(4), None)),
            Err(CapacityError::MissingParameter("n_t"))
        ));
    }

    #[test]
    fn water_filling_basics() {
        let x = water_fill(&[1.0, 1.0], 1.0);
        assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] - 0.5).abs() < 1e-15);
        let x = water_fill(&[100.0, 0.01], 1.0);
        assert_eq!(x[1], 0.0);
        assert!((x[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reverse_sum_trivial_cases() {
        let g = ComplexMatrix::zeros(4, 2);
        assert_eq!(reverse_sum_rate(&g, 10.0).unwrap(), 0.0);
        let g = ComplexMatrix::from_real_rows(&[vec![1.0], vec![1.0]]);
        assert!((reverse_sum_rate(&g, 1.5).unwrap() - 4f64.log2()).abs() < 1e-12);
    }
}
