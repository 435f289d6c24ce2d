//! Truncated Neumann-series approximation of `Z⁻¹` for Gram matrices of tall channels.

use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use super::NumericsError;

/// Hard ceiling on the number of series terms.
pub const MAX_TERMS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "c")]
pub enum NeumannWeighting {
    /// `w = M + K`.
    FixedMplusK,
    /// `w = Tr(Z) / c`.
    TraceNormalized(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeumannConfig {
    pub terms: usize,
    pub delta: f64,
    pub weighting: NeumannWeighting,
    #[serde(default = "default_cap")]
    pub max_terms: usize,
}

fn default_cap() -> usize {
    MAX_TERMS
}

impl NeumannConfig {
    /// Defaults: `δ = 1` when `α >= 4`, else 0.9; fixed `M+K` weighting.
    pub fn for_alpha(terms: usize, alpha: f64) -> Self {
        Self {
            terms,
            delta: default_delta(alpha),
            weighting: NeumannWeighting::FixedMplusK,
            max_terms: MAX_TERMS,
        }
    }

    /// Trace-normalized weighting with the default `c = K`.
    pub fn trace_normalized(terms: usize, alpha: f64, k: usize) -> Self {
        Self {
            weighting: NeumannWeighting::TraceNormalized(k as f64),
            ..Self::for_alpha(terms, alpha)
        }
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(NumericsError::InvalidParameter(format!("delta must be in (0, 1], got {}", self.delta)));
        }
        let cap = self.max_terms.min(MAX_TERMS);
        if self.terms > cap {
            return Err(NumericsError::InvalidParameter(format!("terms {} exceeds cap {cap}", self.terms)));
        }
        if let NeumannWeighting::TraceNormalized(c) = self.weighting {
            if !(c > 0.0 && c.is_finite()) {
                return Err(NumericsError::InvalidParameter(format!("trace weighting c must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

pub fn default_delta(alpha: f64) -> f64 {
    if alpha >= 4.0 {
        1.0
    } else {
        0.9
    }
}

/// `(δ/w) Σ_{n=0}^{L} (I − (δ/w)Z)ⁿ`.
///
/// `m` and `k` are the dimensions of the channel `Z` was formed from; `Z`
/// itself is `k x k`.
pub fn neumann_inverse(z: &ComplexMatrix, cfg: &NeumannConfig, m: usize, k: usize) -> Result<ComplexMatrix, NumericsError> {
    cfg.validate()?;
    if !z.is_square() || z.rows() != k {
        return Err(NumericsError::DimensionMismatch(format!(
            "Z is {}x{}, expected {k}x{k}",
            z.rows(),
            z.cols()
        )));
    }
    if !z.all_finite() {
        return Err(NumericsError::NonFinite);
    }
    let alpha = m as f64 / k as f64;
    if alpha <= 1.0 {
        return Err(NumericsError::AlphaTooSmall { alpha });
    }
    let w = match cfg.weighting {
        NeumannWeighting::FixedMplusK => (m + k) as f64,
        NeumannWeighting::TraceNormalized(c) => z.trace().re / c,
    };
    if !(w > 0.0 && w.is_finite()) {
        return Err(NumericsError::InvalidParameter(format!("weight w must be positive, got {w}")));
    }
    let mu = cfg.delta / w;
    // X = I − μZ
    let x = z.scale_real(-mu).add_identity(1.0);
    let mut term = ComplexMatrix::identity(k);
    let mut sum = term.clone();
    let mut prev_norm = term.frobenius_norm();
    let mut growth_streak = 0;
    for _ in 1..=cfg.terms {
        term = term.matmul(&x);
        let norm = term.frobenius_norm();
        if norm > prev_norm {
            growth_streak += 1;
            if growth_streak >= 3 {
                return Err(NumericsError::DivergenceDetected);
            }
        } else {
            growth_streak = 0;
        }
        prev_norm = norm;
        sum = sum.add(&term);
    }
    Ok(sum.scale_real(mu).hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_with_unit_weight_is_exact() {
        let z = ComplexMatrix::identity(5);
        for l in [0, 1, 7] {
            let cfg = NeumannConfig {
                terms: l,
                delta: 1.0,
                weighting: NeumannWeighting::TraceNormalized(5.0),
                max_terms: MAX_TERMS,
            };
            let inv = neumann_inverse(&z, &cfg, 10, 5).unwrap();
            assert_eq!(inv, ComplexMatrix::identity(5));
        }
    }

    #[test]
    fn alpha_guard() {
        let z = ComplexMatrix::identity(4);
        let cfg = NeumannConfig::for_alpha(3, 1.0);
        assert!(matches!(neumann_inverse(&z, &cfg, 4, 4), Err(NumericsError::AlphaTooSmall { .. })));
    }

    #[test]
    fn divergence_is_reported() {
        // Eigenvalue 3 with w = 1 gives |1 − 3| = 2 > 1.
        let z = ComplexMatrix::from_real_diag(&[3.0, 1.0]);
        let cfg = NeumannConfig {
            terms: 10,
            delta: 1.0,
            weighting: NeumannWeighting::TraceNormalized(4.0),
            max_terms: MAX_TERMS,
        };
        assert!(matches!(neumann_inverse(&z, &cfg, 8, 2), Err(NumericsError::DivergenceDetected)));
    }

    #[test]
    fn rejects_bad_config() {
        let z = ComplexMatrix::identity(2);
        let mut cfg = NeumannConfig::for_alpha(2, 8.0);
        cfg.delta = 1.5;
        assert!(neumann_inverse(&z, &cfg, 8, 2).is_err());
        cfg.delta = 1.0;
        cfg.terms = 500;
        assert!(neumann_inverse(&z, &cfg, 8, 2).is_err());
    }
}
