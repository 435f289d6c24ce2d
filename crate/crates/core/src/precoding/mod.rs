//! Single-cell forward-link precoders (ZF, MF, regularized ZF) and the
//! Monte-Carlo SINR measurement that backs the closed-form table.
//!
//! Convention: the received forward signal is `x_f = Gᵀ s + w` with
//! `w ~ CN(0, I)`, and every precoder emits `s = √(ρ_f/K) · P q / √γ`
//! with `γ = ‖P‖²_F / K`, so `E‖s‖² = ρ_f` for unit-energy symbols.

mod measure;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{pseudo_inverse, Cholesky, ComplexMatrix, NumericsError};

pub use measure::{measure_forward_sinr, SinrStats, SinrTechnique};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrecoderKind {
    Zf,
    Mf,
    Rzf { delta: f64 },
}

impl PrecoderKind {
    pub fn label(&self) -> String {
        match self {
            PrecoderKind::Zf => "ZF".into(),
            PrecoderKind::Mf => "MF".into(),
            PrecoderKind::Rzf { delta } => format!("RZF(delta={delta})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrecodingError {
    #[error("GᵀG* is singular")]
    SingularGram,
    #[error("regularized Gram matrix is singular (delta = {delta})")]
    SingularRegularizedGram { delta: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Precoding matrix `P` (`M x K`) and its normalization `γ = ‖P‖²_F / K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub kind: PrecoderKind,
    pub matrix: ComplexMatrix,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecodedVector {
    pub s: Vec<Complex64>,
    pub gamma: f64,
    pub technique: PrecoderKind,
}

impl Precoder {
    /// Builds `P` from the channel the base station believes in (`M x K`).
    pub fn new(kind: PrecoderKind, g: &ComplexMatrix) -> Result<Self, PrecodingError> {
        let (m, k) = g.shape();
        if m == 0 || k == 0 {
            return Err(PrecodingError::DimensionMismatch("empty channel".into()));
        }
        let matrix = match kind {
            PrecoderKind::Zf => {
                if k > m {
                    return Err(PrecodingError::DimensionMismatch(format!("ZF needs K <= M, got K={k}, M={m}")));
                }
                // G*(GᵀG*)⁻¹ is the pseudo-inverse of Gᵀ.
                pseudo_inverse(&g.transpose()).map_err(|e| match e {
                    NumericsError::RankDeficient { .. } => PrecodingError::SingularGram,
                    other => PrecodingError::Numerics(other),
                })?
            }
            PrecoderKind::Mf => g.conj(),
            PrecoderKind::Rzf { delta } => {
                if !(delta >= 0.0 && delta.is_finite()) {
                    return Err(PrecodingError::InvalidParameter(format!("delta must be finite and >= 0, got {delta}")));
                }
                let gc = g.conj();
                // GᵀG* = (Gᴴ G)ᵀ = conj(GᴴG) for the Hermitian Gram.
                let gram = gc.gram().add_identity(delta);
                let ch = Cholesky::new(&gram).map_err(|_| PrecodingError::SingularRegularizedGram { delta })?;
                // P = G* A⁻¹, A Hermitian: Pᴴ = A⁻¹ Gᵀ.
                ch.solve(&gc.adjoint()).adjoint()
            }
        };
        let gamma = matrix.frobenius_norm_sqr() / k as f64;
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(PrecodingError::InvalidParameter(format!("degenerate precoder norm {gamma}")));
        }
        Ok(Self { kind, matrix, gamma })
    }

    pub fn m(&self) -> usize {
        self.matrix.rows()
    }

    pub fn k(&self) -> usize {
        self.matrix.cols()
    }

    /// Normalized precoder `P / √γ` (unit average power per symbol).
    pub fn normalized(&self) -> ComplexMatrix {
        self.matrix.scale_real(self.gamma.sqrt().recip())
    }

    /// `s = √(ρ_f/K) · P q / √γ`.
    pub fn precode(&self, q: &[Complex64], rho_f: f64) -> Result<PrecodedVector, PrecodingError> {
        if q.len() != self.k() {
            return Err(PrecodingError::DimensionMismatch(format!("{} symbols for {} terminals", q.len(), self.k())));
        }
        if !(rho_f >= 0.0 && rho_f.is_finite()) {
            return Err(PrecodingError::InvalidParameter(format!("rho_f must be finite and >= 0, got {rho_f}")));
        }
        let scale = (rho_f / self.k() as f64 / self.gamma).sqrt();
        let s = self.matrix.mat_vec(q).into_iter().map(|z| z * scale).collect();
        Ok(PrecodedVector { s, gamma: self.gamma, technique: self.kind })
    }

    /// `Gᵀ P / √γ` (`K x K`): entry `(k, j)` is the gain from symbol j to terminal k.
    pub fn effective_gains(&self, g_true: &ComplexMatrix) -> ComplexMatrix {
        g_true.transpose().matmul(&self.matrix).scale_real(self.gamma.sqrt().recip())
    }
}

pub fn zf_precode(g: &ComplexMatrix, q: &[Complex64], rho_f: f64) -> Result<PrecodedVector, PrecodingError> {
    Precoder::new(PrecoderKind::Zf, g)?.precode(q, rho_f)
}

pub fn mf_precode(g: &ComplexMatrix, q: &[Complex64], rho_f: f64) -> Result<PrecodedVector, PrecodingError> {
    Precoder::new(PrecoderKind::Mf, g)?.precode(q, rho_f)
}

pub fn rzf_precode(g: &ComplexMatrix, q: &[Complex64], delta: f64, rho_f: f64) -> Result<PrecodedVector, PrecodingError> {
    let p = Precoder::new(PrecoderKind::Rzf { delta }, g)?;
    if delta > 0.0 {
        log::debug!("regularized ZF with delta = {delta} (M = {})", g.rows());
    }
    p.precode(q, rho_f)
}

/// Noiseless received vector `Gᵀ s`.
pub fn received_noiseless(g: &ComplexMatrix, s: &PrecodedVector) -> Vec<Complex64> {
    g.transpose().mat_vec(&s.s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::gen_iid_rayleigh;
    use crate::rng::RngStreamKey;

    fn q(k: usize) -> Vec<Complex64> {
        (0..k).map(|i| Complex64::from_polar(1.0, 0.3 + i as f64)).collect()
    }

    #[test]
    fn zf_nulls_interference() {
        let g = gen_iid_rayleigh(12, 4, &mut RngStreamKey::new(1, 0, 0, 0).stream()).g;
        let s = zf_precode(&g, &q(4), 10.0).unwrap();
        let x = received_noiseless(&g, &s);
        let amp = (10.0 / 4.0 / s.gamma).sqrt();
        for (xk, qk) in x.iter().zip(q(4)) {
            assert!((xk - qk * amp).norm() < 1e-10 * amp);
        }
    }

    #[test]
    fn orthogonal_columns_mf_has_no_interference() {
        let g = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]);
        let p = Precoder::new(PrecoderKind::Mf, &g).unwrap();
        let e = p.effective_gains(&g);
        assert_eq!(e[(0, 1)], Complex64::new(0.0, 0.0));
        assert_eq!(e[(1, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rzf_limits() {
        let g = gen_iid_rayleigh(10, 3, &mut RngStreamKey::new(2, 0, 0, 0).stream()).g;
        let zf = Precoder::new(PrecoderKind::Zf, &g).unwrap().normalized();
        let rz = Precoder::new(PrecoderKind::Rzf { delta: 1e-9 }, &g).unwrap().normalized();
        assert!(rz.sub(&zf).frobenius_norm() / zf.frobenius_norm() < 1e-6);
        let mf = Precoder::new(PrecoderKind::Mf, &g).unwrap().normalized();
        let rm = Precoder::new(PrecoderKind::Rzf { delta: 1e9 }, &g).unwrap().normalized();
        assert!(rm.sub(&mf).frobenius_norm() / mf.frobenius_norm() < 1e-6);
    }

    #[test]
    fn rank_deficient_channel_is_singular_gram() {
        let g = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]]);
        assert!(matches!(Precoder::new(PrecoderKind::Zf, &g), Err(PrecodingError::SingularGram)));
        assert!(matches!(
            Precoder::new(PrecoderKind::Rzf { delta: 0.0 }, &g),
            Err(PrecodingError::SingularRegularizedGram { .. })
        ));
    }
}
