use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ChannelError, ChannelRealization, ModelTag};
use crate::numerics::{bessel_j0, eigvals_hermitian, hermitian_sqrt, ComplexMatrix};
use crate::rng::Stream;

const PSD_TOL: f64 = 1e-8;

/// Antenna positions, in wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArrayGeometry {
    /// Uniform linear array along one axis.
    Ula { elements: usize, spacing: f64 },
    /// `side x side` uniform square array.
    Usa { side: usize, spacing: f64 },
    Positions { points: Vec<[f64; 2]> },
}

impl ArrayGeometry {
    pub fn positions(&self) -> Vec<[f64; 2]> {
        match self {
            ArrayGeometry::Ula { elements, spacing } => (0..*elements).map(|i| [i as f64 * spacing, 0.0]).collect(),
            ArrayGeometry::Usa { side, spacing } => (0..side * side)
                .map(|i| [(i % side) as f64 * spacing, (i / side) as f64 * spacing])
                .collect(),
            ArrayGeometry::Positions { points } => points.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ArrayGeometry::Ula { elements, .. } => *elements,
            ArrayGeometry::Usa { side, .. } => side * side,
            ArrayGeometry::Positions { points } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Ψ_mn = J0(2π d_mn)` (uniform 2D angular power spectrum).
    pub fn uniform_2d_aps(&self) -> ComplexMatrix {
        let p = self.positions();
        ComplexMatrix::from_fn(p.len(), p.len(), |i, j| {
            let d = ((p[i][0] - p[j][0]).powi(2) + (p[i][1] - p[j][1]).powi(2)).sqrt();
            Complex64::new(bessel_j0(2.0 * PI * d), 0.0)
        })
    }
}

/// Serialized form of a [`CorrelationSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrelationModel {
    /// Uniform 2D APS at the receiver; the transmitter is uncorrelated
    /// (autonomous terminals) unless a geometry is given.
    Uniform2dAps { rx: ArrayGeometry, tx: Option<ArrayGeometry>, terminals: usize },
    Explicit { psi_r: ComplexMatrix, psi_t: ComplexMatrix },
}

/// Kronecker correlation: `G = Ψ_r^{1/2} G_IID Ψ_t^{1/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CorrelationModel", into = "CorrelationModel")]
pub struct CorrelationSpec {
    model: CorrelationModel,
    psi_r: ComplexMatrix,
    psi_t: ComplexMatrix,
}

impl CorrelationSpec {
    pub fn uniform_2d_aps(rx: ArrayGeometry, tx: Option<ArrayGeometry>, terminals: usize) -> Result<Self, ChannelError> {
        Self::try_from(CorrelationModel::Uniform2dAps { rx, tx, terminals })
    }

    pub fn explicit(psi_r: ComplexMatrix, psi_t: ComplexMatrix) -> Result<Self, ChannelError> {
        Self::try_from(CorrelationModel::Explicit { psi_r, psi_t })
    }

    pub fn identity(m: usize, k: usize) -> Self {
        Self {
            model: CorrelationModel::Explicit { psi_r: ComplexMatrix::identity(m), psi_t: ComplexMatrix::identity(k) },
            psi_r: ComplexMatrix::identity(m),
            psi_t: ComplexMatrix::identity(k),
        }
    }

    pub fn psi_r(&self) -> &ComplexMatrix {
        &self.psi_r
    }

    pub fn psi_t(&self) -> &ComplexMatrix {
        &self.psi_t
    }

    pub fn model(&self) -> &CorrelationModel {
        &self.model
    }

    /// Matrix square roots for repeated sampling; fails with `NotPsd`.
    pub fn factors(&self) -> Result<KroneckerFactors, ChannelError> {
        Ok(KroneckerFactors {
            sqrt_r: psd_sqrt(&self.psi_r)?,
            sqrt_t: psd_sqrt(&self.psi_t)?,
        })
    }
}

fn psd_sqrt(psi: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
    let ev = eigvals_hermitian(psi)?;
    if let Some(&min) = ev.first() {
        if min < -PSD_TOL {
            return Err(ChannelError::NotPsd { min_eigenvalue: min });
        }
    }
    Ok(hermitian_sqrt(psi, PSD_TOL)?)
}

fn check_correlation(name: &str, psi: &ComplexMatrix) -> Result<(), ChannelError> {
    if !psi.is_square() || psi.rows() == 0 {
        return Err(ChannelError::DimensionMismatch(format!("{name} must be square and non-empty")));
    }
    if !psi.all_finite() || !psi.is_hermitian(1e-10) {
        return Err(ChannelError::InvalidParameter(format!("{name} must be finite and Hermitian")));
    }
    if psi.diag().iter().any(|d| (d - Complex64::new(1.0, 0.0)).norm() > 1e-9) {
        return Err(ChannelError::InvalidParameter(format!("{name} must have unit diagonal")));
    }
    Ok(())
}

impl TryFrom<CorrelationModel> for CorrelationSpec {
    type Error = ChannelError;

    fn try_from(model: CorrelationModel) -> Result<Self, ChannelError> {
        let (psi_r, psi_t) = match &model {
            CorrelationModel::Uniform2dAps { rx, tx, terminals } => {
                let psi_t = match tx {
                    Some(g) => {
                        if g.len() != *terminals {
                            return Err(ChannelError::DimensionMismatch(format!(
                                "tx geometry has {} elements for {terminals} terminals",
                                g.len()
                            )));
                        }
                        g.uniform_2d_aps()
                    }
                    None => ComplexMatrix::identity(*terminals),
                };
                (rx.uniform_2d_aps(), psi_t)
            }
            CorrelationModel::Explicit { psi_r, psi_t } => (psi_r.clone(), psi_t.clone()),
        };
        check_correlation("psi_r", &psi_r)?;
        check_correlation("psi_t", &psi_t)?;
        Ok(Self { model, psi_r, psi_t })
    }
}

impl From<CorrelationSpec> for CorrelationModel {
    fn from(s: CorrelationSpec) -> Self {
        s.model
    }
}

/// Precomputed `Ψ_r^{1/2}`, `Ψ_t^{1/2}`.
#[derive(Debug, Clone)]
pub struct KroneckerFactors {
    pub sqrt_r: ComplexMatrix,
    pub sqrt_t: ComplexMatrix,
}

impl KroneckerFactors {
    pub fn m(&self) -> usize {
        self.sqrt_r.rows()
    }

    pub fn k(&self) -> usize {
        self.sqrt_t.rows()
    }

    pub fn sample(&self, rng: &mut Stream) -> ChannelRealization {
        let (m, k) = (self.m(), self.k());
        let iid = ComplexMatrix::from_col_major(m, k, rng.cn_vec(m * k));
        let g = self.sqrt_r.matmul(&iid).matmul(&self.sqrt_t);
        ChannelRealization::new(g, ModelTag::Correlated, Some(rng.key()))
    }
}

/// One Kronecker-correlated draw.
pub fn correlated_channel(m: usize, k: usize, spec: &CorrelationSpec, rng: &mut Stream) -> Result<ChannelRealization, ChannelError> {
    if spec.psi_r.rows() != m || spec.psi_t.rows() != k {
        return Err(ChannelError::DimensionMismatch(format!(
            "psi_r is {0}x{0}, psi_t {1}x{1}; channel is {m}x{k}",
            spec.psi_r.rows(),
            spec.psi_t.rows()
        )));
    }
    Ok(spec.factors()?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::gen_iid_rayleigh;
    use crate::rng::RngStreamKey;

    #[test]
    fn identity_correlation_reproduces_iid() {
        let key = RngStreamKey::new(3, 1, 4, 1);
        let spec = CorrelationSpec::identity(5, 3);
        let a = correlated_channel(5, 3, &spec, &mut key.stream()).unwrap();
        let b = gen_iid_rayleigh(5, 3, &mut key.stream());
        assert!(a.g.sub(&b.g).frobenius_norm() < 1e-14);
    }

    #[test]
    fn colocated_elements_are_fully_correlated() {
        let geo = ArrayGeometry::Positions { points: vec![[0.0, 0.0], [0.0, 0.0]] };
        let psi = geo.uniform_2d_aps();
        assert_eq!(psi[(0, 1)].re, 1.0);
        let ev = eigvals_hermitian(&psi).unwrap();
        assert!(ev[0].abs() < 1e-12 && (ev[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_psd() {
        let bad = ComplexMatrix::from_real_rows(&[
            vec![1.0, 0.9, -0.9],
            vec![0.9, 1.0, 0.9],
            vec![-0.9, 0.9, 1.0],
        ]);
        let spec = CorrelationSpec::explicit(bad, ComplexMatrix::identity(1)).unwrap();
        let r = correlated_channel(3, 1, &spec, &mut RngStreamKey::new(0, 0, 0, 0).stream());
        assert!(matches!(r, Err(ChannelError::NotPsd { .. })));
    }

    #[test]
    fn serde_round_trip_rebuilds_psi() {
        let spec = CorrelationSpec::uniform_2d_aps(ArrayGeometry::Ula { elements: 4, spacing: 0.5 }, None, 2).unwrap();
        let s = toml::to_string(&spec).unwrap();
        let back: CorrelationSpec = toml::from_str(&s).unwrap();
        assert_eq!(back, spec);
    }
}
