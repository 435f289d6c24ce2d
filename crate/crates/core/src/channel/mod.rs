//! Channel generators: IID Rayleigh, large-scale fading, Kronecker
//! correlation, antenna coupling, geometric scatterers and imperfect CSI.

mod correlation;
mod coupling;
mod iid;
mod large_scale;
mod scatterer;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{ComplexMatrix, NumericsError};
use crate::rng::RngStreamKey;

pub use correlation::{correlated_channel, ArrayGeometry, CorrelationModel, CorrelationSpec, KroneckerFactors};
pub use coupling::{coupled_channel, dipole_triplet_z_005, dipole_triplet_z_05, CouplingNetwork, CouplingSpec};
pub use iid::{gen_iid_rayleigh, gen_multiuser_channel, imperfect_csi};
pub use large_scale::{gen_large_scale, LargeScaleProfile};
pub use scatterer::{geometric_gains, normalized_field_strength, GainEvaluator, ScattererConfig, ScattererField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    IidRayleigh,
    Multiuser,
    Correlated,
    Coupled,
    ImperfectCsi,
    PilotContaminated,
}

/// One draw of an `M x K` channel (rows are base-station antennas, columns terminals).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub g: ComplexMatrix,
    pub model: ModelTag,
    pub stream: Option<RngStreamKey>,
}

impl ChannelRealization {
    pub fn new(g: ComplexMatrix, model: ModelTag, stream: Option<RngStreamKey>) -> Self {
        Self { g, model, stream }
    }

    /// Base-station antennas.
    pub fn m(&self) -> usize {
        self.g.rows()
    }

    /// Terminals.
    pub fn k(&self) -> usize {
        self.g.cols()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("terminal {terminal} of cell {cell} is {distance:.2} m from base station {bs}, below the {min_distance} m minimum")]
    UserTooClose { cell: usize, terminal: usize, bs: usize, distance: f64, min_distance: f64 },
    #[error("correlation matrix is not PSD (eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("Z_l + Z_r is singular")]
    SingularImpedanceSum,
    #[error("degenerate geometry: a propagation leg is {distance:.4} wavelengths (minimum 0.1)")]
    DegenerateGeometry { distance: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
