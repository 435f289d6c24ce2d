use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ChannelError, ChannelRealization, ModelTag};
use crate::numerics::{hermitian_function, hermitian_sqrt, ComplexMatrix, Lu};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn symmetric_toeplitz3(d: Complex64, a: Complex64, b: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![d, a, b], vec![a, d, a], vec![b, a, d]])
}

/// Impedance matrix (ohms) of three parallel dipoles spaced 0.05λ apart.
pub fn dipole_triplet_z_005() -> ComplexMatrix {
    symmetric_toeplitz3(c(72.9, 42.4), c(71.4, 24.3), c(67.1, 7.6))
}

/// Impedance matrix (ohms) of three parallel dipoles spaced 0.5λ apart.
pub fn dipole_triplet_z_05() -> ComplexMatrix {
    symmetric_toeplitz3(c(72.9, 42.4), c(-12.5, -29.8), c(4.0, 17.7))
}

/// Antenna and termination impedances for the coupled-channel model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub z_r: ComplexMatrix,
    pub z_t: ComplexMatrix,
    pub z_l: ComplexMatrix,
    pub r11: f64,
}

impl CouplingSpec {
    pub fn new(z_r: ComplexMatrix, z_t: ComplexMatrix, z_l: ComplexMatrix, r11: f64) -> Result<Self, ChannelError> {
        let spec = Self { z_r, z_t, z_l, r11 };
        spec.validate()?;
        Ok(spec)
    }

    /// Uncoupled terminals (`Z_t = z11·I_K`), per-port conjugate-matched loads
    /// (`Z_l = conj(z11)·I_M`) and `r11 = Re z11`, with `z11 = Z_r[0][0]`.
    pub fn conjugate_matched(z_r: ComplexMatrix, terminals: usize) -> Result<Self, ChannelError> {
        if !z_r.is_square() || z_r.rows() == 0 {
            return Err(ChannelError::DimensionMismatch("Z_r must be square and non-empty".into()));
        }
        let z11 = z_r[(0, 0)];
        let m = z_r.rows();
        let z_t = ComplexMatrix::from_diag(&vec![z11; terminals]);
        let z_l = ComplexMatrix::from_diag(&vec![z11.conj(); m]);
        Self::new(z_r, z_t, z_l, z11.re)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        for (name, z) in [("Z_r", &self.z_r), ("Z_t", &self.z_t), ("Z_l", &self.z_l)] {
            if !z.is_square() {
                return Err(ChannelError::DimensionMismatch(format!("{name} must be square")));
            }
            if !z.all_finite() || z.diag().iter().any(|d| !(d.re > 0.0)) {
                return Err(ChannelError::InvalidParameter(format!("{name} needs finite entries and Re(z_ii) > 0")));
            }
        }
        if self.z_l.rows() != self.z_r.rows() {
            return Err(ChannelError::DimensionMismatch("Z_l and Z_r sizes differ".into()));
        }
        if !(self.r11 > 0.0 && self.r11.is_finite()) {
            return Err(ChannelError::InvalidParameter(format!("r11 must be positive, got {}", self.r11)));
        }
        Ok(())
    }

    pub fn network(&self) -> Result<CouplingNetwork, ChannelError> {
        CouplingNetwork::new(self)
    }
}

/// Precomputed `2 r11 R_l^{1/2}(Z_l+Z_r)⁻¹` and `R_t^{−1/2}`.
#[derive(Debug, Clone)]
pub struct CouplingNetwork {
    pub receive: ComplexMatrix,
    pub transmit: ComplexMatrix,
}

impl CouplingNetwork {
    pub fn new(spec: &CouplingSpec) -> Result<Self, ChannelError> {
        spec.validate()?;
        let sum = spec.z_l.add(&spec.z_r);
        let lu = Lu::new(&sum).map_err(|_| ChannelError::SingularImpedanceSum)?;
        let r_l = spec.z_l.real_part().hermitian_part();
        let r_t = spec.z_t.real_part().hermitian_part();
        let r_l_sqrt = hermitian_sqrt(&r_l, 1e-10)?;
        let r_t_inv_sqrt = hermitian_function(&r_t, |l| if l > 0.0 { 1.0 / l.sqrt() } else { f64::NAN })?;
        if !r_t_inv_sqrt.all_finite() {
            return Err(ChannelError::InvalidParameter("Re(Z_t) must be positive definite".into()));
        }
        let receive = r_l_sqrt.matmul(&lu.inverse()).scale_real(2.0 * spec.r11);
        Ok(Self { receive, transmit: r_t_inv_sqrt })
    }

    pub fn apply(&self, g: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
        if g.rows() != self.receive.cols() || g.cols() != self.transmit.rows() {
            return Err(ChannelError::DimensionMismatch(format!(
                "G is {}x{}, network expects {}x{}",
                g.rows(),
                g.cols(),
                self.receive.cols(),
                self.transmit.rows()
            )));
        }
        Ok(self.receive.matmul(g).matmul(&self.transmit))
    }
}

/// `Ĝ_mc = 2 r11 R_l^{1/2}(Z_l+Z_r)⁻¹ G R_t^{−1/2}`.
pub fn coupled_channel(g: &ChannelRealization, cpl: &CouplingSpec) -> Result<ChannelRealization, ChannelError> {
    let out = CouplingNetwork::new(cpl)?.apply(&g.g)?;
    Ok(ChannelRealization::new(out, ModelTag::Coupled, g.stream))
}
