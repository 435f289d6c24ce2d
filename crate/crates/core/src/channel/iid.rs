use num_complex::Complex64;

use super::{ChannelError, ChannelRealization, ModelTag};
use crate::numerics::ComplexMatrix;
use crate::rng::Stream;

/// `M x K` matrix of IID CN(0,1) entries, drawn column by column.
pub fn gen_iid_rayleigh(m: usize, k: usize, rng: &mut Stream) -> ChannelRealization {
    let data: Vec<Complex64> = rng.cn_vec(m * k);
    ChannelRealization::new(ComplexMatrix::from_col_major(m, k, data), ModelTag::IidRayleigh, Some(rng.key()))
}

/// `G = H D_β^{1/2}`.
pub fn gen_multiuser_channel(h: &ChannelRealization, beta: &[f64]) -> Result<ChannelRealization, ChannelError> {
    if beta.len() != h.k() {
        return Err(ChannelError::DimensionMismatch(format!("beta has {} entries for {} terminals", beta.len(), h.k())));
    }
    if let Some(b) = beta.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
        return Err(ChannelError::InvalidParameter(format!("beta must be positive and finite, got {b}")));
    }
    let scale: Vec<f64> = beta.iter().map(|b| b.sqrt()).collect();
    Ok(ChannelRealization::new(h.g.scale_columns(&scale), ModelTag::Multiuser, h.stream))
}

/// `Ĝ = ξG + √(1−ξ²)E` with fresh IID CN(0,1) `E`.
pub fn imperfect_csi(g: &ChannelRealization, xi: f64, rng: &mut Stream) -> Result<ChannelRealization, ChannelError> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(ChannelError::InvalidParameter(format!("xi must be in [0, 1], got {xi}")));
    }
    let (m, k) = g.g.shape();
    let e = rng.cn_vec(m * k);
    let noise_scale = (1.0 - xi * xi).sqrt();
    let data = g
        .g
        .as_slice()
        .iter()
        .zip(e)
        .map(|(&gv, ev)| if xi == 1.0 { gv } else { gv * xi + ev * noise_scale })
        .collect();
    Ok(ChannelRealization::new(ComplexMatrix::from_col_major(m, k, data), ModelTag::ImperfectCsi, Some(rng.key())))
}
