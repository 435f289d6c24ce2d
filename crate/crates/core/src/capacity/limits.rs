use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::CapacityError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitTechnique {
    If,
    Zf,
    Mf,
    Vp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Csi {
    Perfect,
    /// Estimate reliability ξ in `[0, 1]`.
    Imperfect(f64),
}

/// Large-system (`M, K → ∞`, `M/K = α`) SNR/SINR of each forward-link technique.
pub fn large_system_sinr(technique: LimitTechnique, alpha: f64, rho_f: f64, csi: Csi) -> Result<f64, CapacityError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(CapacityError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if !(rho_f >= 0.0) || rho_f.is_nan() {
        return Err(CapacityError::InvalidParameter(format!("rho_f must be >= 0, got {rho_f}")));
    }
    let xi = match csi {
        Csi::Perfect => None,
        Csi::Imperfect(x) if (0.0..=1.0).contains(&x) => Some(x),
        Csi::Imperfect(x) => return Err(CapacityError::InvalidParameter(format!("xi must be in [0, 1], got {x}"))),
    };
    let v = match technique {
        // The genie needs no estimate, so CSI quality does not enter.
        LimitTechnique::If => rho_f * alpha,
        LimitTechnique::Zf => {
            if alpha <= 1.0 {
                return Err(CapacityError::InvalidParameter(format!("ZF needs alpha > 1, got {alpha}")));
            }
            match xi {
                None => rho_f * (alpha - 1.0),
                Some(x) => x * x * rho_f * (alpha - 1.0) / ((1.0 - x * x) * rho_f + 1.0),
            }
        }
        LimitTechnique::Mf => {
            let base = rho_f * alpha / (rho_f + 1.0);
            match xi {
                None => base,
                Some(x) => x * x * base,
            }
        }
        LimitTechnique::Vp => {
            if xi.is_some() {
                return Err(CapacityError::InvalidParameter("no VP expression exists for imperfect CSI".into()));
            }
            let v = rho_f * alpha * PI / 6.0 * (1.0 - 1.0 / alpha).powf(1.0 - alpha);
            if alpha <= 1.0 || v > rho_f * alpha {
                return Err(CapacityError::VpRangeExceeded { alpha });
            }
            v
        }
    };
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_cells() {
        assert_eq!(large_system_sinr(LimitTechnique::Zf, 2.0, 1.0, Csi::Perfect).unwrap(), 1.0);
        let mf = large_system_sinr(LimitTechnique::Mf, 8.0, 1e6, Csi::Perfect).unwrap();
        assert!((mf - 8.0).abs() < 1e-4);
        let zf = large_system_sinr(LimitTechnique::Zf, 4.0, 10.0, Csi::Perfect).unwrap();
        let zf1 = large_system_sinr(LimitTechnique::Zf, 4.0, 10.0, Csi::Imperfect(1.0)).unwrap();
        assert_eq!(zf, zf1);
        assert_eq!(large_system_sinr(LimitTechnique::If, 3.0, 2.0, Csi::Perfect).unwrap(), 6.0);
    }

    #[test]
    fn vp_range() {
        let v = large_system_sinr(LimitTechnique::Vp, 1.5, 10.0, Csi::Perfect).unwrap();
        assert!(v < 15.0);
        assert!(matches!(
            large_system_sinr(LimitTechnique::Vp, 1.9, 10.0, Csi::Perfect),
            Err(CapacityError::VpRangeExceeded { .. })
        ));
    }
}
