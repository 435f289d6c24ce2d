use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DetectionError;

/// QPSK alphabet size `|S|`.
const S: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Technique {
    Mmse,
    MmseSic,
    BiGdfe,
    Las,
    Ts,
    Fcsd,
    /// Exhaustive MAP/ML search.
    Ml,
}

impl Technique {
    pub const ALL: [Technique; 7] =
        [Self::Mmse, Self::MmseSic, Self::BiGdfe, Self::Las, Self::Ts, Self::Fcsd, Self::Ml];

    pub fn label(&self) -> &'static str {
        match self {
            Self::Mmse => "MMSE",
            Self::MmseSic => "MMSE-SIC",
            Self::BiGdfe => "BI-GDFE",
            Self::Las => "LAS",
            Self::Ts => "TS",
            Self::Fcsd => "FCSD",
            Self::Ml => "ML",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Technique {
    type Err = DetectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match norm.as_str() {
            "mmse" => Self::Mmse,
            "mmse-sic" => Self::MmseSic,
            "bi-gdfe" | "bigdfe" => Self::BiGdfe,
            "las" => Self::Las,
            "ts" | "tabu" => Self::Ts,
            "fcsd" => Self::Fcsd,
            "ml" | "map" => Self::Ml,
            _ => return Err(DetectionError::UnknownTechnique(s.to_string())),
        })
    }
}

/// Iteration and search parameters entering the flop formulas.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexityParams {
    pub n_iter: Option<usize>,
    pub n_tabu: Option<usize>,
    pub n_neigh: Option<usize>,
    pub r: Option<usize>,
}

/// Flops per received vector and per channel realization (pre-processing).
/// A blank pre-processing entry is reported as 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Flops {
    pub per_x: f64,
    pub per_g: f64,
}

impl Flops {
    /// Cost when nothing can be amortized over several received vectors.
    pub fn total(&self) -> f64 {
        self.per_x + self.per_g
    }
}

/// Rough flop counts:
///
/// | technique | per x | per G |
/// |---|---|---|
/// | MMSE | MK | MK²+K³ |
/// | MMSE-SIC | (M²K+M³)N_Iter | – |
/// | BI-GDFE | MK·N_Iter | (M²K+M³)N_Iter |
/// | TS | ((M+N_Tabu)N_Neigh+MK)N_Iter | MK²+K³ |
/// | LAS | TS with N_Tabu = 0 | MK²+K³ |
/// | FCSD | (M²+K²+r²)\|S\|^r | MK²+K³ |
/// | ML | MK\|S\|^K | – |
pub fn table2_complexity(technique: &str, m: usize, k: usize, params: &ComplexityParams) -> Result<Flops, DetectionError> {
    technique.parse::<Technique>()?.flops(m, k, params)
}

impl Technique {
    pub fn flops(&self, m: usize, k: usize, p: &ComplexityParams) -> Result<Flops, DetectionError> {
        let (mf, kf) = (m as f64, k as f64);
        let iter = || p.n_iter.map(|v| v as f64).ok_or(DetectionError::MissingParameter("n_iter"));
        let linear_pre = mf * kf * kf + kf.powi(3);
        let inv_m = mf * mf * kf + mf.powi(3);
        Ok(match self {
            Self::Mmse => Flops { per_x: mf * kf, per_g: linear_pre },
            Self::MmseSic => Flops { per_x: inv_m * iter()?, per_g: 0.0 },
            Self::BiGdfe => {
                let n = iter()?;
                Flops { per_x: mf * kf * n, per_g: inv_m * n }
            }
            Self::Ts | Self::Las => {
                let tabu = match self {
                    Self::Las => 0.0,
                    _ => p.n_tabu.ok_or(DetectionError::MissingParameter("n_tabu"))? as f64,
                };
                let neigh = p.n_neigh.map_or(2.0 * kf, |v| v as f64);
                Flops { per_x: ((mf + tabu) * neigh + mf * kf) * iter()?, per_g: linear_pre }
            }
            Self::Fcsd => {
                let r = p.r.ok_or(DetectionError::MissingParameter("r"))?;
                let rf = r as f64;
                Flops { per_x: (mf * mf + kf * kf + rf * rf) * S.powi(r as i32), per_g: linear_pre }
            }
            Self::Ml => Flops { per_x: mf * kf * S.powi(k as i32), per_g: 0.0 },
        })
    }
}
