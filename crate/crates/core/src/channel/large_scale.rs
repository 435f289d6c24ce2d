use serde::{Deserialize, Serialize};

use super::ChannelError;
use crate::multicell::{CellLayout, UserDrop};
use crate::rng::Stream;

/// Large-scale gains `β[k][j][ℓ] = z / r^exponent` from terminal ℓ of cell k
/// to the base station of cell j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeScaleProfile {
    cells: usize,
    terminals: usize,
    beta: Vec<f64>,
    shadow: Vec<f64>,
    distance: Vec<f64>,
    pub exponent: f64,
    pub sigma_shadow_db: f64,
}

impl LargeScaleProfile {
    /// Draws lognormal shadowing for every link given the link distances.
    pub fn from_distances(
        cells: usize,
        terminals: usize,
        distance: impl Fn(usize, usize, usize) -> f64,
        min_distance: f64,
        sigma_shadow_db: f64,
        exponent: f64,
        rng: &mut Stream,
    ) -> Result<Self, ChannelError> {
        if !(sigma_shadow_db >= 0.0) || !exponent.is_finite() {
            return Err(ChannelError::InvalidParameter(format!(
                "sigma_shadow_db = {sigma_shadow_db}, exponent = {exponent}"
            )));
        }
        let n = cells * cells * terminals;
        let mut beta = Vec::with_capacity(n);
        let mut shadow = Vec::with_capacity(n);
        let mut dist = Vec::with_capacity(n);
        for k in 0..cells {
            for j in 0..cells {
                for l in 0..terminals {
                    let r = distance(k, j, l);
                    if !(r >= min_distance) {
                        return Err(ChannelError::UserTooClose { cell: k, terminal: l, bs: j, distance: r, min_distance });
                    }
                    let z = 10f64.powf(sigma_shadow_db * rng.normal() / 10.0);
                    beta.push(z / r.powf(exponent));
                    shadow.push(z);
                    dist.push(r);
                }
            }
        }
        Ok(Self { cells, terminals, beta, shadow, distance: dist, exponent, sigma_shadow_db })
    }

    /// Profile from explicit β values (`beta(k, j, ℓ)`); shadow factors are set to β and distances to 1.
    pub fn from_betas(cells: usize, terminals: usize, beta: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut b = Vec::with_capacity(cells * cells * terminals);
        for k in 0..cells {
            for j in 0..cells {
                for l in 0..terminals {
                    b.push(beta(k, j, l));
                }
            }
        }
        Self {
            cells,
            terminals,
            shadow: b.clone(),
            distance: vec![1.0; b.len()],
            beta: b,
            exponent: 0.0,
            sigma_shadow_db: 0.0,
        }
    }

    #[inline]
    fn idx(&self, k: usize, j: usize, l: usize) -> usize {
        debug_assert!(k < self.cells && j < self.cells && l < self.terminals);
        (k * self.cells + j) * self.terminals + l
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn terminals(&self) -> usize {
        self.terminals
    }

    /// Terminal `l` of cell `k` to base station `j`.
    #[inline]
    pub fn beta(&self, k: usize, j: usize, l: usize) -> f64 {
        self.beta[self.idx(k, j, l)]
    }

    pub fn shadow(&self, k: usize, j: usize, l: usize) -> f64 {
        self.shadow[self.idx(k, j, l)]
    }

    pub fn distance(&self, k: usize, j: usize, l: usize) -> f64 {
        self.distance[self.idx(k, j, l)]
    }

    /// β from every terminal of cell `k` to base station `j`.
    pub fn betas_to(&self, k: usize, j: usize) -> Vec<f64> {
        (0..self.terminals).map(|l| self.beta(k, j, l)).collect()
    }
}

/// Large-scale profile for a drop: `β = z / r^exponent`, `10log10 z ~ N(0, σ²)`.
pub fn gen_large_scale(
    layout: &CellLayout,
    drop: &UserDrop,
    sigma_shadow_db: f64,
    exponent: f64,
    rng: &mut Stream,
) -> Result<LargeScaleProfile, ChannelError> {
    let cells = layout.cells();
    if drop.cells() != cells {
        return Err(ChannelError::DimensionMismatch(format!(
            "drop has {} cells, layout {}",
            drop.cells(),
            cells
        )));
    }
    LargeScaleProfile::from_distances(
        cells,
        drop.terminals(),
        |k, j, l| layout.distance_to_bs(j, drop.position(k, l)),
        drop.min_distance,
        sigma_shadow_db,
        exponent,
        rng,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStreamKey;

    #[test]
    fn no_shadowing_is_pure_path_loss() {
        let mut rng = RngStreamKey::new(0, 0, 0, 0).stream();
        let p = LargeScaleProfile::from_distances(1, 1, |_, _, _| 100.0, 100.0, 0.0, 3.8, &mut rng).unwrap();
        assert!((p.beta(0, 0, 0) / 100f64.powf(-3.8) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn too_close_is_rejected() {
        let mut rng = RngStreamKey::new(0, 0, 0, 0).stream();
        let r = LargeScaleProfile::from_distances(1, 2, |_, _, l| if l == 1 { 50.0 } else { 200.0 }, 100.0, 8.0, 3.8, &mut rng);
        assert!(matches!(r, Err(ChannelError::UserTooClose { terminal: 1, .. })));
    }
}
