use serde::{Deserialize, Serialize};

use super::MulticellError;
use crate::rng::Stream;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Hexagonal cells (pointy-top, radius measured centre to vertex) in
/// `tiers` rings around cell 0, optionally wrapped onto a torus so that
/// every cell sees the same interference environment. Reuse factor is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellLayout {
    pub radius: f64,
    pub tiers: usize,
    pub wraparound: bool,
    centers: Vec<[f64; 2]>,
    shifts: Vec<[f64; 2]>,
}

fn axial_to_xy(radius: f64, q: i64, r: i64) -> [f64; 2] {
    [radius * SQRT3 * (q as f64 + r as f64 / 2.0), radius * 1.5 * r as f64]
}

fn ring(q: i64, r: i64) -> i64 {
    q.abs().max(r.abs()).max((q + r).abs())
}

impl CellLayout {
    pub fn new(radius: f64, tiers: usize, wraparound: bool) -> Result<Self, MulticellError> {
        if tiers == 0 {
            return Err(MulticellError::InvalidParameter("at least one interference tier is required".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(MulticellError::InvalidParameter(format!("cell radius must be positive, got {radius}")));
        }
        let n = tiers as i64;
        let mut axial = Vec::new();
        for q in -n..=n {
            for r in (-n).max(-q - n)..=n.min(-q + n) {
                axial.push((q, r));
            }
        }
        axial.sort_by_key(|&(q, r)| (ring(q, r), q, r));
        let centers = axial.iter().map(|&(q, r)| axial_to_xy(radius, q, r)).collect();
        let shifts = if wraparound {
            let a = (2 * n + 1, -n);
            let b = (n, n + 1);
            let c = (b.0 - a.0, b.1 - a.1);
            let mut s = vec![[0.0, 0.0]];
            for (q, r) in [a, b, c] {
                s.push(axial_to_xy(radius, q, r));
                s.push(axial_to_xy(radius, -q, -r));
            }
            s
        } else {
            vec![[0.0, 0.0]]
        };
        Ok(Self { radius, tiers, wraparound, centers, shifts })
    }

    pub fn cells(&self) -> usize {
        self.centers.len()
    }

    pub fn center(&self, j: usize) -> [f64; 2] {
        self.centers[j]
    }

    /// Distance from base station `j` to `p`, taking the nearest wrapped image.
    pub fn distance_to_bs(&self, j: usize, p: [f64; 2]) -> f64 {
        let c = self.centers[j];
        self.shifts
            .iter()
            .map(|s| ((p[0] - c[0] - s[0]).powi(2) + (p[1] - c[1] - s[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether an offset from a cell centre falls inside that hexagon.
    pub fn inside_hex(&self, dx: f64, dy: f64) -> bool {
        let ax = dx.abs();
        ax <= SQRT3 / 2.0 * self.radius && dy.abs() <= self.radius - ax / SQRT3
    }
}

/// Terminal positions, `K` per cell, uniform over each hexagon outside a
/// disc of `min_distance` around its base station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserDrop {
    positions: Vec<Vec<[f64; 2]>>,
    pub min_distance: f64,
}

impl UserDrop {
    pub fn generate(
        layout: &CellLayout,
        terminals: usize,
        min_distance: f64,
        max_retries: usize,
        rng: &mut Stream,
    ) -> Result<Self, MulticellError> {
        if !(min_distance >= 0.0 && min_distance < layout.radius * SQRT3 / 2.0) {
            return Err(MulticellError::InvalidParameter(format!(
                "min distance {min_distance} must be in [0, inradius)"
            )));
        }
        let half_w = SQRT3 / 2.0 * layout.radius;
        let mut positions = Vec::with_capacity(layout.cells());
        for cell in 0..layout.cells() {
            let c = layout.center(cell);
            let mut cell_pos = Vec::with_capacity(terminals);
            for terminal in 0..terminals {
                let mut placed = None;
                for _ in 0..max_retries.max(1) {
                    let dx = (rng.uniform() * 2.0 - 1.0) * half_w;
                    let dy = (rng.uniform() * 2.0 - 1.0) * layout.radius;
                    if layout.inside_hex(dx, dy) && (dx * dx + dy * dy).sqrt() >= min_distance {
                        placed = Some([c[0] + dx, c[1] + dy]);
                        break;
                    }
                }
                match placed {
                    Some(p) => cell_pos.push(p),
                    None => return Err(MulticellError::RetriesExhausted { cell, terminal, retries: max_retries }),
                }
            }
            positions.push(cell_pos);
        }
        Ok(Self { positions, min_distance })
    }

    pub fn cells(&self) -> usize {
        self.positions.len()
    }

    pub fn terminals(&self) -> usize {
        self.positions.first().map_or(0, Vec::len)
    }

    pub fn position(&self, cell: usize, terminal: usize) -> [f64; 2] {
        self.positions[cell][terminal]
    }
}
