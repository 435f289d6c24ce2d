use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ChannelError;
use crate::numerics::dot_conj;
use crate::rng::Stream;

/// Shortest admissible propagation leg, in wavelengths.
const MIN_LEG: f64 = 0.1;

/// Geometry of a scatterer field and the linear array that illuminates it.
/// Lengths are in wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScattererConfig {
    pub scatterers: usize,
    /// Side of the square holding the scatterers, centred on the origin.
    pub square_side: f64,
    /// Gap between the array and the near edge of the square.
    pub standoff: f64,
    pub element_spacing: f64,
    /// Per-leg amplitude decay exponent: amplitude ∝ 1/(d₁d₂)^amp_exponent.
    pub amp_exponent: f64,
}

impl Default for ScattererConfig {
    fn default() -> Self {
        Self {
            scatterers: 400,
            square_side: 800.0,
            standoff: 1600.0,
            element_spacing: 0.5,
            amp_exponent: 1.0,
        }
    }
}

/// A frozen scatterer realization together with the array geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattererField {
    pub scatterers: Vec<[f64; 2]>,
    pub reflections: Vec<Complex64>,
    pub elements: Vec<[f64; 2]>,
    pub amp_exponent: f64,
}

impl ScattererField {
    /// Uniform scatterers in the square, CN(0,1) reflection coefficients, and
    /// an `m`-element array along the y axis centred `standoff` from the square.
    pub fn generate(cfg: &ScattererConfig, m: usize, rng: &mut Stream) -> Result<Self, ChannelError> {
        if cfg.scatterers == 0 || m == 0 {
            return Err(ChannelError::InvalidParameter("need at least one scatterer and one element".into()));
        }
        if !(cfg.square_side > 0.0 && cfg.standoff >= 0.0 && cfg.element_spacing > 0.0) {
            return Err(ChannelError::InvalidParameter("scatterer geometry must be positive".into()));
        }
        let half = cfg.square_side / 2.0;
        let scatterers: Vec<[f64; 2]> = (0..cfg.scatterers)
            .map(|_| [(rng.uniform() * 2.0 - 1.0) * half, (rng.uniform() * 2.0 - 1.0) * half])
            .collect();
        let reflections = rng.cn_vec(cfg.scatterers);
        let x0 = -half - cfg.standoff;
        let mid = (m as f64 - 1.0) / 2.0;
        let elements = (0..m).map(|i| [x0, (i as f64 - mid) * cfg.element_spacing]).collect();
        Ok(Self { scatterers, reflections, elements, amp_exponent: cfg.amp_exponent })
    }

    pub fn m(&self) -> usize {
        self.elements.len()
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Channel gains from every array element to `point` through all scatterers.
pub fn geometric_gains(field: &ScattererField, point: [f64; 2]) -> Result<Vec<Complex64>, ChannelError> {
    let legs2: Vec<f64> = field.scatterers.iter().map(|&s| dist(s, point)).collect();
    if let Some(&d) = legs2.iter().find(|&&d| d < MIN_LEG) {
        return Err(ChannelError::DegenerateGeometry { distance: d });
    }
    let mut out = Vec::with_capacity(field.m());
    for &e in &field.elements {
        let mut g = Complex64::new(0.0, 0.0);
        for ((&s, &a), &d2) in field.scatterers.iter().zip(&field.reflections).zip(&legs2) {
            let d1 = dist(e, s);
            if d1 < MIN_LEG {
                return Err(ChannelError::DegenerateGeometry { distance: d1 });
            }
            let amp = (d1 * d2).powf(field.amp_exponent).recip();
            g += a * Complex64::from_polar(amp, -2.0 * PI * (d1 + d2));
        }
        out.push(g);
    }
    Ok(out)
}

/// Power received at `point` from a matched-filter beam focused on `focus`,
/// relative to a beam focused on `point` itself. Linear scale, ≤ 1, and
/// exactly 1 at the focus.
pub fn normalized_field_strength(point_gains: &[Complex64], focus_gains: &[Complex64]) -> f64 {
    let cross = dot_conj(focus_gains, point_gains).norm_sqr();
    let pp = dot_conj(point_gains, point_gains).re;
    let ff = dot_conj(focus_gains, focus_gains).re;
    cross / (pp * ff)
}

/// Precomputed array-to-scatterer legs for evaluating [`geometric_gains`] at
/// many points. Each point then costs one `M x S` matrix-vector product.
#[derive(Debug, Clone)]
pub struct GainEvaluator {
    field: ScattererField,
    /// Row-major `M x S`: `a_s e^{-j2πd₁}/d₁^e`.
    legs1: Vec<Complex64>,
}

impl GainEvaluator {
    pub fn new(field: &ScattererField) -> Result<Self, ChannelError> {
        let mut legs1 = Vec::with_capacity(field.m() * field.scatterers.len());
        for &e in &field.elements {
            for (&s, &a) in field.scatterers.iter().zip(&field.reflections) {
                let d1 = dist(e, s);
                if d1 < MIN_LEG {
                    return Err(ChannelError::DegenerateGeometry { distance: d1 });
                }
                legs1.push(a * Complex64::from_polar(d1.powf(field.amp_exponent).recip(), -2.0 * PI * d1));
            }
        }
        Ok(Self { field: field.clone(), legs1 })
    }

    pub fn field(&self) -> &ScattererField {
        &self.field
    }

    pub fn gains(&self, point: [f64; 2]) -> Result<Vec<Complex64>, ChannelError> {
        let s = self.field.scatterers.len();
        let mut legs2 = Vec::with_capacity(s);
        for &sc in &self.field.scatterers {
            let d2 = dist(sc, point);
            if d2 < MIN_LEG {
                return Err(ChannelError::DegenerateGeometry { distance: d2 });
            }
            legs2.push(Complex64::from_polar(d2.powf(self.field.amp_exponent).recip(), -2.0 * PI * d2));
        }
        Ok(self.legs1.chunks(s).map(|row| row.iter().zip(&legs2).map(|(a, b)| a * b).sum()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStreamKey;

    #[test]
    fn mirror_symmetric_elements_get_equal_magnitude() {
        let field = ScattererField {
            scatterers: vec![[0.0, 0.0]],
            reflections: vec![Complex64::new(0.7, -0.2)],
            elements: vec![[-100.0, 3.0], [-100.0, -3.0]],
            amp_exponent: 1.0,
        };
        let g = geometric_gains(&field, [20.0, 0.0]).unwrap();
        assert!((g[0].norm() - g[1].norm()).abs() < 1e-15);
    }

    #[test]
    fn focus_is_exactly_unity() {
        let mut rng = RngStreamKey::new(5, 0, 0, 0).stream();
        let field = ScattererField::generate(&ScattererConfig::default(), 10, &mut rng).unwrap();
        let h = geometric_gains(&field, [1.23, -4.56]).unwrap();
        assert_eq!(normalized_field_strength(&h, &h), 1.0);
    }

    #[test]
    fn degenerate_leg_is_rejected() {
        let field = ScattererField {
            scatterers: vec![[0.0, 0.0]],
            reflections: vec![Complex64::new(1.0, 0.0)],
            elements: vec![[-10.0, 0.0]],
            amp_exponent: 1.0,
        };
        assert!(matches!(geometric_gains(&field, [0.05, 0.0]), Err(ChannelError::DegenerateGeometry { .. })));
    }

    #[test]
    fn evaluator_matches_direct_sum() {
        let mut rng = RngStreamKey::new(8, 0, 0, 0).stream();
        let field = ScattererField::generate(&ScattererConfig::default(), 12, &mut rng).unwrap();
        let ev = GainEvaluator::new(&field).unwrap();
        for p in [[0.0, 0.0], [3.3, -1.7], [-120.0, 55.0]] {
            let a = geometric_gains(&field, p).unwrap();
            let b = ev.gains(p).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() <= 1e-9 * x.norm().max(1e-300));
            }
        }
    }
}
