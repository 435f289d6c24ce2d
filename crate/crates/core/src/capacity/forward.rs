use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::{check_rho, CapacityError};
use crate::numerics::{Cholesky, ComplexMatrix, Lu};

const MAX_ITER: usize = 10_000;
const PG_TOL: f64 = 1e-7;

/// Per-terminal power fractions on the unit simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub gamma: Vec<f64>,
}

impl PowerAllocation {
    pub fn uniform(k: usize) -> Self {
        Self { gamma: vec![1.0 / k as f64; k] }
    }

    pub fn new(gamma: Vec<f64>) -> Result<Self, CapacityError> {
        let p = Self { gamma };
        if !p.is_feasible(1e-9) {
            return Err(CapacityError::InvalidParameter("power allocation must lie on the unit simplex".into()));
        }
        Ok(p)
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        self.gamma.iter().all(|&g| g >= -tol && g.is_finite()) && (self.gamma.iter().sum::<f64>() - 1.0).abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardSolution {
    pub value: f64,
    pub allocation: PowerAllocation,
    pub iterations: usize,
    /// `max_k min(γ_k, (λ − ∇_k)/λ)` with `λ = max_k ∇_k`; zero at the optimum.
    pub kkt_residual: f64,
}

/// Euclidean projection onto `{x >= 0, Σx = 1}`.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

struct Objective {
    b: ComplexMatrix,
    rho: f64,
}

impl Objective {
    /// `log2 det(I + ρ D^{1/2} B D^{1/2})`.
    fn value(&self, gamma: &[f64]) -> Result<f64, CapacityError> {
        let s: Vec<f64> = gamma.iter().map(|g| g.max(0.0).sqrt()).collect();
        let k = s.len();
        let m = ComplexMatrix::from_fn(k, k, |i, j| self.b[(i, j)] * (self.rho * s[i] * s[j])).add_identity(1.0);
        let v = Cholesky::new(&m)?.ln_det() / LN_2;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CapacityError::NonFinite)
        }
    }

    /// `∂f/∂γ_k = ρ [B (I + ρ D B)⁻¹]_kk / ln 2`.
    fn gradient(&self, gamma: &[f64]) -> Result<Vec<f64>, CapacityError> {
        let k = gamma.len();
        let m = ComplexMatrix::from_fn(k, k, |i, j| self.b[(i, j)] * (self.rho * gamma[i])).add_identity(1.0);
        let inv = Lu::new(&m)?.inverse();
        Ok((0..k)
            .map(|i| {
                let mut acc = num_complex::Complex64::new(0.0, 0.0);
                for l in 0..k {
                    acc += self.b[(i, l)] * inv[(l, i)];
                }
                self.rho * acc.re / LN_2
            })
            .collect())
    }
}

fn kkt_residual(gamma: &[f64], grad: &[f64]) -> f64 {
    let lambda = grad.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lambda > 0.0) {
        return 0.0;
    }
    gamma
        .iter()
        .zip(grad)
        .map(|(&g, &d)| g.max(0.0).min((lambda - d) / lambda))
        .fold(0.0, f64::max)
}

fn projected_gradient_norm(gamma: &[f64], grad: &[f64]) -> f64 {
    let lambda = grad.iter().cloned().fold(0.0, f64::max);
    if lambda <= 0.0 {
        return 0.0;
    }
    let step: Vec<f64> = gamma.iter().zip(grad).map(|(g, d)| g + d / lambda).collect();
    let p = project_simplex(&step);
    p.iter().zip(gamma).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// Sum rate `log2 det(I_M + ρ_f G D_γ Gᴴ)` at a given allocation.
pub fn forward_sum_rate_at(g: &ComplexMatrix, rho_f: f64, alloc: &PowerAllocation) -> Result<f64, CapacityError> {
    check_rho(rho_f)?;
    if alloc.gamma.len() != g.cols() {
        return Err(CapacityError::InvalidParameter("allocation length differs from K".into()));
    }
    Objective { b: g.gram(), rho: rho_f }.value(&alloc.gamma)
}

/// `max_γ log2 det(I_M + ρ_f G D_γ Gᴴ)` over the simplex by projected
/// gradient ascent with backtracking.
pub fn forward_sum_capacity(g: &ComplexMatrix, rho_f: f64) -> Result<ForwardSolution, CapacityError> {
    check_rho(rho_f)?;
    if !g.all_finite() {
        return Err(CapacityError::NonFinite);
    }
    let k = g.cols();
    if k == 0 {
        return Err(CapacityError::InvalidParameter("no terminals".into()));
    }
    let obj = Objective { b: g.gram(), rho: rho_f };
    let mut gamma = PowerAllocation::uniform(k).gamma;
    let mut f = obj.value(&gamma)?;
    let mut grad = obj.gradient(&gamma)?;
    let gmax = grad.iter().cloned().fold(0.0, f64::max);
    let mut t = if gmax > 0.0 { 1.0 / gmax } else { 1.0 };

    for it in 0..MAX_ITER {
        let pg = projected_gradient_norm(&gamma, &grad);
        if pg < PG_TOL {
            return Ok(ForwardSolution {
                value: f,
                kkt_residual: kkt_residual(&gamma, &grad),
                allocation: PowerAllocation { gamma },
                iterations: it,
            });
        }
        let mut accepted = false;
        for _ in 0..200 {
            let cand: Vec<f64> = project_simplex(&gamma.iter().zip(&grad).map(|(x, d)| x + t * d).collect::<Vec<_>>());
            let d: Vec<f64> = cand.iter().zip(&gamma).map(|(a, b)| a - b).collect();
            let lin: f64 = d.iter().zip(&grad).map(|(a, b)| a * b).sum();
            let quad: f64 = d.iter().map(|x| x * x).sum::<f64>() / (2.0 * t);
            let fc = obj.value(&cand)?;
            if fc >= f + lin - quad - 1e-15 * f.abs() {
                gamma = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(CapacityError::OptimizerStall { iterations: it, residual: pg });
        }
        grad = obj.gradient(&gamma)?;
        t *= 2.0;
    }
    Err(CapacityError::OptimizerStall { iterations: MAX_ITER, residual: projected_gradient_norm(&gamma, &grad) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5]);
        assert_eq!(p, vec![0.5, 0.5]);
        let p = project_simplex(&[3.0, 0.0, -1.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let p = project_simplex(&[0.2, 0.2, 0.2]);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn single_terminal() {
        let g = ComplexMatrix::from_rows(&[vec![Complex64::new(1.0, 1.0)], vec![Complex64::new(0.0, 1.0)]]);
        let s = forward_sum_capacity(&g, 2.0).unwrap();
        assert_eq!(s.allocation.gamma, vec![1.0]);
        assert!((s.value - 7f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn symmetric_channel_gets_uniform_power() {
        let g = ComplexMatrix::from_real_rows(&[vec![2.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 2.0], vec![0.0; 3]]);
        let s = forward_sum_capacity(&g, 10.0).unwrap();
        for x in &s.allocation.gamma {
            assert!((x - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn weak_user_is_switched_off_at_low_snr() {
        let g = ComplexMatrix::from_real_rows(&[vec![10.0, 0.0], vec![0.0, 0.1]]);
        let s = forward_sum_capacity(&g, 0.01).unwrap();
        assert!(s.allocation.gamma[1] < 1e-9, "{:?}", s.allocation);
        assert!(s.kkt_residual < 1e-6);
    }
}
