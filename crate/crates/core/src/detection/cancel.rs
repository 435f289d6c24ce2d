//! Interference-cancellation detectors. MMSE-SIC feeds back soft symbols and
//! recomputes its filters from the current soft-symbol variances, so they
//! depend on `x`. BI-GDFE feeds back hard decisions and weighs them by a
//! scheduled input-decision correlation (IDC), so its filters depend only on
//! `G` and can be built once per channel.
//!
//! Both work in `K x K` form: with `H = √p G`, `(I + H V Hᴴ)⁻¹ H = H (I + V HᴴH)⁻¹`.

use std::time::Instant;

use num_complex::Complex64;

use super::complexity::{ComplexityParams, Technique};
use super::linear::mmse_filter;
use super::{indices_to_symbols, qpsk_slice, DetectionError, DetectionProblem, DetectionResult};
use crate::numerics::{Cholesky, ComplexMatrix, Lu};

const A: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Posterior mean of a QPSK symbol observed as `z = q + n`, `n ~ CN(0, var)`.
fn soft_symbol(z: Complex64, var: f64) -> Complex64 {
    if var <= 1e-300 {
        return super::qpsk_symbol(qpsk_slice(z));
    }
    let t = 2.0 * A / var;
    Complex64::new(A * (t * z.re).tanh(), A * (t * z.im).tanh())
}

/// Iterative MMSE with soft interference cancellation, `n_iter` parallel sweeps.
///
/// Sweep `i` uses soft symbols `q̃` with variances `v_j = 1 − |q̃_j|²`
/// (initially 0 and 1). User `k` cancels `Σ_{j≠k} h_j q̃_j` and filters with
/// `(Σ_{j≠k} v_j h_j h_jᴴ + h_k h_kᴴ + I)⁻¹ h_k`, obtained from the common
/// inverse by a rank-one update. The unbiased output `ẑ_k` has noise
/// variance `1/s_k − 1`, `s_k = h_kᴴ(·)⁻¹h_k`, which sets the posterior mean.
pub fn detect_mmse_sic(problem: &DetectionProblem, n_iter: usize) -> Result<DetectionResult, DetectionError> {
    if n_iter == 0 {
        return Err(DetectionError::InvalidParameter("n_iter must be >= 1".into()));
    }
    let start = Instant::now();
    let k = problem.k();
    let h = problem.h();
    let b = h.gram();
    let y = h.adjoint_mat_vec(&problem.x);
    let mut soft = vec![Complex64::new(0.0, 0.0); k];
    let mut var = vec![1.0; k];
    let mut hard = vec![0u8; k];
    for _ in 0..n_iter {
        // T = (I + V B)⁻¹, so A⁻¹H = H T with A = I + H V Hᴴ.
        let t = Lu::new(&ComplexMatrix::from_fn(k, k, |i, j| b[(i, j)] * var[i]).add_identity(1.0))?.inverse();
        let bt = b.matmul(&t);
        // Hᴴ(x − H q̃)
        let bq = b.mat_vec(&soft);
        let resid: Vec<Complex64> = y.iter().zip(&bq).map(|(a, c)| a - c).collect();
        let mut next = vec![Complex64::new(0.0, 0.0); k];
        for u in 0..k {
            let s0 = bt[(u, u)].re;
            let s = s0 / (1.0 + (1.0 - var[u]) * s0);
            // u_kᴴ Hᴴ x̃_k with u_k = T e_k and x̃_k = x − Hq̃ + h_k q̃_k.
            let mut z = Complex64::new(0.0, 0.0);
            for j in 0..k {
                z += t[(j, u)].conj() * (resid[j] + b[(j, u)] * soft[u]);
            }
            // Rank-one rescale of A⁻¹h_k, then remove the bias s.
            let zhat = z / (1.0 + (1.0 - var[u]) * s0) / s;
            hard[u] = qpsk_slice(zhat);
            next[u] = soft_symbol(zhat, (1.0 / s - 1.0).max(0.0));
        }
        var = next.iter().map(|q| (1.0 - q.norm_sqr()).max(0.0)).collect();
        soft = next;
    }
    let flops = Technique::MmseSic.flops(problem.m(), k, &ComplexityParams { n_iter: Some(n_iter), ..Default::default() })?;
    Ok(DetectionResult::finish(problem, hard, (n_iter * k) as u64, flops, start))
}

/// Geometric IDC ramp from 0.5 to 1 over `n` iterations.
pub fn idc_ramp(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![1.0],
        _ => (0..n).map(|i| 0.5f64.powf(1.0 - i as f64 / (n - 1) as f64)).collect(),
    }
}

/// BI-GDFE filters for one channel. Stage `i` with IDC `c` uses the unbiased
/// filter `w_k ∝ ((1 − c²) HHᴴ + I)⁻¹ h_k`, `w_kᴴ h_k = 1`, and forms
/// `ẑ = W(x − c H q̄) + c q̄` from the previous hard decisions `q̄`.
/// The initial decisions come from the unbiased linear MMSE stage.
#[derive(Debug, Clone, PartialEq)]
pub struct BiGdfeFilters {
    pub schedule: Vec<f64>,
    pub init: ComplexMatrix,
    pub stages: Vec<ComplexMatrix>,
    /// `W_i H` per stage, so each stage costs one `K x M` product per `x`.
    pub cross: Vec<ComplexMatrix>,
}

impl BiGdfeFilters {
    pub fn new(g: &ComplexMatrix, p: f64, schedule: &[f64]) -> Result<Self, DetectionError> {
        if schedule.is_empty() || schedule.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(DetectionError::InvalidParameter("IDC schedule must be non-empty with entries in [0, 1]".into()));
        }
        let h = g.scale_real(p.sqrt());
        let b = h.gram();
        let k = g.cols();
        let unbiased = |c: f64| -> Result<ComplexMatrix, DetectionError> {
            let t = Cholesky::new(&b.scale_real(1.0 - c * c).add_identity(1.0))?.inverse();
            let bt = b.matmul(&t);
            let scale: Vec<f64> = (0..k).map(|u| 1.0 / bt[(u, u)].re).collect();
            // W = D⁻¹ T Hᴴ, rows are w_kᴴ.
            Ok(t.matmul(&h.adjoint()).adjoint().scale_columns(&scale).adjoint())
        };
        let init = {
            let w = mmse_filter(g, p)?;
            // Remove the per-user bias of the MMSE estimate.
            let d = w.matmul(&h).diag();
            let scale: Vec<f64> = d.iter().map(|z| 1.0 / z.re).collect();
            w.adjoint().scale_columns(&scale).adjoint()
        };
        let stages = schedule.iter().map(|&c| unbiased(c)).collect::<Result<Vec<_>, _>>()?;
        let cross = stages.iter().map(|w| w.matmul(&h)).collect();
        Ok(Self { schedule: schedule.to_vec(), init, stages, cross })
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<u8> {
        let mut dec: Vec<u8> = self.init.mat_vec(x).into_iter().map(qpsk_slice).collect();
        for ((w, wh), &c) in self.stages.iter().zip(&self.cross).zip(&self.schedule) {
            let qbar = indices_to_symbols(&dec);
            let wx = w.mat_vec(x);
            let whq = wh.mat_vec(&qbar);
            dec = (0..dec.len()).map(|u| qpsk_slice(wx[u] - whq[u] * c + qbar[u] * c)).collect();
        }
        dec
    }
}

pub fn detect_bigdfe(problem: &DetectionProblem, schedule: &[f64]) -> Result<DetectionResult, DetectionError> {
    let start = Instant::now();
    let filters = BiGdfeFilters::new(&problem.g, problem.p(), schedule)?;
    let q = filters.apply(&problem.x);
    let params = ComplexityParams { n_iter: Some(schedule.len()), ..Default::default() };
    let flops = Technique::BiGdfe.flops(problem.m(), problem.k(), &params)?;
    Ok(DetectionResult::finish(problem, q, schedule.len() as u64, flops, start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStreamKey;
    use rand::RngCore;

    /// Columns of a scaled DFT matrix are orthogonal.
    fn orthogonal_channel(m: usize, k: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(m, k, |i, j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (i * j) as f64 / m as f64))
    }

    #[test]
    fn soft_symbol_limits() {
        let z = Complex64::new(0.3, -0.2);
        let s = soft_symbol(z, 1e-6);
        assert!((s - super::super::qpsk_symbol(qpsk_slice(z))).norm() < 1e-12);
        assert!(soft_symbol(z, 1e9).norm() < 1e-8);
    }

    #[test]
    fn sic_on_orthogonal_columns_is_genie_after_one_sweep() {
        let g = orthogonal_channel(8, 4);
        let mut s = RngStreamKey::new(5, 0, 0, 0).stream();
        for _ in 0..50 {
            let q: Vec<u8> = (0..4).map(|_| (s.next_u32() % 4) as u8).collect();
            let p: f64 = 0.5;
            let mut x = g.mat_vec(&indices_to_symbols(&q));
            for (xi, n) in x.iter_mut().zip(s.cn_vec(8)) {
                *xi = *xi * p.sqrt() + n;
            }
            let prob = DetectionProblem::new(g.clone(), x.clone(), p * 4.0).unwrap();
            // Genie: per-user matched filter.
            let genie: Vec<u8> = (0..4).map(|u| qpsk_slice(crate::numerics::dot_conj(g.col(u), &x))).collect();
            assert_eq!(detect_mmse_sic(&prob, 1).unwrap().q_hat, genie);
        }
    }

    #[test]
    fn bigdfe_filters_depend_only_on_channel() {
        let mut s = RngStreamKey::new(6, 0, 0, 0).stream();
        let g = ComplexMatrix::from_col_major(6, 4, s.cn_vec(24));
        let a = BiGdfeFilters::new(&g, 2.0, &idc_ramp(4)).unwrap();
        let b = BiGdfeFilters::new(&g, 2.0, &idc_ramp(4)).unwrap();
        assert_eq!(a, b);
        // Unbiasedness: w_kᴴ h_k = 1.
        for (w, c) in a.stages.iter().zip(&a.cross) {
            for u in 0..4 {
                assert!((c[(u, u)] - 1.0).norm() < 1e-10);
                assert_eq!(w.rows(), 4);
            }
        }
    }

    #[test]
    fn full_idc_with_correct_decisions_is_matched_filter() {
        let g = orthogonal_channel(8, 4);
        let f = BiGdfeFilters::new(&g, 1.0, &[1.0]).unwrap();
        for u in 0..4 {
            for i in 0..8 {
                let expect = g[(i, u)].conj() / 8.0;
                assert!((f.stages[0][(u, i)] - expect).norm() < 1e-12);
            }
        }
        let q = vec![0u8, 3, 1, 2];
        let x = g.mat_vec(&indices_to_symbols(&q));
        assert_eq!(f.apply(&x), q);
    }

    #[test]
    fn ramp_ends_at_one() {
        let r = idc_ramp(4);
        assert!((r[0] - 0.5).abs() < 1e-15 && (r[3] - 1.0).abs() < 1e-15);
        assert!(r.windows(2).all(|w| w[0] < w[1]));
    }
}
