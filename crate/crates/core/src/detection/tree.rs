//! Tree search on the QR form `‖x − Hq‖² = ‖y − R Πᵀq‖² + ‖x‖² − ‖y‖²`,
//! `HΠ = QR`, `y = Qᴴx`, with levels decided from the last row upward.

use std::time::Instant;

use num_complex::Complex64;

use super::complexity::{ComplexityParams, Technique};
use super::{qpsk_slice, qpsk_symbol, DetectionError, DetectionProblem, DetectionResult};
use crate::numerics::{pseudo_inverse, ComplexMatrix, Qr};

/// Largest `K` for exhaustive ML (`4^12 ≈ 1.7·10⁷` leaves).
pub const ML_MAX_K: usize = 12;
/// Default FCSD candidate budget, `4^8`.
pub const FCSD_DEFAULT_BUDGET: u64 = 1 << 16;

struct Triangular {
    r: ComplexMatrix,
    y: Vec<Complex64>,
    /// `perm[i]` is the original column placed at position `i`.
    perm: Vec<usize>,
}

impl Triangular {
    fn new(problem: &DetectionProblem, perm: Vec<usize>) -> Result<Self, DetectionError> {
        if problem.m() < problem.k() {
            return Err(DetectionError::DimensionMismatch(format!(
                "tree search needs M >= K, got M={}, K={}",
                problem.m(),
                problem.k()
            )));
        }
        let h = problem.h().submatrix_cols(&perm);
        let qr = Qr::new(&h)?;
        let y = qr.q().adjoint_mat_vec(&problem.x);
        Ok(Self { r: qr.r().clone(), y, perm })
    }

    /// `y_i − Σ_{j>i} R_ij s_j`.
    fn target(&self, i: usize, s: &[u8]) -> Complex64 {
        let mut b = self.y[i];
        for j in i + 1..s.len() {
            b -= self.r[(i, j)] * qpsk_symbol(s[j]);
        }
        b
    }

    fn unpermute(&self, s: &[u8]) -> Vec<u8> {
        let mut q = vec![0u8; s.len()];
        for (pos, &col) in self.perm.iter().enumerate() {
            q[col] = s[pos];
        }
        q
    }
}

/// Exact ML by depth-first Schnorr–Euchner enumeration with radius pruning.
pub fn detect_ml_oracle(problem: &DetectionProblem) -> Result<DetectionResult, DetectionError> {
    let k = problem.k();
    if k > ML_MAX_K {
        return Err(DetectionError::TooLarge { k, max: ML_MAX_K });
    }
    let start = Instant::now();
    let tri = Triangular::new(problem, (0..k).collect())?;
    let mut s = vec![0u8; k];
    let mut best = (f64::INFINITY, vec![0u8; k]);
    let mut leaves = 0u64;
    ml_descend(&tri, k, 0.0, &mut s, &mut best, &mut leaves);
    let flops = Technique::Ml.flops(problem.m(), k, &ComplexityParams::default())?;
    Ok(DetectionResult::finish(problem, tri.unpermute(&best.1), leaves, flops, start))
}

fn ml_descend(tri: &Triangular, level: usize, partial: f64, s: &mut [u8], best: &mut (f64, Vec<u8>), leaves: &mut u64) {
    if level == 0 {
        *leaves += 1;
        if partial < best.0 {
            *best = (partial, s.to_vec());
        }
        return;
    }
    let i = level - 1;
    let b = tri.target(i, s);
    let rii = tri.r[(i, i)];
    let mut cands: [(f64, u8); 4] = [0u8, 1, 2, 3].map(|c| ((b - rii * qpsk_symbol(c)).norm_sqr(), c));
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (d, c) in cands {
        let m = partial + d;
        if m >= best.0 {
            break;
        }
        s[i] = c;
        ml_descend(tri, i, m, s, best, leaves);
    }
}

/// Exhaustive ML over all `4^K` vectors, updating the residual incrementally.
pub fn detect_ml_brute_force(problem: &DetectionProblem) -> Result<DetectionResult, DetectionError> {
    let k = problem.k();
    if k > ML_MAX_K {
        return Err(DetectionError::TooLarge { k, max: ML_MAX_K });
    }
    let start = Instant::now();
    let h = problem.h();
    let mut q = vec![0u8; k];
    let sym0 = qpsk_symbol(0);
    let mut resid: Vec<Complex64> = problem.x.clone();
    for u in 0..k {
        for (r, hv) in resid.iter_mut().zip(h.col(u)) {
            *r -= hv * sym0;
        }
    }
    let metric = |r: &[Complex64]| r.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let mut best = (metric(&resid), q.clone());
    let total = 1u64 << (2 * k);
    for _ in 1..total {
        // Odometer increment in base 4.
        let mut u = 0;
        loop {
            let old = q[u];
            let new = (old + 1) % 4;
            let delta = qpsk_symbol(new) - qpsk_symbol(old);
            for (r, hv) in resid.iter_mut().zip(h.col(u)) {
                *r -= hv * delta;
            }
            q[u] = new;
            if new != 0 {
                break;
            }
            u += 1;
        }
        let m = metric(&resid);
        if m < best.0 {
            best = (m, q.clone());
        }
    }
    let flops = Technique::Ml.flops(problem.m(), k, &ComplexityParams::default())?;
    Ok(DetectionResult::finish(problem, best.1, total, flops, start))
}

/// Detection order for FCSD: the `r` streams with the lowest post-ZF SNR
/// first (ascending), then the rest from strongest to weakest.
pub fn fcsd_order(problem: &DetectionProblem, r: usize) -> Result<Vec<usize>, DetectionError> {
    let k = problem.k();
    let pinv = pseudo_inverse(&problem.g)?;
    // Post-ZF noise enhancement is ‖row_k(G⁺)‖²; SNR is its reciprocal.
    let enh: Vec<f64> = (0..k).map(|u| pinv.row(u).iter().map(|z| z.norm_sqr()).sum()).collect();
    let mut by_snr: Vec<usize> = (0..k).collect();
    by_snr.sort_by(|&a, &b| enh[b].total_cmp(&enh[a]));
    let mut order: Vec<usize> = by_snr[..r].to_vec();
    order.extend(by_snr[r..].iter().rev());
    Ok(order)
}

/// FCSD with the default ordering.
pub fn detect_fcsd(problem: &DetectionProblem, r: usize, budget: u64) -> Result<DetectionResult, DetectionError> {
    if r > problem.k() {
        return Err(DetectionError::InvalidParameter(format!("r = {r} exceeds K = {}", problem.k())));
    }
    let order = fcsd_order(problem, r)?;
    detect_fcsd_ordered(problem, r, budget, &order)
}

/// Zero-forcing decision feedback (FCSD with `r = 0`).
pub fn zf_df(problem: &DetectionProblem) -> Result<DetectionResult, DetectionError> {
    detect_fcsd(problem, 0, 1)
}

/// Enumerates every value of the first `r` symbols in `order` and completes
/// each by ZF-DF, returning the candidate with the smallest metric.
pub fn detect_fcsd_ordered(problem: &DetectionProblem, r: usize, budget: u64, order: &[usize]) -> Result<DetectionResult, DetectionError> {
    let k = problem.k();
    if r > k {
        return Err(DetectionError::InvalidParameter(format!("r = {r} exceeds K = {k}")));
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..k).collect::<Vec<_>>() {
        return Err(DetectionError::InvalidParameter("order must be a permutation of 0..K".into()));
    }
    let candidates = 4u128.pow(r as u32);
    if candidates > budget as u128 {
        return Err(DetectionError::BudgetExceeded { candidates, budget });
    }
    let start = Instant::now();
    // First detected goes to the last column.
    let perm: Vec<usize> = order.iter().rev().copied().collect();
    let tri = Triangular::new(problem, perm)?;
    let mut s = vec![0u8; k];
    let mut best = (f64::INFINITY, vec![0u8; k]);
    let mut leaves = 0u64;
    fcsd_descend(&tri, k, k - r, 0.0, &mut s, &mut best, &mut leaves);
    let flops = Technique::Fcsd.flops(problem.m(), k, &ComplexityParams { r: Some(r), ..Default::default() })?;
    Ok(DetectionResult::finish(problem, tri.unpermute(&best.1), leaves, flops, start))
}

fn fcsd_descend(tri: &Triangular, level: usize, full_below: usize, partial: f64, s: &mut [u8], best: &mut (f64, Vec<u8>), leaves: &mut u64) {
    if level == 0 {
        *leaves += 1;
        if partial < best.0 {
            *best = (partial, s.to_vec());
        }
        return;
    }
    let i = level - 1;
    let b = tri.target(i, s);
    let rii = tri.r[(i, i)];
    if i >= full_below {
        for c in 0..4u8 {
            s[i] = c;
            let d = (b - rii * qpsk_symbol(c)).norm_sqr();
            fcsd_descend(tri, i, full_below, partial + d, s, best, leaves);
        }
    } else {
        let c = qpsk_slice(b / rii);
        s[i] = c;
        let d = (b - rii * qpsk_symbol(c)).norm_sqr();
        fcsd_descend(tri, i, full_below, partial + d, s, best, leaves);
    }
}
