//! Moore–Penrose pseudo-inverse.
//!
//! Tall inputs are handled directly and wide inputs through `(Aᴴ)⁺ᴴ`. The
//! fast path solves the Gram system with Cholesky; when the Gram matrix is
//! badly conditioned (or not positive definite) a one-sided Jacobi SVD is
//! used instead, which resolves singular values down to machine precision.

use num_complex::Complex64;

use super::linalg::Cholesky;
use super::matrix::{dot_conj, ComplexMatrix};
use super::NumericsError;

/// Gram condition numbers above this fall back to the SVD path.
const GRAM_COND_LIMIT: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinvOptions {
    /// Singular values below `rtol · σ_max` count as zero.
    pub rtol: f64,
    /// Return the truncated Moore–Penrose inverse instead of `RankDeficient`.
    pub allow_rank_deficient: bool,
}

impl Default for PinvOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, allow_rank_deficient: false }
    }
}

/// Pseudo-inverse of a full-rank matrix; errors with `RankDeficient` otherwise.
pub fn pseudo_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    pseudo_inverse_with(a, PinvOptions::default())
}

pub fn pseudo_inverse_with(a: &ComplexMatrix, opts: PinvOptions) -> Result<ComplexMatrix, NumericsError> {
    if !a.all_finite() {
        return Err(NumericsError::NonFinite);
    }
    if a.rows() < a.cols() {
        return Ok(pseudo_inverse_with(&a.adjoint(), opts)?.adjoint());
    }
    if a.cols() == 0 {
        return Ok(ComplexMatrix::zeros(0, a.rows()));
    }
    if let Some(p) = gram_path(a) {
        return Ok(p);
    }
    svd_path(a, opts)
}

fn gram_path(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    let b = a.gram();
    let ch = Cholesky::new(&b).ok()?;
    let binv = ch.inverse();
    let cond = one_norm(&b) * one_norm(&binv);
    if !(cond < GRAM_COND_LIMIT) {
        return None;
    }
    Some(binv.matmul(&a.adjoint()))
}

fn one_norm(a: &ComplexMatrix) -> f64 {
    (0..a.cols()).map(|j| a.col(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Thin SVD `A = U diag(σ) Vᴴ` of a tall matrix, σ in the column order the
/// sweeps leave them (unsorted).
pub struct ThinSvd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

/// One-sided (Hestenes) Jacobi SVD for `rows >= cols`.
pub fn jacobi_svd(a: &ComplexMatrix) -> Result<ThinSvd, NumericsError> {
    let (m, n) = a.shape();
    if m < n {
        return Err(NumericsError::DimensionMismatch(format!("jacobi_svd needs rows >= cols, got {m}x{n}")));
    }
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(n);
    let tol = 1e-15 * (n as f64).max(1.0);
    let mut converged = false;
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.col(p).iter().map(Complex64::norm_sqr).sum::<f64>();
                let beta = w.col(q).iter().map(Complex64::norm_sqr).sum::<f64>();
                let gamma = dot_conj(w.col(p), w.col(q));
                let gmag = gamma.norm();
                if gmag == 0.0 || gmag <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / gmag;
                let theta = (beta - alpha) / (2.0 * gmag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let se = phase * t * c;
                let sec = se.conj();
                for k in 0..m {
                    let wp = w[(k, p)];
                    let wq = w[(k, q)];
                    w[(k, p)] = wp * c - wq * sec;
                    w[(k, q)] = wp * se + wq * c;
                }
                for k in 0..n {
                    let vp = v[(k, p)];
                    let vq = v[(k, q)];
                    v[(k, p)] = vp * c - vq * sec;
                    v[(k, q)] = vp * se + vq * c;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(NumericsError::NoConvergence);
    }
    let sigma: Vec<f64> = (0..n).map(|j| w.col(j).iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()).collect();
    let mut u = w;
    for (j, &s) in sigma.iter().enumerate() {
        if s > 0.0 {
            for z in u.col_mut(j) {
                *z /= s;
            }
        }
    }
    Ok(ThinSvd { u, sigma, v })
}

/// Singular values in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>, NumericsError> {
    let t = if a.rows() < a.cols() { a.adjoint() } else { a.clone() };
    let mut s = jacobi_svd(&t)?.sigma;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

fn svd_path(a: &ComplexMatrix, opts: PinvOptions) -> Result<ComplexMatrix, NumericsError> {
    let svd = jacobi_svd(a)?;
    let smax = svd.sigma.iter().cloned().fold(0.0, f64::max);
    let smin = svd.sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    let cutoff = opts.rtol * smax;
    if smin < cutoff && !opts.allow_rank_deficient {
        return Err(NumericsError::RankDeficient { sigma_min: smin, sigma_max: smax });
    }
    let inv: Vec<f64> = svd.sigma.iter().map(|&s| if s > cutoff && s > 0.0 { 1.0 / s } else { 0.0 }).collect();
    // A⁺ = V diag(1/σ) Uᴴ
    Ok(svd.v.scale_columns(&inv).matmul(&svd.u.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        let i2 = ComplexMatrix::identity(2);
        assert!(pseudo_inverse(&i2).unwrap().sub(&i2).frobenius_norm() < 1e-15);

        let d = ComplexMatrix::from_real_diag(&[2.0, 0.0]);
        assert!(matches!(pseudo_inverse(&d), Err(NumericsError::RankDeficient { .. })));
        let p = pseudo_inverse_with(&d, PinvOptions { allow_rank_deficient: true, ..Default::default() }).unwrap();
        let want = ComplexMatrix::from_real_diag(&[0.5, 0.0]);
        assert!(p.sub(&want).frobenius_norm() < 1e-15);
    }

    #[test]
    fn ill_conditioned_uses_svd_path() {
        let a = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 1e-6], vec![0.0, 0.0]]);
        let p = pseudo_inverse(&a).unwrap();
        assert!((p[(1, 1)].re - 1e6).abs() < 1e-6);
        let res = a.matmul(&p).matmul(&a).sub(&a).frobenius_norm();
        assert!(res < 1e-12);
    }

    #[test]
    fn singular_values_sorted() {
        let a = ComplexMatrix::from_real_rows(&[vec![3.0, 0.0], vec![0.0, 4.0], vec![0.0, 0.0]]);
        let s = singular_values(&a).unwrap();
        assert!((s[0] - 4.0).abs() < 1e-14 && (s[1] - 3.0).abs() < 1e-14);
    }
}
