//! Hermitian eigensolver (cyclic Jacobi) and the functions built on it.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::NumericsError;

const HERMITIAN_RTOL: f64 = 1e-10;
const OFF_RTOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `Z = V diag(λ) Vᴴ`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigvals_hermitian(z: &ComplexMatrix) -> Result<Vec<f64>, NumericsError> {
    Ok(jacobi(z, false)?.values)
}

pub fn eigh(z: &ComplexMatrix) -> Result<HermitianEigen, NumericsError> {
    jacobi(z, true)
}

fn check_input(z: &ComplexMatrix) -> Result<(), NumericsError> {
    if !z.is_square() {
        return Err(NumericsError::NotSquare { rows: z.rows(), cols: z.cols() });
    }
    if !z.all_finite() {
        return Err(NumericsError::NonFinite);
    }
    if !z.is_hermitian(HERMITIAN_RTOL) {
        return Err(NumericsError::NotHermitian);
    }
    Ok(())
}

fn off_norm_sqr(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

fn jacobi(z: &ComplexMatrix, want_vectors: bool) -> Result<HermitianEigen, NumericsError> {
    check_input(z)?;
    let n = z.rows();
    let mut a = z.hermitian_part();
    for i in 0..n {
        a[(i, i)].im = 0.0;
    }
    let mut v = if want_vectors { ComplexMatrix::identity(n) } else { ComplexMatrix::zeros(0, 0) };
    let target = (OFF_RTOL * z.frobenius_norm()).powi(2);

    for _sweep in 0..MAX_SWEEPS {
        if off_norm_sqr(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let bmag = b.norm();
                if bmag == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Skip entries negligible against both diagonals.
                if bmag < 1e-18 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let phase = b / bmag;
                let theta = (aqq - app) / (2.0 * bmag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let se = phase * s; // s·e^{iφ}
                let sec = se.conj(); // s·e^{-iφ}
                // A <- A J, columns p and q.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * sec;
                    a[(k, q)] = akp * se + akq * c;
                }
                // A <- Jᴴ A, rows p and q.
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * se;
                    a[(q, k)] = apk * sec + aqk * c;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                if want_vectors {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c - vkq * sec;
                        v[(k, q)] = vkp * se + vkq * c;
                    }
                }
            }
        }
    }
    if off_norm_sqr(&a) > target {
        return Err(NumericsError::NoConvergence);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = if want_vectors { v.submatrix_cols(&order) } else { v };
    Ok(HermitianEigen { values, vectors })
}

/// Applies `f` to the eigenvalues: `V diag(f(λ)) Vᴴ`.
pub fn hermitian_function(z: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix, NumericsError> {
    let e = eigh(z)?;
    let fv: Vec<f64> = e.values.iter().map(|&l| f(l)).collect();
    let vs = e.vectors.scale_columns(&fv);
    Ok(vs.matmul(&e.vectors.adjoint()).hermitian_part())
}

/// Principal square root of a Hermitian PSD matrix. Eigenvalues below
/// `-neg_tol` are rejected; tiny negative ones from rounding are clamped.
pub fn hermitian_sqrt(z: &ComplexMatrix, neg_tol: f64) -> Result<ComplexMatrix, NumericsError> {
    let e = eigh(z)?;
    if let Some(&min) = e.values.first() {
        if min < -neg_tol {
            return Err(NumericsError::NotPositiveSemidefinite { min_eigenvalue: min });
        }
    }
    let fv: Vec<f64> = e.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let vs = e.vectors.scale_columns(&fv);
    Ok(vs.matmul(&e.vectors.adjoint()).hermitian_part())
}

/// Ratio of largest to smallest eigenvalue (infinite if the smallest is not positive).
pub fn condition_number(values: &[f64]) -> f64 {
    match (values.first(), values.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}
