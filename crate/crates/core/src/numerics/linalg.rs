//! Cholesky, LU and Householder QR factorizations plus the solves built on them.

use num_complex::Complex64;

use super::matrix::{dot_conj, ComplexMatrix};
use super::NumericsError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Lower-triangular Cholesky factor `L` with `A = L Lᴴ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: ComplexMatrix,
}

impl Cholesky {
    /// Factors a Hermitian positive-definite matrix. Only the lower triangle is read.
    pub fn new(a: &ComplexMatrix) -> Result<Self, NumericsError> {
        if !a.is_square() {
            return Err(NumericsError::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        let n = a.rows();
        let mut l = ComplexMatrix::zeros(n, n);
        let scale = (0..n).map(|i| a[(i, i)].re.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > scale * 1e-15) {
                return Err(NumericsError::NotPositiveDefinite);
            }
            let d = d.sqrt();
            l[(j, j)] = Complex64::new(d, 0.0);
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { l })
    }

    pub fn factor(&self) -> &ComplexMatrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// Solves `A x = b` in place.
    pub fn solve_vec_in_place(&self, b: &mut [Complex64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let l = &self.l;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l[(i, k)] * b[k];
            }
            b[i] = s / l[(i, i)].re;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= l[(k, i)].conj() * b[k];
            }
            b[i] = s / l[(i, i)].re;
        }
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        self.solve_vec_in_place(&mut x);
        x
    }

    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let mut x = b.clone();
        for j in 0..x.cols() {
            self.solve_vec_in_place(x.col_mut(j));
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let inv = self.solve(&ComplexMatrix::identity(self.dim()));
        inv.hermitian_part()
    }

    /// Natural log of the determinant.
    pub fn ln_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| self.l[(i, i)].re.ln()).sum::<f64>()
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn new(a: &ComplexMatrix) -> Result<Self, NumericsError> {
        if !a.is_square() {
            return Err(NumericsError::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= scale * 1e-14 {
                return Err(NumericsError::Singular);
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                lu[(i, k)] /= pivot;
            }
            for j in k + 1..n {
                let ukj = lu[(k, j)];
                if ukj == ZERO {
                    continue;
                }
                for i in k + 1..n {
                    let lik = lu[(i, k)];
                    lu[(i, j)] -= lik * ukj;
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lu[(i, k)] * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.lu[(i, k)] * x[k];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve_vec(b.col(j));
            out.col_mut(j).copy_from_slice(&x);
        }
        out
    }

    pub fn inverse(&self) -> ComplexMatrix {
        self.solve(&ComplexMatrix::identity(self.dim()))
    }

    pub fn det(&self) -> Complex64 {
        let mut d = Complex64::new(self.sign, 0.0);
        for i in 0..self.dim() {
            d *= self.lu[(i, i)];
        }
        d
    }
}

/// Inverse of a general square matrix.
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    Ok(Lu::new(a)?.inverse())
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
pub fn inverse_hpd(a: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    Ok(Cholesky::new(a)?.inverse())
}

/// `log2 det(A)` for Hermitian positive-definite `A`.
pub fn log2_det_hpd(a: &ComplexMatrix) -> Result<f64, NumericsError> {
    Ok(Cholesky::new(a)?.ln_det() / std::f64::consts::LN_2)
}

/// Thin Householder QR of an `m x n` matrix with `m >= n`.
///
/// `R` is upper triangular with a real non-negative diagonal.
#[derive(Debug, Clone)]
pub struct Qr {
    q: ComplexMatrix,
    r: ComplexMatrix,
}

impl Qr {
    pub fn new(a: &ComplexMatrix) -> Result<Self, NumericsError> {
        let (m, n) = a.shape();
        if m < n {
            return Err(NumericsError::DimensionMismatch(format!("QR needs rows >= cols, got {m}x{n}")));
        }
        let mut r = a.clone();
        let mut vs: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        for k in 0..n {
            let x: Vec<Complex64> = (k..m).map(|i| r[(i, k)]).collect();
            let xnorm = x.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
            let mut v = x;
            if xnorm > 0.0 {
                let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { ONE };
                v[0] += phase * xnorm;
                let vnorm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
                for z in &mut v {
                    *z /= vnorm;
                }
                for j in k..n {
                    let col: Vec<Complex64> = (k..m).map(|i| r[(i, j)]).collect();
                    let s = dot_conj(&v, &col);
                    for (t, i) in (k..m).enumerate() {
                        r[(i, j)] -= 2.0 * v[t] * s;
                    }
                }
            } else {
                v.iter_mut().for_each(|z| *z = ZERO);
            }
            vs.push(v);
        }
        // Accumulate thin Q by applying reflectors to the first n columns of I.
        let mut q = ComplexMatrix::from_fn(m, n, |i, j| if i == j { ONE } else { ZERO });
        for k in (0..n).rev() {
            let v = &vs[k];
            for j in 0..n {
                let col: Vec<Complex64> = (k..m).map(|i| q[(i, j)]).collect();
                let s = dot_conj(v, &col);
                for (t, i) in (k..m).enumerate() {
                    q[(i, j)] -= 2.0 * v[t] * s;
                }
            }
        }
        let mut r_thin = ComplexMatrix::from_fn(n, n, |i, j| if i <= j { r[(i, j)] } else { ZERO });
        // Normalize so diag(R) is real and non-negative.
        for i in 0..n {
            let d = r_thin[(i, i)];
            let mag = d.norm();
            if mag > 0.0 {
                let ph = d / mag;
                for j in i..n {
                    r_thin[(i, j)] *= ph.conj();
                }
                for z in q.col_mut(i) {
                    *z *= ph;
                }
            }
        }
        Ok(Self { q, r: r_thin })
    }

    pub fn q(&self) -> &ComplexMatrix {
        &self.q
    }

    pub fn r(&self) -> &ComplexMatrix {
        &self.r
    }
}
