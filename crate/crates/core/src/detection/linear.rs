use std::time::Instant;

use super::complexity::{ComplexityParams, Technique};
use super::{qpsk_slice, DetectionError, DetectionProblem, DetectionResult};
use crate::numerics::{Cholesky, ComplexMatrix};

/// `(GᴴG + I/p)⁻¹ Gᴴ / √p`, i.e. the MMSE estimator of `q` from `x` (`K x M`).
pub fn mmse_filter(g: &ComplexMatrix, p: f64) -> Result<ComplexMatrix, DetectionError> {
    let a = g.gram().add_identity(1.0 / p);
    Ok(Cholesky::new(&a)?.solve(&g.adjoint()).scale_real(p.sqrt().recip()))
}

pub fn detect_linear_mmse(problem: &DetectionProblem) -> Result<DetectionResult, DetectionError> {
    let start = Instant::now();
    let w = mmse_filter(&problem.g, problem.p())?;
    let q = w.mat_vec(&problem.x).into_iter().map(qpsk_slice).collect();
    let flops = Technique::Mmse.flops(problem.m(), problem.k(), &ComplexityParams::default())?;
    Ok(DetectionResult::finish(problem, q, 1, flops, start))
}
