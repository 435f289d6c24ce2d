use serde::{Deserialize, Serialize};

use super::{indices_to_symbols, qpsk_slice, DetectionError, DetectionProblem, DetectorConfig};
use crate::numerics::ComplexMatrix;
use crate::parallel::Executor;
use crate::rng::{tag, RngStreamKey};

const VECTOR: u64 = tag("detection/vector");
pub const GENIE: &str = "IF";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BerConfig {
    pub m: usize,
    pub k: usize,
    /// Total transmit power ρ in dB.
    pub rho_db: Vec<f64>,
    pub detectors: Vec<DetectorConfig>,
    /// Keep drawing vectors until this many symbol errors are counted.
    pub target_errors: u64,
    pub max_vectors: u64,
    pub batch_size: u64,
    /// Batches evaluated between stop-rule checks. Fixed, so results do not
    /// depend on the number of workers.
    pub round_batches: u64,
    pub include_genie: bool,
    /// When set, ρ is scaled as `ρ · m_ref / M` (fixed received SNR per terminal).
    pub rho_reference_m: Option<usize>,
    pub record_timing: bool,
}

impl Default for BerConfig {
    fn default() -> Self {
        Self {
            m: 15,
            k: 15,
            rho_db: vec![0.0, 4.0, 8.0, 12.0],
            detectors: vec![DetectorConfig::Mmse, DetectorConfig::mmse_sic(), DetectorConfig::ts()],
            target_errors: 500,
            max_vectors: 1_000_000,
            batch_size: 32,
            round_batches: 8,
            include_genie: true,
            rho_reference_m: None,
            record_timing: false,
        }
    }
}

impl BerConfig {
    pub fn validate(&self) -> Result<(), DetectionError> {
        let bad = |s: &str| Err(DetectionError::InvalidParameter(s.into()));
        if self.m == 0 || self.k == 0 {
            return bad("M and K must be positive");
        }
        if self.batch_size == 0 || self.round_batches == 0 || self.max_vectors == 0 {
            return bad("batch_size, round_batches and max_vectors must be positive");
        }
        if self.rho_db.iter().any(|r| !r.is_finite()) {
            return bad("rho_db entries must be finite");
        }
        if self.rho_reference_m == Some(0) {
            return bad("rho_reference_m must be positive");
        }
        self.detectors.iter().try_for_each(DetectorConfig::validate)
    }

    /// Effective ρ (dB) at grid point `rho_db`.
    pub fn effective_rho_db(&self, rho_db: f64) -> f64 {
        match self.rho_reference_m {
            Some(r) => rho_db - 10.0 * (self.m as f64 / r as f64).log10(),
            None => rho_db,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub technique: String,
    pub m: usize,
    pub k: usize,
    pub rho_db: f64,
    pub vectors: u64,
    pub symbol_errors: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean estimated flops per vector (per-x plus per-G).
    pub est_flops: f64,
    /// Mean detection wall time per vector; 0 when timing is off.
    pub wall_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BerTable {
    pub points: Vec<BerPoint>,
}

impl BerTable {
    /// `(ρ_dB, BER)` pairs of one technique in grid order.
    pub fn curve(&self, technique: &str) -> Vec<(f64, f64)> {
        self.points.iter().filter(|p| p.technique == technique).map(|p| (p.rho_db, p.ber)).collect()
    }
}

/// 95% Wilson score interval for `errors` out of `n` trials.
pub fn wilson_interval(errors: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let nf = n as f64;
    let ph = errors as f64 / nf;
    let den = 1.0 + z * z / nf;
    let centre = (ph + z * z / (2.0 * nf)) / den;
    let half = z * (ph * (1.0 - ph) / nf + z * z / (4.0 * nf * nf)).sqrt() / den;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Bit error rate of the interference-free genie: QPSK over an `M`-branch
/// maximum-ratio combined Rayleigh channel with per-terminal power `p`,
/// i.e. `E[Q(√(p‖g‖²))]`, `‖g‖² ~ Gamma(M, 1)`.
pub fn genie_ber_closed_form(m: usize, p: f64) -> f64 {
    let gbar = p / 2.0;
    let mu = (gbar / (1.0 + gbar)).sqrt();
    let lo = (1.0 - mu) / 2.0;
    let hi = (1.0 + mu) / 2.0;
    let mut sum = 0.0;
    let mut binom = 1.0; // C(M-1+l, l)
    let mut hi_pow = 1.0;
    for l in 0..m {
        if l > 0 {
            binom *= (m - 1 + l) as f64 / l as f64;
            hi_pow *= hi;
        }
        sum += binom * hi_pow;
    }
    lo.powi(m as i32) * sum
}

/// ρ (dB) at which a BER curve first falls through `target`, interpolating
/// `log10 BER` linearly in dB. `None` if the curve never crosses.
pub fn rho_at_ber(curve: &[(f64, f64)], target: f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let ((r0, b0), (r1, b1)) = (w[0], w[1]);
        if b0 >= target && b1 <= target && b0 > 0.0 {
            if b1 <= 0.0 || b0 == b1 {
                return Some(r1);
            }
            let t = (b0.log10() - target.log10()) / (b0.log10() - b1.log10());
            Some(r0 + t * (r1 - r0))
        } else {
            None
        }
    })
}

#[derive(Default, Clone, Copy)]
struct Tally {
    vectors: u64,
    symbol_errors: u64,
    bit_errors: u64,
    flops: f64,
    wall_ns: u128,
}

impl Tally {
    fn merge(&mut self, o: &Tally) {
        self.vectors += o.vectors;
        self.symbol_errors += o.symbol_errors;
        self.bit_errors += o.bit_errors;
        self.flops += o.flops;
        self.wall_ns += o.wall_ns;
    }
}

/// Symbol and bit errors between index vectors.
fn count_errors(a: &[u8], b: &[u8]) -> (u64, u64) {
    a.iter().zip(b).fold((0, 0), |(s, bits), (x, y)| {
        let d = (x ^ y).count_ones() as u64;
        (s + u64::from(d > 0), bits + d)
    })
}

/// Channel, symbols and receiver noise for vector `v` at grid point `ri`.
/// Every technique sees the same draws.
fn draw_vector(cfg: &BerConfig, key: RngStreamKey, ri: usize, v: u64, rho: f64) -> Result<(DetectionProblem, Vec<u8>, Vec<num_complex::Complex64>), DetectionError> {
    let (m, k) = (cfg.m, cfg.k);
    let mut s = key.with_purpose(VECTOR).with_trial(ri as u64).nested(v).stream();
    let g = ComplexMatrix::from_col_major(m, k, s.cn_vec(m * k));
    let q: Vec<u8> = (0..k).map(|_| u8::from(s.bit()) | (u8::from(s.bit()) << 1)).collect();
    let w = s.cn_vec(m);
    let w_genie = s.cn_vec(k);
    let sp = (rho / k as f64).sqrt();
    let x = g.mat_vec(&indices_to_symbols(&q)).into_iter().zip(w).map(|(a, n)| a * sp + n).collect();
    Ok((DetectionProblem::new(g, x, rho)?, q, w_genie))
}

/// Uncoded BER per technique and ρ, with a fresh channel per vector, until
/// `target_errors` symbol errors (or `max_vectors`).
pub fn ber_experiment(cfg: &BerConfig, key: RngStreamKey, exec: &Executor) -> Result<BerTable, DetectionError> {
    cfg.validate()?;
    let mut techniques: Vec<Option<&DetectorConfig>> = cfg.detectors.iter().map(Some).collect();
    if cfg.include_genie {
        techniques.push(None);
    }
    let mut points = Vec::new();
    for (ri, &rho_db) in cfg.rho_db.iter().enumerate() {
        let rho = 10f64.powf(cfg.effective_rho_db(rho_db) / 10.0);
        for det in &techniques {
            let run_batch = |b: u64| -> Result<Tally, DetectionError> {
                let mut t = Tally::default();
                let lo = b * cfg.batch_size;
                let hi = ((b + 1) * cfg.batch_size).min(cfg.max_vectors);
                for v in lo..hi {
                    let (problem, q, w_genie) = draw_vector(cfg, key, ri, v, rho)?;
                    let (q_hat, flops, wall) = match det {
                        Some(d) => {
                            let r = d.detect(&problem)?;
                            (r.q_hat, r.flops.total(), r.wall_ns as u128)
                        }
                        None => {
                            let sp = problem.p().sqrt();
                            let sym = indices_to_symbols(&q);
                            let qh = (0..cfg.k)
                                .map(|u| {
                                    let gn = problem.g.col(u).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                                    qpsk_slice(sym[u] * (sp * gn) + w_genie[u])
                                })
                                .collect();
                            (qh, (cfg.m * cfg.k) as f64, 0)
                        }
                    };
                    let (se, be) = count_errors(&q, &q_hat);
                    t.merge(&Tally { vectors: 1, symbol_errors: se, bit_errors: be, flops, wall_ns: wall });
                }
                Ok(t)
            };
            let total_batches = cfg.max_vectors.div_ceil(cfg.batch_size);
            let mut tally = Tally::default();
            let mut next = 0u64;
            while next < total_batches && tally.symbol_errors < cfg.target_errors {
                let n = cfg.round_batches.min(total_batches - next);
                let round = exec.try_map(n as usize, |i| run_batch(next + i as u64))?;
                round.iter().for_each(|t| tally.merge(t));
                next += n;
            }
            let bits = tally.vectors * 2 * cfg.k as u64;
            let (lo, hi) = wilson_interval(tally.bit_errors, bits);
            let vf = tally.vectors.max(1) as f64;
            points.push(BerPoint {
                technique: det.map_or(GENIE, |d| d.label()).to_string(),
                m: cfg.m,
                k: cfg.k,
                rho_db,
                vectors: tally.vectors,
                symbol_errors: tally.symbol_errors,
                bit_errors: tally.bit_errors,
                ber: tally.bit_errors as f64 / bits.max(1) as f64,
                ci_low: lo,
                ci_high: hi,
                est_flops: tally.flops / vf,
                wall_ns: if cfg.record_timing { (tally.wall_ns / tally.vectors.max(1) as u128) as u64 } else { 0 },
            });
        }
    }
    Ok(BerTable { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(50, 1000);
        assert!(lo < 0.05 && 0.05 < hi);
        assert_eq!(wilson_interval(0, 10).0, 0.0);
    }

    #[test]
    fn closed_form_single_branch() {
        // M = 1: ½(1 − √(γ/(1+γ))).
        let p: f64 = 3.0;
        let g = p / 2.0;
        assert!((genie_ber_closed_form(1, p) - 0.5 * (1.0 - (g / (1.0 + g)).sqrt())).abs() < 1e-15);
    }

    #[test]
    fn crossing_interpolation() {
        let c = [(0.0, 1e-1), (10.0, 1e-3)];
        assert!((rho_at_ber(&c, 1e-2).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(rho_at_ber(&c, 1e-4), None);
    }

    #[test]
    fn genie_matches_closed_form() {
        let cfg = BerConfig { m: 4, k: 4, rho_db: vec![6.0], detectors: vec![], target_errors: 2000, ..Default::default() };
        let t = ber_experiment(&cfg, RngStreamKey::new(11, 0, 0, 0), &Executor::sequential()).unwrap();
        let p = 10f64.powf(0.6) / 4.0;
        let want = genie_ber_closed_form(4, p);
        let got = t.points[0].ber;
        assert!((got / want - 1.0).abs() < 0.1, "{got} vs {want}");
        assert!(t.points[0].ci_low <= want && want <= t.points[0].ci_high);
    }
}
