use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{asymptotic_sir_or_inf, build_layout_and_drop, MulticellConfig, MulticellError, SirKind};
use crate::channel::LargeScaleProfile;
use crate::numerics::ComplexMatrix;
use crate::parallel::Executor;
use crate::precoding::{Precoder, PrecoderKind};
use crate::rng::{tag, RngStreamKey, Stream};

const FADING: u64 = tag("multicell/fading");

/// Precoder used by every base station in the finite-`M` simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MulticellPrecoder {
    Mf,
    Zf,
    /// Regularized ZF with `δ = delta_over_m · M` (in units of the estimation noise).
    Rzf { delta_over_m: f64 },
}

impl MulticellPrecoder {
    pub fn label(&self) -> String {
        match self {
            Self::Mf => "MF".into(),
            Self::Zf => "ZF".into(),
            Self::Rzf { delta_over_m } => format!("RZF(delta/M={delta_over_m})"),
        }
    }

    fn kind(&self, m: usize, rho_p: f64) -> PrecoderKind {
        match *self {
            Self::Mf => PrecoderKind::Mf,
            Self::Zf => PrecoderKind::Zf,
            // With noiseless pilots the estimate is in units of √ρ_p, so δ/ρ_p → 0.
            Self::Rzf { .. } if rho_p.is_infinite() => PrecoderKind::Rzf { delta: 0.0 },
            Self::Rzf { delta_over_m } => PrecoderKind::Rzf { delta: delta_over_m * m as f64 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiniteMConfig {
    pub layout: MulticellConfig,
    pub m_values: Vec<usize>,
    pub drops: usize,
    /// Cell-edge pilot SNR in dB; `None` is noiseless pilots.
    pub rho_p_db: Option<f64>,
    /// Cell-edge forward SNR in dB; `None` leaves only interference.
    pub rho_f_db: Option<f64>,
    pub precoders: Vec<MulticellPrecoder>,
}

impl Default for FiniteMConfig {
    fn default() -> Self {
        Self {
            layout: MulticellConfig::default(),
            m_values: vec![10, 20, 50, 100, 200, 500, 1000],
            drops: 100,
            rho_p_db: None,
            rho_f_db: None,
            precoders: vec![MulticellPrecoder::Mf, MulticellPrecoder::Zf, MulticellPrecoder::Rzf { delta_over_m: 0.05 }],
        }
    }
}

impl FiniteMConfig {
    pub fn validate(&self) -> Result<(), MulticellError> {
        let k = self.layout.terminals;
        if let Some(&m) = self.m_values.iter().find(|&&m| m < k) {
            return Err(MulticellError::InvalidParameter(format!("M = {m} is below K = {k}")));
        }
        if self.drops == 0 || self.m_values.is_empty() || self.precoders.is_empty() {
            return Err(MulticellError::InvalidParameter("drops, M list and precoder list must be non-empty".into()));
        }
        for p in &self.precoders {
            if let MulticellPrecoder::Rzf { delta_over_m } = p {
                if !(*delta_over_m >= 0.0 && delta_over_m.is_finite()) {
                    return Err(MulticellError::InvalidParameter(format!("delta/M must be >= 0, got {delta_over_m}")));
                }
            }
        }
        for v in [self.rho_p_db, self.rho_f_db].into_iter().flatten() {
            if !v.is_finite() {
                return Err(MulticellError::InvalidParameter(format!("SNR {v} dB is not finite")));
            }
        }
        Ok(())
    }
}

/// One terminal's SIR in one drop. `m = None` marks the `M → ∞` overlay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirSample {
    pub m: Option<usize>,
    pub technique: String,
    pub drop: usize,
    pub terminal: usize,
    pub sir_db: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SirTable {
    pub samples: Vec<SirSample>,
}

impl SirTable {
    pub fn select<'a>(&'a self, technique: &'a str, m: Option<usize>) -> impl Iterator<Item = &'a SirSample> + 'a {
        self.samples.iter().filter(move |s| s.technique == technique && s.m == m)
    }

    pub fn mean_sir_db(&self, technique: &str, m: Option<usize>) -> Option<f64> {
        mean(self.select(technique, m).map(|s| s.sir_db))
    }

    /// Mean of `log2(1 + SIR)` in bits per channel use.
    pub fn mean_rate(&self, technique: &str, m: Option<usize>) -> Option<f64> {
        mean(self.select(technique, m).map(|s| (1.0 + 10f64.powf(s.sir_db / 10.0)).log2()))
    }

    /// Empirical CDF as sorted `(SIR_dB, P[SIR <= SIR_dB])` pairs.
    pub fn cdf(&self, technique: &str, m: Option<usize>) -> Vec<(f64, f64)> {
        let mut v: Vec<f64> = self.select(technique, m).map(|s| s.sir_db).collect();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        v.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect()
    }
}

fn mean(it: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `M x K` matrix with IID CN entries, column `ℓ` of variance `var[ℓ]`.
fn draw_columns(m: usize, var: &[f64], rng: &mut Stream) -> ComplexMatrix {
    let k = var.len();
    ComplexMatrix::from_col_major(m, k, rng.cn_vec(m * k)).scale_columns(&var.iter().map(|v| v.sqrt()).collect::<Vec<_>>())
}

/// Monte-Carlo SIR of the `K` terminals of cell 0 at finite `M`.
///
/// For each base station `n`, the link `G_0n` to cell 0 is drawn explicitly
/// and the other cells' links are drawn as one aggregate matrix whose column
/// `ℓ` has variance `Σ_{i≠0} β_inℓ`. This has the same joint law as drawing
/// every `G_in` and summing, and is all the estimate and the SIR of cell 0
/// depend on. Every base station precodes with its own contaminated
/// estimate and normalizes power per realization. The SINR of terminal `ℓ`
/// is `|c_0ℓℓ|² / (Σ_{(n,k)≠(0,ℓ)} |c_nℓk|² + K/ρ_f)` with
/// `c_n = G_0nᵀ P_n / √γ_n`, i.e. symbol and noise powers in expectation.
/// The `M → ∞` MF and ZF values for the same drops are appended with `m = None`.
pub fn finite_m_sir_monte_carlo(cfg: &FiniteMConfig, key: RngStreamKey, exec: &Executor) -> Result<SirTable, MulticellError> {
    cfg.validate()?;
    let r_pow = cfg.layout.radius.powf(cfg.layout.exponent);
    let rho_p = cfg.rho_p_db.map_or(f64::INFINITY, |d| 10f64.powf(d / 10.0));
    let rho_f = cfg.rho_f_db.map_or(f64::INFINITY, |d| 10f64.powf(d / 10.0));
    let per_drop = exec.try_map(cfg.drops, |d| {
        let dkey = key.with_trial(d as u64);
        let (_, _, beta) = build_layout_and_drop(&cfg.layout, dkey)?;
        let mut out = Vec::new();
        for (mi, &m) in cfg.m_values.iter().enumerate() {
            let mut rng = dkey.nested(mi as u64).with_purpose(FADING).stream();
            out.extend(one_drop(cfg, &beta, r_pow, m, rho_p, rho_f, d, &mut rng)?);
        }
        let raw_rho_p = rho_p * r_pow;
        let k = beta.terminals();
        for (kind, label) in [(SirKind::Mf, "MF"), (SirKind::Zf, "ZF")] {
            for l in 0..k {
                let s = asymptotic_sir_or_inf(kind, &beta, raw_rho_p, 0, l)?;
                out.push(SirSample { m: None, technique: label.into(), drop: d, terminal: l, sir_db: db(s) });
            }
        }
        for p in &cfg.precoders {
            if let MulticellPrecoder::Rzf { delta_over_m } = p {
                for l in 0..k {
                    let s = super::asymptotic_sir_rzf(&beta, raw_rho_p, *delta_over_m, 0, l)?;
                    out.push(SirSample { m: None, technique: p.label(), drop: d, terminal: l, sir_db: db(s) });
                }
            }
        }
        Ok::<_, MulticellError>(out)
    })?;
    Ok(SirTable { samples: per_drop.into_iter().flatten().collect() })
}

#[allow(clippy::too_many_arguments)]
fn one_drop(
    cfg: &FiniteMConfig,
    beta: &LargeScaleProfile,
    r_pow: f64,
    m: usize,
    rho_p: f64,
    rho_f: f64,
    drop: usize,
    rng: &mut Stream,
) -> Result<Vec<SirSample>, MulticellError> {
    let cells = beta.cells();
    let k = beta.terminals();
    // Gains relative to the cell edge, so the edge SNRs apply directly.
    let b = |i: usize, n: usize, l: usize| beta.beta(i, n, l) * r_pow;
    let mut links = Vec::with_capacity(cells);
    let mut estimates = Vec::with_capacity(cells);
    for n in 0..cells {
        let own: Vec<f64> = (0..k).map(|l| b(0, n, l)).collect();
        let rest: Vec<f64> = (0..k).map(|l| (1..cells).map(|i| b(i, n, l)).sum()).collect();
        let g0 = draw_columns(m, &own, rng);
        let mut est = draw_columns(m, &rest, rng);
        est.axpy(Complex64::new(1.0, 0.0), &g0);
        if rho_p.is_finite() {
            est = est.scale_real(rho_p.sqrt());
            let v = ComplexMatrix::from_col_major(m, k, rng.cn_vec(m * k));
            est.axpy(Complex64::new(1.0, 0.0), &v);
        }
        links.push(g0);
        estimates.push(est);
    }
    let noise = if rho_f.is_finite() { k as f64 / rho_f } else { 0.0 };
    let mut out = Vec::with_capacity(cfg.precoders.len() * k);
    for p in &cfg.precoders {
        let kind = p.kind(m, rho_p);
        let mut total = vec![0.0; k];
        let mut signal = vec![0.0; k];
        for n in 0..cells {
            let pre = Precoder::new(kind, &estimates[n])?;
            let e = pre.effective_gains(&links[n]);
            for l in 0..k {
                for j in 0..k {
                    total[l] += e[(l, j)].norm_sqr();
                }
                if n == 0 {
                    signal[l] = e[(l, l)].norm_sqr();
                }
            }
        }
        for l in 0..k {
            let sir = signal[l] / (total[l] - signal[l] + noise);
            out.push(SirSample { m: Some(m), technique: p.label(), drop, terminal: l, sir_db: db(sir) });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> FiniteMConfig {
        FiniteMConfig {
            layout: MulticellConfig { tiers: 1, terminals: 4, ..Default::default() },
            m_values: vec![8, 64],
            drops: 3,
            ..Default::default()
        }
    }

    #[test]
    fn m_below_k_is_rejected() {
        let cfg = FiniteMConfig { m_values: vec![3], ..small() };
        assert!(matches!(
            finite_m_sir_monte_carlo(&cfg, RngStreamKey::new(1, 0, 0, 0), &Executor::sequential()),
            Err(MulticellError::InvalidParameter(_))
        ));
    }

    #[test]
    fn rzf_without_pilot_noise_equals_zf() {
        let t = finite_m_sir_monte_carlo(&small(), RngStreamKey::new(1, 0, 0, 0), &Executor::sequential()).unwrap();
        let zf: Vec<f64> = t.select("ZF", Some(64)).map(|s| s.sir_db).collect();
        let rzf: Vec<f64> = t.select("RZF(delta/M=0.05)", Some(64)).map(|s| s.sir_db).collect();
        assert_eq!(zf.len(), 12);
        for (a, b) in zf.iter().zip(&rzf) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn cdf_ends_at_one() {
        let t = finite_m_sir_monte_carlo(&small(), RngStreamKey::new(2, 0, 0, 0), &Executor::sequential()).unwrap();
        let c = t.cdf("MF", None);
        assert_eq!(c.len(), 12);
        assert_eq!(c.last().unwrap().1, 1.0);
        assert!(c.windows(2).all(|w| w[0].0 <= w[1].0));
    }
}
