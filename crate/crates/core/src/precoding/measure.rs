use serde::{Deserialize, Serialize};

use super::{Precoder, PrecoderKind, PrecodingError};
use crate::channel::{gen_iid_rayleigh, imperfect_csi, ChannelRealization};
use crate::parallel::Executor;
use crate::rng::{tag, RngStreamKey};

const CHANNEL: u64 = tag("precoding/channel");
const CSI_ERROR: u64 = tag("precoding/csi-error");

/// What the measurement transmits with: a real precoder, or the
/// interference-free benchmark (each terminal alone with its full array gain).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SinrTechnique {
    If,
    Precoder(PrecoderKind),
}

impl SinrTechnique {
    pub fn label(&self) -> String {
        match self {
            SinrTechnique::If => "IF".into(),
            SinrTechnique::Precoder(p) => p.label(),
        }
    }
}

/// Monte-Carlo SINR summary over `trials` channel draws and `K` terminals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrStats {
    pub trials: usize,
    pub k: usize,
    /// Average useful power per terminal.
    pub mean_signal: f64,
    /// Average interference-plus-noise power per terminal.
    pub mean_interference_noise: f64,
    /// `mean_signal / mean_interference_noise`.
    pub sinr: f64,
    /// Mean and variance of the per-draw, per-terminal SINR.
    pub mean_inst_sinr: f64,
    pub var_inst_sinr: f64,
    /// Mean and variance of `Σ_k log2(1 + SINR_k)` per draw.
    pub mean_sum_rate: f64,
    pub var_sum_rate: f64,
    /// Mean of `‖P‖²_F`; equals `Tr((GᵀG*)⁻¹)` for ZF.
    pub mean_precoder_norm: f64,
}

impl SinrStats {
    pub fn sinr_db(&self) -> f64 {
        10.0 * self.sinr.log10()
    }
}

struct TrialOut {
    signal: Vec<f64>,
    interference_noise: Vec<f64>,
    precoder_norm: f64,
}

/// Measures forward-link SINR for `technique` on IID channels. Imperfect
/// CSI (`xi < 1`) corrupts only what the precoder sees; the signal travels
/// through the true channel.
#[allow(clippy::too_many_arguments)]
pub fn measure_forward_sinr(
    technique: SinrTechnique,
    m: usize,
    k: usize,
    rho_f: f64,
    xi: Option<f64>,
    trials: usize,
    key: RngStreamKey,
    exec: &Executor,
) -> Result<SinrStats, PrecodingError> {
    if trials < 100 {
        return Err(PrecodingError::InvalidParameter(format!("need at least 100 trials, got {trials}")));
    }
    if m == 0 || k == 0 {
        return Err(PrecodingError::InvalidParameter("M and K must be positive".into()));
    }
    if !(rho_f >= 0.0 && rho_f.is_finite()) {
        return Err(PrecodingError::InvalidParameter(format!("rho_f must be finite and >= 0, got {rho_f}")));
    }
    if let Some(x) = xi {
        if !(0.0..=1.0).contains(&x) {
            return Err(PrecodingError::InvalidParameter(format!("xi must be in [0, 1], got {x}")));
        }
    }
    let p_user = rho_f / k as f64;
    let outs = exec.try_map(trials, |t| -> Result<TrialOut, PrecodingError> {
        let tkey = key.with_trial(t as u64);
        let g: ChannelRealization = gen_iid_rayleigh(m, k, &mut tkey.with_purpose(CHANNEL).stream());
        match technique {
            SinrTechnique::If => {
                let signal = (0..k).map(|j| p_user * crate::numerics::norm_sqr(g.g.col(j))).collect();
                Ok(TrialOut { signal, interference_noise: vec![1.0; k], precoder_norm: 0.0 })
            }
            SinrTechnique::Precoder(kind) => {
                let seen = match xi {
                    Some(x) if x < 1.0 => imperfect_csi(&g, x, &mut tkey.with_purpose(CSI_ERROR).stream())
                        .map_err(|e| PrecodingError::InvalidParameter(e.to_string()))?,
                    _ => g.clone(),
                };
                let p = Precoder::new(kind, &seen.g)?;
                let e = p.effective_gains(&g.g);
                let mut signal = Vec::with_capacity(k);
                let mut inoise = Vec::with_capacity(k);
                for row in 0..k {
                    let mut interf = 0.0;
                    for col in 0..k {
                        if col != row {
                            interf += e[(row, col)].norm_sqr();
                        }
                    }
                    signal.push(p_user * e[(row, row)].norm_sqr());
                    inoise.push(p_user * interf + 1.0);
                }
                Ok(TrialOut { signal, interference_noise: inoise, precoder_norm: p.gamma * k as f64 })
            }
        }
    })?;

    let n = (trials * k) as f64;
    let mut sig = 0.0;
    let mut inn = 0.0;
    let mut inst = Vec::with_capacity(trials * k);
    let mut rates = Vec::with_capacity(trials);
    let mut pnorm = 0.0;
    for o in &outs {
        let mut rate = 0.0;
        for (s, i) in o.signal.iter().zip(&o.interference_noise) {
            sig += s;
            inn += i;
            let x = s / i;
            inst.push(x);
            rate += (1.0 + x).log2();
        }
        rates.push(rate);
        pnorm += o.precoder_norm;
    }
    let (mean_inst, var_inst) = mean_var(&inst);
    let (mean_rate, var_rate) = mean_var(&rates);
    Ok(SinrStats {
        trials,
        k,
        mean_signal: sig / n,
        mean_interference_noise: inn / n,
        sinr: sig / inn,
        mean_inst_sinr: mean_inst,
        var_inst_sinr: var_inst,
        mean_sum_rate: mean_rate,
        var_sum_rate: var_rate,
        mean_precoder_norm: pnorm / trials as f64,
    })
}

pub(crate) fn mean_var(x: &[f64]) -> (f64, f64) {
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = if x.len() > 1 { x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var)
}
