use super::config::{ExperimentConfig, ExperimentKind};
use super::output::{fmt_f64, Artifact};
use super::params::{CapacityParams, DetectParams, EigenCdfParams, ExperimentParams, FocusingParams, NeumannBenchParams, PrecodingParams};
use crate::capacity::{forward_sum_capacity, large_system_sinr, Csi, LimitTechnique};
use crate::channel::{gen_iid_rayleigh, normalized_field_strength, GainEvaluator, ScattererField};
use crate::detection::{ber_experiment, BerConfig, BerTable};
use crate::error::Error;
use crate::multicell::{finite_m_sir_monte_carlo, FiniteMConfig, SirTable};
use crate::numerics::{eigvals_hermitian, inverse_hpd, neumann_inverse, ComplexMatrix, NeumannConfig, NeumannWeighting};
use crate::parallel::Executor;
use crate::precoding::{measure_forward_sinr, PrecoderKind, SinrTechnique};
use crate::rng::{tag, RngStreamKey};

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn s<T: ToString>(x: T) -> String {
    x.to_string()
}

fn root_key(kind: ExperimentKind, seed: u64) -> RngStreamKey {
    RngStreamKey::new(seed, kind.stream_id(), 0, 0)
}

/// Runs the configured experiment with `cfg.workers` workers.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, Error> {
    run_experiment_with(cfg, &Executor::new(cfg.workers))
}

pub fn run_experiment_with(cfg: &ExperimentConfig, exec: &Executor) -> Result<Vec<Artifact>, Error> {
    cfg.params.validate()?;
    let seed = cfg.seed;
    match &cfg.params {
        ExperimentParams::Capacity(p) => capacity_experiment(p, seed, exec).map(|a| vec![a]),
        ExperimentParams::Precoding(p) => precoding_experiment(p, seed, exec).map(|a| vec![a]),
        ExperimentParams::Multicell(p) => Ok(multicell_artifacts(&multicell_experiment(p, seed, exec)?)),
        ExperimentParams::Detect(p) => Ok(vec![detect_artifact(&detect_experiment(p, seed, exec)?)]),
        ExperimentParams::Focusing(p) => Ok(focusing_experiment(p, seed, exec)?.artifacts()),
        ExperimentParams::EigenCdf(p) => Ok(eigen_cdf_experiment(p, seed, exec)?.artifacts()),
        ExperimentParams::NeumannBench(p) => neumann_bench(p, seed, exec),
    }
}

/// Ergodic forward sum rates: IF, DPC, ZF and MF.
pub fn capacity_experiment(p: &CapacityParams, seed: u64, exec: &Executor) -> Result<Artifact, Error> {
    let mut a = Artifact::new("sum_rates", &["M", "K", "rho_f_dB", "technique", "mean_sum_rate", "std_err"]);
    let root = root_key(ExperimentKind::Capacity, seed);
    for &m in &p.m {
        let key = root.nested(m as u64);
        for &rdb in &p.rho_f_db {
            let rho = 10f64.powf(rdb / 10.0);
            for t in &p.techniques {
                let (label, mean, se) = match t.as_str() {
                    "dpc" => {
                        let rates = exec.try_map(p.trials, |i| -> Result<f64, Error> {
                            let g = gen_iid_rayleigh(m, p.k, &mut key.with_trial(i as u64).with_purpose(tag("capacity/dpc")).stream());
                            Ok(forward_sum_capacity(&g.g, rho)?.value)
                        })?;
                        let n = rates.len() as f64;
                        let mean = rates.iter().sum::<f64>() / n;
                        let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
                        ("DPC".to_string(), mean, (var / n).sqrt())
                    }
                    other => {
                        let tech = match other {
                            "if" => SinrTechnique::If,
                            "zf" => SinrTechnique::Precoder(PrecoderKind::Zf),
                            _ => SinrTechnique::Precoder(PrecoderKind::Mf),
                        };
                        let st = measure_forward_sinr(tech, m, p.k, rho, None, p.trials, key, exec)?;
                        (tech.label(), st.mean_sum_rate, (st.var_sum_rate / p.trials as f64).sqrt())
                    }
                };
                a.push(vec![s(m), s(p.k), fmt_f64(rdb), label, fmt_f64(mean), fmt_f64(se)]);
            }
        }
    }
    Ok(a)
}

/// Measured forward SINR against the large-system closed forms.
pub fn precoding_experiment(p: &PrecodingParams, seed: u64, exec: &Executor) -> Result<Artifact, Error> {
    let mut a = Artifact::new(
        "sinr",
        &["technique", "M", "K", "alpha", "rho_f_dB", "xi", "measured_dB", "closed_form_dB", "diff_dB"],
    );
    let root = root_key(ExperimentKind::Precoding, seed);
    for &alpha in &p.alpha {
        let m = (alpha * p.k as f64).round() as usize;
        let key = root.nested(m as u64);
        for &rdb in &p.rho_f_db {
            let rho = 10f64.powf(rdb / 10.0);
            for &xi in &p.xi {
                let xi_opt = (xi < 1.0).then_some(xi);
                let csi = xi_opt.map_or(Csi::Perfect, Csi::Imperfect);
                for t in &p.techniques {
                    let (tech, table) = match t.as_str() {
                        "if" => (SinrTechnique::If, LimitTechnique::If),
                        "zf" => (SinrTechnique::Precoder(PrecoderKind::Zf), LimitTechnique::Zf),
                        _ => (SinrTechnique::Precoder(PrecoderKind::Mf), LimitTechnique::Mf),
                    };
                    let measured = measure_forward_sinr(tech, m, p.k, rho, xi_opt, p.trials, key, exec)?.sinr_db();
                    let closed = db(large_system_sinr(table, m as f64 / p.k as f64, rho, csi)?);
                    a.push(vec![
                        tech.label(),
                        s(m),
                        s(p.k),
                        fmt_f64(alpha),
                        fmt_f64(rdb),
                        fmt_f64(xi),
                        fmt_f64(measured),
                        fmt_f64(closed),
                        fmt_f64(measured - closed),
                    ]);
                }
            }
        }
    }
    Ok(a)
}

pub fn multicell_experiment(p: &FiniteMConfig, seed: u64, exec: &Executor) -> Result<SirTable, Error> {
    Ok(finite_m_sir_monte_carlo(p, root_key(ExperimentKind::Multicell, seed), exec)?)
}

fn fmt_m(m: Option<usize>) -> String {
    m.map_or_else(|| "inf".to_string(), |m| m.to_string())
}

/// Per-terminal SIR samples, their empirical CDFs, and per-curve means.
pub fn multicell_artifacts(t: &SirTable) -> Vec<Artifact> {
    let mut samples = Artifact::new("sir", &["M", "technique", "drop_id", "terminal", "SIR_dB"]);
    let mut groups: Vec<(String, Option<usize>)> = Vec::new();
    for x in &t.samples {
        samples.push(vec![fmt_m(x.m), x.technique.clone(), s(x.drop), s(x.terminal), fmt_f64(x.sir_db)]);
        if !groups.iter().any(|(tech, m)| *tech == x.technique && *m == x.m) {
            groups.push((x.technique.clone(), x.m));
        }
    }
    let mut cdf = Artifact::new("cdf", &["technique", "M", "SIR_dB", "empirical_probability"]);
    let mut mean = Artifact::new("mean", &["technique", "M", "mean_SIR_dB", "mean_rate"]);
    for (tech, m) in &groups {
        for (x, pr) in t.cdf(tech, *m) {
            cdf.push(vec![tech.clone(), fmt_m(*m), fmt_f64(x), fmt_f64(pr)]);
        }
        mean.push(vec![
            tech.clone(),
            fmt_m(*m),
            fmt_f64(t.mean_sir_db(tech, *m).unwrap_or(f64::NAN)),
            fmt_f64(t.mean_rate(tech, *m).unwrap_or(f64::NAN)),
        ]);
    }
    vec![samples, cdf, mean]
}

/// One BER table per configured `M`, sharing `K` and the ρ grid.
pub fn detect_experiment(p: &DetectParams, seed: u64, exec: &Executor) -> Result<Vec<(BerConfig, BerTable)>, Error> {
    let root = root_key(ExperimentKind::Detect, seed);
    p.m.iter()
        .map(|&m| {
            let cfg = BerConfig {
                m,
                k: p.k,
                rho_db: p.rho_db.clone(),
                detectors: p.detectors.clone(),
                target_errors: p.target_errors,
                max_vectors: p.max_vectors,
                batch_size: p.batch_size,
                round_batches: p.round_batches,
                include_genie: p.include_genie,
                rho_reference_m: p.rho_reference_m,
                record_timing: p.record_timing,
            };
            let t = ber_experiment(&cfg, root.nested(m as u64), exec)?;
            Ok((cfg, t))
        })
        .collect()
}

/// `rho_dB` is the transmit power actually used, after any `1/M` scaling.
pub fn detect_artifact(tables: &[(BerConfig, BerTable)]) -> Artifact {
    let mut a = Artifact::new(
        "ber",
        &["technique", "M", "K", "rho_dB", "vectors", "symbol_errors", "BER", "CI_low", "CI_high", "est_flops", "wall_ns"],
    );
    for (cfg, t) in tables {
        for p in &t.points {
            a.push(vec![
                p.technique.clone(),
                s(p.m),
                s(p.k),
                fmt_f64(cfg.effective_rho_db(p.rho_db)),
                s(p.vectors),
                s(p.symbol_errors),
                fmt_f64(p.ber),
                fmt_f64(p.ci_low),
                fmt_f64(p.ci_high),
                fmt_f64(p.est_flops),
                s(p.wall_ns),
            ]);
        }
    }
    a
}

/// Normalized field strength (dB) on a square grid centred on the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct FocusGrid {
    pub m: usize,
    /// Grid coordinates along each axis, wavelengths; the middle one is 0.
    pub coords: Vec<f64>,
    /// Row-major by `y`, then `x`.
    pub field_db: Vec<f64>,
}

impl FocusGrid {
    pub fn side(&self) -> usize {
        self.coords.len()
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.field_db[iy * self.side() + ix]
    }

    pub fn center_db(&self) -> f64 {
        let c = self.side() / 2;
        self.at(c, c)
    }

    pub fn fraction_at_or_below(&self, threshold_db: f64) -> f64 {
        self.field_db.iter().filter(|&&v| v <= threshold_db).count() as f64 / self.field_db.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocusingResult {
    pub threshold_db: f64,
    pub grids: Vec<FocusGrid>,
}

impl FocusingResult {
    pub fn artifacts(&self) -> Vec<Artifact> {
        let mut grid = Artifact::new("grid", &["M", "x_lambda", "y_lambda", "field_dB"]);
        let mut summary = Artifact::new("summary", &["M", "center_dB", "threshold_dB", "fraction_at_or_below"]);
        for g in &self.grids {
            for (iy, &y) in g.coords.iter().enumerate() {
                for (ix, &x) in g.coords.iter().enumerate() {
                    grid.push(vec![s(g.m), fmt_f64(x), fmt_f64(y), fmt_f64(g.at(ix, iy))]);
                }
            }
            summary.push(vec![
                s(g.m),
                fmt_f64(g.center_db()),
                fmt_f64(self.threshold_db),
                fmt_f64(g.fraction_at_or_below(self.threshold_db)),
            ]);
        }
        vec![grid, summary]
    }
}

/// Matched-filter focusing on the receiver at the centre of the scatterer
/// square. Every array size sees the same scatterers and reflections.
pub fn focusing_experiment(p: &FocusingParams, seed: u64, exec: &Executor) -> Result<FocusingResult, Error> {
    let key = root_key(ExperimentKind::Focusing, seed).with_purpose(tag("focusing/field"));
    let half = (p.half_width / p.step).round() as usize;
    let n = 2 * half + 1;
    let coords: Vec<f64> = (0..n).map(|i| (i as f64 - half as f64) * p.step).collect();
    let mut grids = Vec::with_capacity(p.m.len());
    for &m in &p.m {
        let field = ScattererField::generate(&p.scatterer, m, &mut key.stream())?;
        let ev = GainEvaluator::new(&field)?;
        let focus = ev.gains([0.0, 0.0])?;
        let rows = exec.try_map(n, |iy| -> Result<Vec<f64>, Error> {
            coords
                .iter()
                .map(|&x| Ok(db(normalized_field_strength(&ev.gains([x, coords[iy]])?, &focus))))
                .collect()
        })?;
        grids.push(FocusGrid { m, coords: coords.clone(), field_db: rows.concat() });
    }
    Ok(FocusingResult { threshold_db: p.threshold_db, grids })
}

/// Ascending eigenvalues of `GᴴG` for every draw of one `M x K` shape.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSet {
    pub m: usize,
    pub k: usize,
    pub draws: Vec<Vec<f64>>,
}

impl EigenSet {
    /// Median over draws of `λ_max / λ_min`, in dB.
    pub fn median_spread_db(&self) -> f64 {
        let mut r: Vec<f64> = self.draws.iter().map(|v| db(v[v.len() - 1] / v[0])).collect();
        r.sort_by(f64::total_cmp);
        let n = r.len();
        if n % 2 == 1 {
            r[n / 2]
        } else {
            (r[n / 2 - 1] + r[n / 2]) / 2.0
        }
    }

    /// Mean of `Σλ / K`; its expectation is `M`.
    pub fn mean_trace_per_k(&self) -> f64 {
        self.draws.iter().map(|v| v.iter().sum::<f64>() / self.k as f64).sum::<f64>() / self.draws.len() as f64
    }

    /// Sorted values of the `rank`-th smallest eigenvalue (0-based) with CDF levels.
    pub fn rank_cdf(&self, rank: usize) -> Vec<(f64, f64)> {
        let mut v: Vec<f64> = self.draws.iter().map(|d| d[rank]).collect();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        v.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenCdfResult {
    pub sets: Vec<EigenSet>,
}

impl EigenCdfResult {
    pub fn get(&self, m: usize) -> Option<&EigenSet> {
        self.sets.iter().find(|s| s.m == m)
    }

    /// `rank` 1 is the smallest eigenvalue. Values are not normalized by `M`.
    pub fn artifacts(&self) -> Vec<Artifact> {
        let mut cdf = Artifact::new("cdf", &["M", "K", "rank", "eigenvalue_dB", "probability"]);
        let mut summary = Artifact::new("summary", &["M", "K", "draws", "median_spread_dB", "mean_trace_per_K"]);
        for set in &self.sets {
            for r in 0..set.k {
                for (x, pr) in set.rank_cdf(r) {
                    cdf.push(vec![s(set.m), s(set.k), s(r + 1), fmt_f64(db(x)), fmt_f64(pr)]);
                }
            }
            summary.push(vec![
                s(set.m),
                s(set.k),
                s(set.draws.len()),
                fmt_f64(set.median_spread_db()),
                fmt_f64(set.mean_trace_per_k()),
            ]);
        }
        vec![cdf, summary]
    }
}

pub fn eigen_cdf_experiment(p: &EigenCdfParams, seed: u64, exec: &Executor) -> Result<EigenCdfResult, Error> {
    let root = root_key(ExperimentKind::EigenCdf, seed).with_purpose(tag("eigen_cdf/channel"));
    let sets = p
        .m
        .iter()
        .map(|&m| {
            let key = root.nested(m as u64);
            let draws = exec.try_map(p.draws, |d| -> Result<Vec<f64>, Error> {
                let g = gen_iid_rayleigh(m, p.k, &mut key.with_trial(d as u64).stream());
                Ok(eigvals_hermitian(&g.g.gram())?)
            })?;
            Ok(EigenSet { m, k: p.k, draws })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(EigenCdfResult { sets })
}

/// Relative Frobenius error of the truncated Neumann inverse per term count,
/// and the extreme eigenvalues of `GᴴG/M` against the Marchenko–Pastur edges.
pub fn neumann_bench(p: &NeumannBenchParams, seed: u64, exec: &Executor) -> Result<Vec<Artifact>, Error> {
    let root = root_key(ExperimentKind::NeumannBench, seed);
    let m = (p.alpha * p.k as f64).round() as usize;
    let ncfg = |terms: usize| {
        let mut c = NeumannConfig::for_alpha(terms, p.alpha);
        if let Some(d) = p.delta {
            c.delta = d;
        }
        if p.weighting == "trace" {
            c.weighting = NeumannWeighting::TraceNormalized(p.k as f64);
        }
        c
    };
    let key = root.with_purpose(tag("neumann/channel"));
    let errs = exec.try_map(p.draws, |d| -> Result<Vec<f64>, Error> {
        let g = gen_iid_rayleigh(m, p.k, &mut key.with_trial(d as u64).stream());
        let z = g.g.gram();
        let exact = inverse_hpd(&z)?;
        let norm = exact.frobenius_norm();
        p.terms
            .iter()
            .map(|&l| Ok(neumann_inverse(&z, &ncfg(l), m, p.k)?.sub(&exact).frobenius_norm() / norm))
            .collect()
    })?;
    let mut acc = Artifact::new("accuracy", &["M", "K", "L", "delta", "weighting", "mean_rel_error", "max_rel_error"]);
    for (li, &l) in p.terms.iter().enumerate() {
        let col: Vec<f64> = errs.iter().map(|e| e[li]).collect();
        acc.push(vec![
            s(m),
            s(p.k),
            s(l),
            fmt_f64(ncfg(l).delta),
            p.weighting.clone(),
            fmt_f64(col.iter().sum::<f64>() / col.len() as f64),
            fmt_f64(col.iter().copied().fold(0.0, f64::max)),
        ]);
    }
    let spectrum = marchenko_pastur_check(p.spectrum_k, p.spectrum_alpha, p.spectrum_draws, root.with_purpose(tag("neumann/spectrum")), exec)?;
    let mut sp = Artifact::new("spectrum", &["M", "K", "draw", "lambda_min", "lambda_max", "mp_min", "mp_max"]);
    let ms = (p.spectrum_alpha * p.spectrum_k as f64).round() as usize;
    let (lo, hi) = marchenko_pastur_edges(p.spectrum_alpha);
    for (d, (a, b)) in spectrum.iter().enumerate() {
        sp.push(vec![s(ms), s(p.spectrum_k), s(d), fmt_f64(*a), fmt_f64(*b), fmt_f64(lo), fmt_f64(hi)]);
    }
    Ok(vec![acc, sp])
}

/// Support edges `(1 ∓ 1/√α)²` of the limiting spectrum of `GᴴG/M`.
pub fn marchenko_pastur_edges(alpha: f64) -> (f64, f64) {
    let r = alpha.sqrt().recip();
    ((1.0 - r).powi(2), (1.0 + r).powi(2))
}

/// `(λ_min, λ_max)` of `GᴴG/M` per draw, `M = αK`.
pub fn marchenko_pastur_check(k: usize, alpha: f64, draws: usize, key: RngStreamKey, exec: &Executor) -> Result<Vec<(f64, f64)>, Error> {
    let m = (alpha * k as f64).round() as usize;
    exec.try_map(draws, |d| -> Result<(f64, f64), Error> {
        let g = gen_iid_rayleigh(m, k, &mut key.with_trial(d as u64).stream());
        let z: ComplexMatrix = g.g.gram().scale_real(1.0 / m as f64);
        let ev = eigvals_hermitian(&z)?;
        Ok((ev[0], ev[k - 1]))
    })
}
