//! Worker-count invariance and seed reproducibility of every experiment.

use mimolab::harness::{
    run_experiment_with, write_artifacts, CapacityParams, DetectParams, EigenCdfParams, ExperimentConfig, ExperimentParams,
    FocusingParams, NeumannBenchParams, PrecodingParams,
};
use mimolab::detection::DetectorConfig;
use mimolab::multicell::FiniteMConfig;
use mimolab::parallel::Executor;

fn small_configs() -> Vec<ExperimentConfig> {
    let params = vec![
        ExperimentParams::Capacity(CapacityParams { k: 4, m: vec![4, 8], rho_f_db: vec![0.0, 10.0], trials: 100, ..Default::default() }),
        ExperimentParams::Precoding(PrecodingParams { k: 4, alpha: vec![2.0], rho_f_db: vec![10.0], trials: 100, ..Default::default() }),
        ExperimentParams::Multicell(FiniteMConfig { m_values: vec![10, 20], drops: 3, ..Default::default() }),
        ExperimentParams::Detect(DetectParams {
            k: 4,
            m: vec![4, 6],
            rho_db: vec![4.0, 8.0],
            detectors: vec![DetectorConfig::Mmse, DetectorConfig::ts(), DetectorConfig::Fcsd { r: 2, budget: 1 << 16 }],
            target_errors: 30,
            max_vectors: 2000,
            record_timing: false,
            ..Default::default()
        }),
        ExperimentParams::Focusing(FocusingParams { m: vec![4, 8], half_width: 1.0, step: 0.25, ..Default::default() }),
        ExperimentParams::EigenCdf(EigenCdfParams { m: vec![3, 12], k: 3, draws: 40 }),
        ExperimentParams::NeumannBench(NeumannBenchParams { k: 6, terms: vec![1, 4], draws: 5, spectrum_k: 10, spectrum_draws: 2, ..Default::default() }),
    ];
    params.into_iter().map(|p| ExperimentConfig { seed: 42, ..ExperimentConfig::new(p) }).collect()
}

#[test]
fn worker_count_does_not_change_results() {
    for cfg in small_configs() {
        let one = run_experiment_with(&cfg, &Executor::new(1)).unwrap();
        let many = run_experiment_with(&cfg, &Executor::new(4)).unwrap();
        assert_eq!(one, many, "{}", cfg.kind());
    }
}

#[test]
fn written_files_are_byte_identical_across_workers() {
    let cfg = small_configs().remove(3);
    let d1 = tempfile::tempdir().unwrap();
    let d8 = tempfile::tempdir().unwrap();
    let p1 = write_artifacts(d1.path(), &cfg, &run_experiment_with(&cfg, &Executor::new(1)).unwrap()).unwrap();
    let p8 = write_artifacts(d8.path(), &ExperimentConfig { workers: 8, ..cfg.clone() }, &run_experiment_with(&cfg, &Executor::new(8)).unwrap()).unwrap();
    for (a, b) in p1.iter().zip(&p8) {
        let (ta, tb) = (std::fs::read_to_string(a).unwrap(), std::fs::read_to_string(b).unwrap());
        assert_eq!(ta, tb);
        assert!(ta.starts_with("# mimolab "));
        assert!(ta.contains(&format!("config_sha256={}", cfg.hash())));
        assert_eq!(ta.lines().nth(1).unwrap(), "technique,M,K,rho_dB,vectors,symbol_errors,BER,CI_low,CI_high,est_flops,wall_ns");
    }
}

#[test]
fn seed_changes_results() {
    let cfg = small_configs().remove(5);
    let other = ExperimentConfig { seed: 43, ..cfg.clone() };
    let ex = Executor::sequential();
    assert_ne!(run_experiment_with(&cfg, &ex).unwrap(), run_experiment_with(&other, &ex).unwrap());
    assert_eq!(run_experiment_with(&cfg, &ex).unwrap(), run_experiment_with(&cfg, &ex).unwrap());
}

#[test]
fn multicell_run_emits_cdf_file() {
    let cfg = small_configs().remove(2);
    let arts = run_experiment_with(&cfg, &Executor::sequential()).unwrap();
    let cdf = arts.iter().find(|a| a.name == "cdf").unwrap();
    assert_eq!(cdf.header, ["technique", "M", "SIR_dB", "empirical_probability"]);
    let sir = arts.iter().find(|a| a.name == "sir").unwrap();
    assert_eq!(sir.header, ["M", "technique", "drop_id", "terminal", "SIR_dB"]);
    assert!(cdf.rows.iter().any(|r| r[1] == "inf"));
}
