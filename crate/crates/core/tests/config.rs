use mimolab::detection::DetectorConfig;
use mimolab::harness::{
    emit_config, parse_config, ConfigError, DetectParams, ExperimentConfig, ExperimentKind, ExperimentParams, FocusingParams,
};
use mimolab::multicell::MulticellPrecoder;

#[test]
fn minimal_detect_config_gets_figure_defaults() {
    let cfg = parse_config("experiment = \"detect\"\n").unwrap();
    assert_eq!(cfg.seed, 1);
    assert_eq!(cfg.workers, 0);
    let ExperimentParams::Detect(p) = &cfg.params else { panic!("wrong kind") };
    assert_eq!(p.k, 15);
    assert_eq!(p.target_errors, 500);
    assert_eq!(
        p.detectors,
        vec![
            DetectorConfig::Mmse,
            DetectorConfig::MmseSic { n_iter: 6 },
            DetectorConfig::BiGdfe { n_iter: 4, idc: None },
            DetectorConfig::Ts { n_iter: 60, n_tabu: 60 },
            DetectorConfig::Fcsd { r: 8, budget: 1 << 16 },
        ]
    );
}

/// Reference defaults, one row per experiment.
#[test]
fn default_table() {
    let ExperimentParams::Capacity(c) = ExperimentParams::defaults(ExperimentKind::Capacity) else { unreachable!() };
    assert_eq!((c.k, c.m.clone()), (15, vec![15, 40, 100]));
    assert_eq!(c.techniques, ["if", "dpc", "zf", "mf"]);

    let ExperimentParams::Multicell(m) = ExperimentParams::defaults(ExperimentKind::Multicell) else { unreachable!() };
    assert_eq!(m.layout.terminals, 10);
    assert_eq!(m.layout.exponent, 3.8);
    assert_eq!(m.layout.sigma_shadow_db, 8.0);
    assert_eq!(m.layout.tiers, 2);
    assert!(m.layout.wraparound);
    assert_eq!((m.rho_p_db, m.rho_f_db), (None, None));
    assert!(m.precoders.contains(&MulticellPrecoder::Rzf { delta_over_m: 0.05 }));

    let ExperimentParams::Focusing(f) = ExperimentParams::defaults(ExperimentKind::Focusing) else { unreachable!() };
    assert_eq!(f, FocusingParams::default());
    assert_eq!(f.m, [10, 100]);
    assert_eq!((f.half_width, f.step), (5.0, 0.1));
    assert_eq!(f.scatterer.scatterers, 400);
    assert_eq!((f.scatterer.square_side, f.scatterer.standoff, f.scatterer.element_spacing), (800.0, 1600.0, 0.5));

    let ExperimentParams::EigenCdf(e) = ExperimentParams::defaults(ExperimentKind::EigenCdf) else { unreachable!() };
    assert_eq!((e.m.clone(), e.k), (vec![6, 128], 6));

    let ExperimentParams::NeumannBench(n) = ExperimentParams::defaults(ExperimentKind::NeumannBench) else { unreachable!() };
    assert_eq!((n.alpha, n.k, n.spectrum_alpha, n.spectrum_k), (8.0, 50, 4.0, 200));
    assert!(n.terms.contains(&4));
}

#[test]
fn emit_then_parse_is_identity() {
    for kind in ExperimentKind::ALL {
        let mut cfg = ExperimentConfig::defaults(kind);
        cfg.seed = u64::MAX - 3;
        cfg.workers = 3;
        cfg.output = Some("out/dir".into());
        assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg, "{kind}");
    }
    let mut p = DetectParams { rho_reference_m: None, rho_db: vec![0.5, 7.25], ..Default::default() };
    p.detectors = vec![DetectorConfig::BiGdfe { n_iter: 3, idc: Some(vec![0.2, 0.6, 1.0]) }, DetectorConfig::Ml, DetectorConfig::las()];
    p.k = 8;
    p.m = vec![8, 9];
    let cfg = ExperimentConfig::new(ExperimentParams::Detect(p));
    assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg);
}

#[test]
fn unknown_keys_are_named() {
    let e = parse_config("experiment = \"focusing\"\n[focusing]\nstep = 0.2\ngrid_size = 3\n").unwrap_err();
    assert_eq!(e, ConfigError::UnknownKey("focusing.grid_size".into()));
    let e = parse_config("experiment = \"focusing\"\nsede = 3\n").unwrap_err();
    assert_eq!(e, ConfigError::UnknownKey("sede".into()));
    let e = parse_config("experiment = \"focusing\"\n[detect]\nk = 3\n").unwrap_err();
    assert_eq!(e, ConfigError::UnknownKey("detect".into()));
}

#[test]
fn error_kinds() {
    assert_eq!(parse_config("seed = 3\n").unwrap_err(), ConfigError::MissingKey("experiment".into()));
    assert!(matches!(
        parse_config("experiment = \"detect\"\n[detect]\nk = \"fifteen\"\n").unwrap_err(),
        ConfigError::TypeMismatch { key, .. } if key == "detect.k"
    ));
    assert!(matches!(
        parse_config("experiment = \"detect\"\n[detect]\nk = 20\nm = [10]\n").unwrap_err(),
        ConfigError::RangeViolation { key, .. } if key == "detect.m"
    ));
    assert!(matches!(
        parse_config("experiment = \"capacity\"\n[capacity]\ntechniques = [\"vp\"]\n").unwrap_err(),
        ConfigError::RangeViolation { key, .. } if key == "capacity.techniques"
    ));
    assert!(matches!(parse_config("experiment = \"nope\"\n").unwrap_err(), ConfigError::RangeViolation { .. }));
    assert!(matches!(parse_config("experiment = \n").unwrap_err(), ConfigError::Syntax(_)));
}

#[test]
fn hash_ignores_workers_and_output() {
    let a = ExperimentConfig::defaults(ExperimentKind::EigenCdf);
    let b = ExperimentConfig { workers: 8, output: Some("x".into()), ..a.clone() };
    assert_eq!(a.hash(), b.hash());
    let c = ExperimentConfig { seed: 2, ..a.clone() };
    assert_ne!(a.hash(), c.hash());
}

#[test]
fn kebab_case_names_parse() {
    assert_eq!("eigen-cdf".parse::<ExperimentKind>().unwrap(), ExperimentKind::EigenCdf);
    assert_eq!("neumann_bench".parse::<ExperimentKind>().unwrap(), ExperimentKind::NeumannBench);
}
