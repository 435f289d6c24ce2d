use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::info;
use mimolab::harness::{emit_config, parse_config, run_experiment, write_artifacts, ConfigError, ExperimentConfig, ExperimentKind};
use mimolab::Error;

/// Exit code for malformed command lines. Every library error has its own
/// code, see `Error::exit_code`.
const USAGE_EXIT: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "mimolab", version, about = "Monte-Carlo experiments for very large MIMO arrays")]
struct Cli {
    /// TOML experiment config. Its `experiment` key must match the verb.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master seed; overrides the config file.
    #[arg(long, global = true, env = "MIMOLAB_SEED", value_name = "N")]
    seed: Option<u64>,

    /// Worker threads, 0 for all cores. Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Output directory for the CSV files.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Print the resolved config and exit without running.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Verb {
    /// Ergodic forward-link sum rates (IF, DPC, ZF, MF).
    Capacity,
    /// Monte-Carlo SINR of ZF, MF and IF precoders against their closed forms.
    Precoding,
    /// Pilot-contamination SIR over a hexagonal multicell layout.
    Multicell,
    /// Uplink detector BER sweep.
    Detect,
    /// Field strength around the target point of a scattering environment.
    Focusing,
    /// CDFs of the ordered eigenvalues of the Gram matrix.
    EigenCdf,
    /// Neumann-series inverse accuracy and Gram spectrum edges.
    NeumannBench,
}

impl Verb {
    fn kind(self) -> ExperimentKind {
        match self {
            Verb::Capacity => ExperimentKind::Capacity,
            Verb::Precoding => ExperimentKind::Precoding,
            Verb::Multicell => ExperimentKind::Multicell,
            Verb::Detect => ExperimentKind::Detect,
            Verb::Focusing => ExperimentKind::Focusing,
            Verb::EigenCdf => ExperimentKind::EigenCdf,
            Verb::NeumannBench => ExperimentKind::NeumannBench,
        }
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let kind = cli.verb.kind();
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
            let cfg = parse_config(&text)?;
            if cfg.kind() != kind {
                return Err(ConfigError::RangeViolation {
                    key: "experiment".into(),
                    detail: format!("config is for `{}` but the verb is `{}`", cfg.kind(), kind),
                }
                .into());
            }
            cfg
        }
        None => ExperimentConfig::defaults(kind),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    cfg.params.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = resolve(cli)?;
    if cli.print_config {
        print!("{}", emit_config(&cfg));
        return Ok(());
    }
    let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("."));
    info!("{} seed={} config_sha256={}", cfg.kind(), cfg.seed, cfg.hash());
    let start = Instant::now();
    let artifacts = run_experiment(&cfg)?;
    info!("{} finished in {:.1} s", cfg.kind(), start.elapsed().as_secs_f64());
    std::fs::create_dir_all(&dir)?;
    for path in write_artifacts(&dir, &cfg, &artifacts)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let detail = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[usage]: {detail}");
            eprint!("{}", text.split_once('\n').map_or("", |(_, rest)| rest));
            return ExitCode::from(USAGE_EXIT);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
