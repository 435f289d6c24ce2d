use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mimolab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mimolab"))
        .args(args)
        .current_dir(dir)
        .env_remove("MIMOLAB_SEED")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_EIGEN: &str = "experiment = \"eigen_cdf\"\nseed = 3\n\n[eigen_cdf]\nm = [6, 12]\nk = 4\ndraws = 50\n";

#[test]
fn run_writes_csv_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), SMALL_EIGEN).unwrap();
    let out = mimolab(&["eigen-cdf", "--config", "small.toml", "--out", "res"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let listed = String::from_utf8(out.stdout).unwrap();
    assert_eq!(listed.lines().count(), 2);
    let cdf = fs::read_to_string(dir.path().join("res/eigen_cdf_cdf.csv")).unwrap();
    let first = cdf.lines().next().unwrap();
    assert!(first.starts_with("# mimolab ") && first.contains("experiment=eigen_cdf seed=3 config_sha256="), "{first}");
}

#[test]
fn seed_flag_env_and_config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), SMALL_EIGEN).unwrap();
    let seed_of = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_mimolab"));
        cmd.args(["eigen-cdf", "--config", "small.toml", "--print-config"]).args(extra).current_dir(dir.path());
        match env {
            Some(v) => cmd.env("MIMOLAB_SEED", v),
            None => cmd.env_remove("MIMOLAB_SEED"),
        };
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        String::from_utf8(out.stdout).unwrap().lines().find(|l| l.starts_with("seed")).unwrap().to_string()
    };
    assert_eq!(seed_of(&[], None), "seed = 3");
    assert_eq!(seed_of(&[], Some("11")), "seed = 11");
    assert_eq!(seed_of(&["--seed", "12"], Some("11")), "seed = 12");
}

#[test]
fn worker_count_does_not_change_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), SMALL_EIGEN).unwrap();
    for (w, sub) in [("1", "a"), ("3", "b")] {
        let out = mimolab(&["eigen-cdf", "--config", "small.toml", "--workers", w, "--out", sub], dir.path());
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for name in ["eigen_cdf_cdf.csv", "eigen_cdf_summary.csv"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn errors_carry_category_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "experiment = \"detect\"\n[detect]\nk = 0\n").unwrap();
    fs::write(dir.path().join("typo.toml"), "experiment = \"detect\"\n[detect]\nkk = 3\n").unwrap();

    let out = mimolab(&["detect", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[config]: key `detect.k` out of range"), "{}", stderr(&out));

    let out = mimolab(&["detect", "--config", "typo.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown key `detect.kk`"));

    fs::write(dir.path().join("detect.toml"), "experiment = \"detect\"\n").unwrap();
    let out = mimolab(&["capacity", "--config", "detect.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("verb is `capacity`"));

    let out = mimolab(&["detect", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("error[io]:") && stderr(&out).contains("missing.toml"));

    let out = mimolab(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(64));
    assert!(stderr(&out).starts_with("error[usage]:"));
}

#[test]
fn every_verb_prints_a_config_that_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    for verb in ["capacity", "precoding", "multicell", "detect", "focusing", "eigen-cdf", "neumann-bench"] {
        let out = mimolab(&[verb, "--print-config"], dir.path());
        assert!(out.status.success(), "{verb}: {}", stderr(&out));
        let text = String::from_utf8(out.stdout).unwrap();
        fs::write(dir.path().join("c.toml"), &text).unwrap();
        let again = mimolab(&[verb, "--config", "c.toml", "--print-config"], dir.path());
        assert_eq!(String::from_utf8(again.stdout).unwrap(), text, "{verb}");
    }
}
