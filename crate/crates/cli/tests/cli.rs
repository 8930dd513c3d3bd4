use std::process::Command as Process;

use specgap_cli::{from_json, run, to_json, RunConfig, EXIT_CONFIG, EXIT_OK};

const GAUSSIAN_D2: &str = include_str!("../../../configs/gaussian_d2.toml");
const POWER_D2: &str = include_str!("../../../configs/power_d2.toml");
const CUSTOM_1D: &str = include_str!("../../../configs/custom_1d.toml");

fn binary() -> Process {
    Process::new(env!("CARGO_BIN_EXE_specgap"))
}

#[test]
fn gaussian_bounds_match_oracle() {
    let report = run(&RunConfig::from_toml_str(GAUSSIAN_D2).unwrap()).unwrap();
    assert_eq!(report.bound("first_order").unwrap().value, Some(1.0));
    assert_eq!(report.bound("cordero").unwrap().value, Some(2.0));
    let ev = &report.spectrum.as_ref().unwrap().eigenvalues;
    for (got, want) in ev.iter().zip([0.0, 1.0, 1.0, 2.0]) {
        assert!((got - want).abs() < 2e-2, "{ev:?}");
    }
    assert!(report.violations.is_empty());
}

#[test]
fn power_family_bounds() {
    let mut cfg = RunConfig::from_toml_str(POWER_D2).unwrap();
    cfg.commands = vec![specgap_cli::Command::Bound];
    let report = run(&cfg).unwrap();
    let l1 = report
        .bound("perturbed_product_lambda_1")
        .unwrap()
        .value
        .unwrap();
    let l3 = report
        .bound("perturbed_product_lambda_d_plus_1")
        .unwrap()
        .value
        .unwrap();
    assert!((l1 - 0.0971875).abs() < 1e-12);
    assert!((l3 - 0.214375).abs() < 1e-12);
    assert!(report.alpha_beta.as_ref().unwrap().applicable);
}

fn small_power_config() -> RunConfig {
    let mut cfg = RunConfig::from_toml_str(POWER_D2).unwrap();
    cfg.grid.radius = Some(6.0);
    cfg.grid.n = Some(61);
    cfg.search.grid_n = Some(101);
    cfg
}

#[test]
fn report_round_trips() {
    for cfg in [
        small_power_config(),
        RunConfig::from_toml_str(CUSTOM_1D).unwrap(),
    ] {
        let report = run(&cfg).unwrap();
        assert!(report.verification.is_some());
        let back = from_json(&to_json(&report).unwrap()).unwrap();
        assert_eq!(back, report);
    }
}

#[test]
fn identical_seeds_give_identical_reports() {
    let cfg = small_power_config();
    let a = run(&cfg).unwrap().without_timings();
    let b = run(&cfg).unwrap().without_timings();
    assert_eq!(to_json(&a).unwrap(), to_json(&b).unwrap());
}

#[test]
fn one_dimensional_verification_holds() {
    let report = run(&RunConfig::from_toml_str(CUSTOM_1D).unwrap()).unwrap();
    let v = report.verification.as_ref().unwrap();
    assert!(v.intertwining.max_residual < 1e-5);
    assert!(v.symmetry.all_hold());
    assert!(v.variance_identity.iter().all(|c| c.check.mismatch < 1e-4));
    assert!(v.brascamp_lieb.iter().all(|c| c.check.slack > -1e-6));
    assert!(v.schrodinger_spectrum.as_ref().unwrap().max_diff < 5e-3);
    assert!(report.violations.is_empty());
}

#[test]
fn binary_writes_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(&cfg_path, CUSTOM_1D).unwrap();
    let out = dir.path().join("out");
    let status = binary()
        .args([
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .args(["--dump-matrices", "--seed", "11", "--threads", "2"])
        .output()
        .unwrap();
    assert_eq!(
        status.status.code(),
        Some(EXIT_OK),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    for file in [
        "report.json",
        "eigenvalues.csv",
        "bounds.csv",
        "stiffness.csv",
        "mass.csv",
        "eigenvectors.csv",
    ] {
        assert!(out.join(file).exists(), "{file} missing");
    }
    let report = from_json(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.metadata.seed, 11);
    let eig = std::fs::read_to_string(out.join("eigenvalues.csv")).unwrap();
    assert_eq!(eig.lines().count(), 5);
}

#[test]
fn binary_prints_report_without_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(
        &cfg_path,
        "schema_version = 1\ncommands = [\"bound\"]\n[problem]\nfamily = \"gaussian\"\nd = 1\n",
    )
    .unwrap();
    let out = binary().env("SPECGAP_CONFIG", &cfg_path).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let report = from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.bound("first_order").unwrap().value, Some(1.0));
}

#[test]
fn malformed_config_exits_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.toml");
    std::fs::write(
        &cfg_path,
        "schema_version = 1\nbogus_key = 3\n[problem]\nfamily = \"gaussian\"\nd = 2\n",
    )
    .unwrap();
    let out = binary()
        .args(["--config", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("bogus_key") && stderr.contains("line 2"),
        "{stderr}"
    );

    std::fs::write(&cfg_path, "schema_version = 1\n[problem\n").unwrap();
    let out = binary()
        .args(["--config", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));

    let out = binary()
        .args(["--config", "/nonexistent/run.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
}
