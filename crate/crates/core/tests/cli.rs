use std::process::{Command, Output};

use padyn::experiment::{self, AnalyzeConfig, ContextArgs, ExperimentConfig, Report, ShadowConfig};

fn padyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padyn")).args(args).env_remove("PADYN_WORKERS").output().unwrap()
}

fn report(out: &Output) -> Report {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn shadow_run_passes_and_reports() {
    let out = padyn(&["shadow", "--p", "2", "--n", "8", "--delta", "p^-2", "--length", "6", "--seeds", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r.schema, "padyn-report/1");
    assert!(r.passed);
    assert_eq!(r.cases.len(), 5);
    let names: Vec<&str> = r.summary.iter().map(|c| c.invariant.as_str()).collect();
    assert!(names.contains(&"shadowing_bound") && names.contains(&"oracle_not_worse"));
}

#[test]
fn invariant_failure_exits_one_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = padyn(&[
        "analyze",
        "--p",
        "2",
        "--n",
        "5",
        "--checks",
        "locally-scaling:1:2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r: Report = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(!r.passed);
    assert_eq!(r.failed_invariants(), vec!["locally_scaling"]);
}

#[test]
fn config_errors_exit_two() {
    let bad_map = padyn(&["shadow", "--map", "affine(v=3"]);
    assert_eq!(bad_map.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_map.stderr).contains("byte"));
    assert_eq!(padyn(&["conjugate", "--p", "4"]).status.code(), Some(2));
    assert_eq!(padyn(&[]).status.code(), Some(2));
    assert_eq!(padyn(&["shadow", "--delta", "p^-40", "--n", "4"]).status.code(), Some(2));
    assert_eq!(padyn(&["analyze", "--checks", "lip,bogus"]).status.code(), Some(2));
}

#[test]
fn config_file_matches_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::Analyze(AnalyzeConfig {
        context: ContextArgs::zp(3, 4),
        checks: "lip,scaling,locally-scaling:1".into(),
        ..AnalyzeConfig::default()
    });
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let from_file = padyn(&["--config", path.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(0));
    let from_args = padyn(&["analyze", "--p", "3", "--n", "4", "--checks", "lip,scaling,locally-scaling:1"]);
    let (a, b) = (report(&from_file), report(&from_args));
    assert_eq!(a.config, cfg);
    assert_eq!(a.deterministic_json().unwrap(), b.deterministic_json().unwrap());
    assert_eq!(padyn(&["--config", path.to_str().unwrap(), "suite"]).status.code(), Some(2));
}

#[test]
fn reruns_are_identical_across_worker_counts() {
    let args = ["shadow", "--p", "3", "--n", "6", "--length", "20", "--seeds", "6", "--seed", "40"];
    let one = padyn(&[&args[..], &["--workers", "1"]].concat());
    let two = padyn(&[&args[..], &["--workers", "2"]].concat());
    assert_eq!(report(&one).deterministic_json().unwrap(), report(&two).deterministic_json().unwrap());

    let cfg = ExperimentConfig::Shadow(ShadowConfig {
        context: ContextArgs::zp(3, 6),
        length: 20,
        seeds: 6,
        seed: 40,
        ..ShadowConfig::default()
    });
    let lib = experiment::run(&cfg).unwrap();
    assert_eq!(lib.deterministic_json().unwrap(), report(&one).deterministic_json().unwrap());
}

#[test]
fn json_config_defaults_fill_in() {
    let cfg: ExperimentConfig = serde_json::from_str(r#"{"command": "shadow", "p": 5}"#).unwrap();
    let ExperimentConfig::Shadow(s) = cfg else { panic!() };
    assert_eq!(s.context.p, 5);
    assert_eq!(s.length, 50);
    assert!(serde_json::from_str::<ExperimentConfig>(r#"{"command": "shadow", "delta": "q^2"}"#).is_err());
}
