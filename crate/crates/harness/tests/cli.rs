use std::process::Command;

use simapprox_harness::config::{ExperimentConfig, Theorem};
use simapprox_harness::nodes::NodeSource;
use simapprox_harness::report::{ApproxReport, Status};
use simapprox_harness::run::run;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simapprox"))
}

fn without_timestamp(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn sweep_writes_outputs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    let out = dir.path().join("a");
    for _ in 0..2 {
        let status = bin()
            .args([
                "sweep",
                "--domain",
                "disk",
                "--function",
                "branch(0.5,1)",
                "--nodes",
                "random:4",
                "--degrees",
                "16,32",
            ])
            .args(["--compact", "disk:0,0,0.5", "--seed", "3", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        for f in [
            "report.json",
            "ratios.csv",
            "summary.csv",
            "errors.svg",
            "ratios.svg",
        ] {
            assert!(out.join(f).is_file(), "{f} missing");
        }
        texts.push(std::fs::read_to_string(out.join("report.json")).unwrap());
    }
    assert_eq!(without_timestamp(&texts[0]), without_timestamp(&texts[1]));

    let report = ApproxReport::from_json(&texts[0]).unwrap();
    assert_eq!(report.schema, 1);
    assert!(report.all_finite());
    let again = ApproxReport::from_json(&report.to_json().unwrap()).unwrap();
    assert_eq!(again.to_json().unwrap(), report.to_json().unwrap());

    let csv = std::fs::read_to_string(dir.path().join("a/ratios.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("n,order,z_re,z_im,error,rho,bound,ratio")
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 8);
    assert!(!csv.contains('\r'));

    let status = bin()
        .arg("report")
        .arg(dir.path().join("a/report.json"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        degrees: vec![16, 32],
        output: dir.path().join("out"),
        ..Default::default()
    };
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, cfg.to_text()).unwrap();
    let status = bin()
        .args(["sweep", "--config"])
        .arg(&path)
        .args([
            "--set",
            "problem.domain=square",
            "--set",
            "problem.function=branch(0.5,0.5)",
            "--set",
            "output.svg=false",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let r = ApproxReport::from_json(
        &std::fs::read_to_string(dir.path().join("out/report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(r.config.domain, "square");
    assert_eq!(r.config.degrees, vec![16, 32]);
    assert!(!dir.path().join("out/errors.svg").exists());
}

#[test]
fn malformed_domain_gives_failed_report() {
    let cfg = ExperimentConfig {
        domain: "disk(0,0".into(),
        ..Default::default()
    };
    let r = run(&cfg);
    assert_eq!(r.status, Status::Failed);
    assert!(!r.errors.is_empty());
    assert_eq!(r.exit_code(), 1);

    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["sweep", "--domain", "blob", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let r =
        ApproxReport::from_json(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(r.status, Status::Failed);
    assert!(r.errors[0].contains("blob"));
}

#[test]
fn theorem3_interpolates_to_rounding() {
    let cfg = ExperimentConfig {
        theorem: Theorem::Three,
        epsilon: 0.25,
        nodes: NodeSource::Roots(0),
        degrees: vec![8],
        ..Default::default()
    };
    let r = run(&cfg);
    assert_eq!(r.status, Status::Ok, "{:?}", r.errors);
    let d = &r.degrees[0];
    assert_eq!(d.node_count, 8);
    assert!(
        d.max_node_residual <= 1e-9,
        "residual {}",
        d.max_node_residual
    );
    assert!(d.degree <= 8 + 2 + 1);
}

#[test]
fn small_subcommands() {
    let map = bin()
        .args([
            "map", "--domain", "segment", "--deltas", "0.1", "--points", "64",
        ])
        .output()
        .unwrap();
    assert_eq!(map.status.code(), Some(0));
    let text = String::from_utf8(map.stdout).unwrap();
    assert!(text.contains("delta,theta,re,im"));

    let approx = bin()
        .args([
            "approx",
            "--function",
            "pole(2)",
            "--degree",
            "4",
            "--samples",
            "256",
        ])
        .output()
        .unwrap();
    assert_eq!(approx.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&approx.stdout).unwrap();
    assert_eq!(v["coefficients"].as_array().unwrap().len(), 5);
    assert!(v["error"].as_f64().unwrap() < 0.05);

    let dir = tempfile::tempdir().unwrap();
    let fekete = bin()
        .args(["fekete", "--count", "6", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(fekete.status.code(), Some(0));
    assert!(dir.path().join("nodes.json").is_file());
    assert_eq!(
        std::fs::read_to_string(dir.path().join("spacing.csv"))
            .unwrap()
            .lines()
            .count(),
        7
    );

    let bad = bin().args(["verify", "-c", "13"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
