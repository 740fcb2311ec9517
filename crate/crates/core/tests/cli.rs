use std::path::Path;
use std::process::Command;

use cpa_lyap::cert::{verify_certificate, CpaCandidate};
use cpa_lyap::cli::{
    load_config, run_benchmark, verify_files, BenchFilter, BenchmarkSuite, CSV_HEADER,
};
use cpa_lyap::mesh::Triangulation;
use cpa_lyap::synth::Method;

const SYSTEM_C: &str = r#"{
  "name": "C", "dimension": 2,
  "dynamics": ["0.5*x1^4*sin(x2) + 0.3*x2", "-0.5*x1 - 1.25*x2 - x2^3*x1"],
  "domain": [[-1, 1], [-1, 1]],
  "method": "grid", "grid_spacing": [0.125, 0.125]
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cpa-lyap"))
}

fn without_timing(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect()
}

#[test]
fn bench_rows_are_reproducible_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    let suite = BenchmarkSuite::builtin();
    let filter = BenchFilter {
        system: Some("C".into()),
        method: Some(Method::Grid),
    };
    let rows = run_benchmark(&suite, &filter, Some(dir.path()), |_| {}).unwrap();
    assert_eq!(rows.len(), suite.filtered(&filter).len());
    let summary: Vec<_> = rows
        .iter()
        .map(|r| (r.init.as_str(), r.vertices, r.simplices, r.viable))
        .collect();
    assert_eq!(
        summary,
        vec![
            ("0.5", 25, 32, false),
            ("1/3", 49, 72, false),
            ("0.25", 81, 128, false),
            ("0.125", 289, 512, true)
        ]
    );

    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    let again = tempfile::tempdir().unwrap();
    run_benchmark(&suite, &filter, Some(again.path()), |_| {}).unwrap();
    let csv2 = std::fs::read_to_string(again.path().join("bench.csv")).unwrap();
    assert_eq!(without_timing(&csv), without_timing(&csv2));

    let m = cpa_lyap::cli::system_c();
    let mesh = std::fs::read_to_string(dir.path().join("C_grid_0.125_mesh.json")).unwrap();
    let cand = std::fs::read_to_string(dir.path().join("C_grid_0.125_candidate.json")).unwrap();
    let t = Triangulation::from_json(&mesh).unwrap();
    let c = CpaCandidate::from_json(&cand).unwrap();
    assert!(verify_certificate(&m, &t, &c).valid);
}

#[test]
fn run_and_verify_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, SYSTEM_C).unwrap();
    let out = dir.path().join("out");
    let run = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--svg", "--dump-lp"])
        .output()
        .unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.starts_with(CSV_HEADER));
    assert!(stdout.contains("C,grid,0.125,289,512,Yes,1,0,"));
    for f in [
        "C_mesh.json",
        "C_candidate.json",
        "C_report.json",
        "C_report.csv",
        "C.svg",
        "C.mps",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let mps = std::fs::read_to_string(out.join("C.mps")).unwrap();
    assert!(mps.starts_with("NAME C") && mps.trim_end().ends_with("ENDATA"));

    let verify = bin()
        .args(["verify", "--mesh"])
        .arg(out.join("C_mesh.json"))
        .arg("--candidate")
        .arg(out.join("C_candidate.json"))
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(verify.status.success());
    assert!(String::from_utf8_lossy(&verify.stdout).contains("valid: true"));

    let report = verify_files(
        &out.join("C_mesh.json"),
        &out.join("C_candidate.json"),
        &cfg,
    )
    .unwrap();
    assert_eq!(report.sample_violations, 0);
}

#[test]
fn tampered_candidate_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, SYSTEM_C).unwrap();
    let spec = load_config(&cfg).unwrap();
    let (report, _) = cpa_lyap::cli::execute(&spec).unwrap();
    let mut c = report.candidate.unwrap();
    for v in c.values.iter_mut() {
        *v *= 0.5;
    }
    std::fs::write(dir.path().join("mesh.json"), report.mesh.to_json()).unwrap();
    std::fs::write(dir.path().join("cand.json"), c.to_json()).unwrap();
    let verify = bin()
        .args(["verify", "--mesh"])
        .arg(dir.path().join("mesh.json"))
        .arg("--candidate")
        .arg(dir.path().join("cand.json"))
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(verify.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&verify.stdout).contains("valid: false"));
}

#[test]
fn bad_config_reports_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        SYSTEM_C.replace(
            "\"grid_spacing\": [0.125, 0.125]",
            "\"grid_spacing\": \"x\"",
        ),
    )
    .unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid_spacing"));
    assert!(!Path::new("nonexistent").exists());
    let missing = bin()
        .args(["run", "--config", "does-not-exist.json"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}
