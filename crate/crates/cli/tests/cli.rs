use qcbnorm_cli::report::{CertificationReport, CSV_COLUMNS};
use std::path::Path;
use std::process::{Command, Output};

fn qcbnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcbnorm")).args(args).output().expect("binary runs")
}

fn report_at(path: &Path) -> CertificationReport {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn value(r: &CertificationReport, check: &str, alpha: Option<f64>, name: &str) -> f64 {
    let rec = r.records.iter().find(|x| x.check == check && x.alpha == alpha).unwrap_or_else(|| panic!("no {check} record"));
    rec.values[name]
}

#[test]
fn compute_identity_channel() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = qcbnorm(&["compute", "--zoo", "identity", "--params", "d=2", "--alpha", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report_at(&out);
    assert_eq!(r.log_base, 2);
    assert!(r.all_pass());
    assert!((value(&r, "cb_quasinorm", Some(0.5), "primal") - 0.5).abs() < 1e-6);
    assert!((value(&r, "cb_quasinorm", Some(0.5), "dual") - 0.5).abs() < 1e-6);
    assert!((value(&r, "renyi_information", Some(0.5), "primal") - 2.0).abs() < 1e-6);
    assert!((value(&r, "renyi_information", Some(0.5), "dual") - 2.0).abs() < 1e-6);
    assert!((value(&r, "mutual_information", None, "value") - 2.0).abs() < 1e-6);
    assert!(value(&r, "dispersion", None, "v_max").abs() < 1e-6);
    let center = &r.records.iter().find(|x| x.check == "mutual_information").unwrap().states["center"];
    assert!((center[0][0][0] - 0.5).abs() < 1e-4 && (center[1][1][0] - 0.5).abs() < 1e-4);
    for rec in &r.records {
        assert!(rec.wall_time_s.is_some());
    }
}

#[test]
fn compute_constant_channel_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let ch = dir.path().join("dep.json");
    std::fs::write(&ch, r#"{"zoo": "depolarizing", "params": {"p": 1.0}}"#).unwrap();
    let out = dir.path().join("r.json");
    let o = qcbnorm(&["compute", "--channel", ch.to_str().unwrap(), "--alpha", "0.7", "--no-timing", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report_at(&out);
    assert!(r.generated_at_unix.is_none());
    assert!(value(&r, "mutual_information", None, "value").abs() < 1e-8);
    assert!(value(&r, "renyi_information", Some(0.7), "primal").abs() < 1e-6);
    assert!(value(&r, "dispersion", None, "v_max").abs() < 1e-8);
    assert_eq!(r.records[0].channels, vec!["file:dep".to_string()]);
}

#[test]
fn compute_kraus_file_and_alpha_above_one() {
    let dir = tempfile::tempdir().unwrap();
    let ch = dir.path().join("ad.json");
    let map = qcbnorm_core::channel::amplitude_damping(0.3).unwrap();
    std::fs::write(&ch, qcbnorm_cli::channel_file::channel_to_json(&map).to_string()).unwrap();
    let out = dir.path().join("r.json");
    let o = qcbnorm(&["compute", "--channel", ch.to_str().unwrap(), "--alpha", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report_at(&out);
    assert!(value(&r, "cb_norm", Some(2.0), "value") >= 1.0 - 1e-9);
    assert!(r.records.iter().all(|x| x.check != "renyi_information"));
}

#[test]
fn csv_output() {
    let o = qcbnorm(&["compute", "--zoo", "dephasing", "--params", "p=0.2", "--alpha", "0.5,0.9", "--format", "csv", "--no-timing"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    // 2 cb + 2 Rényi + mutual information + dispersion.
    assert_eq!(lines.count(), 6);
}

#[test]
fn malformed_input_exits_2_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let ch = dir.path().join("bad.json");
    std::fs::write(&ch, "{\"in_dim\": 2,\n\"kraus\": [").unwrap();
    let out = dir.path().join("r.json");
    let o = qcbnorm(&["compute", "--channel", ch.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert!(!out.exists());

    for args in [
        vec!["compute", "--zoo", "nope"],
        vec!["compute", "--zoo", "depolarizing", "--params", "p=2"],
        vec!["compute", "--zoo", "identity", "--alpha", "0.3"],
        vec!["compute", "--zoo", "identity", "--alpha", "1"],
        vec!["compute", "--zoo", "identity", "--restarts", "0"],
        vec!["compute"],
        vec!["verify", "--dims", "3,1,1"],
        vec!["frobnicate"],
    ] {
        let o = qcbnorm(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bad_thread_variable_is_an_input_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_qcbnorm"))
        .args(["compute", "--zoo", "identity", "--alpha", "0.7"])
        .env("QCBNORM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_qcbnorm"))
        .args(["compute", "--zoo", "identity", "--alpha", "0.7", "--no-timing"])
        .env("QCBNORM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_with_unrealistic_tolerance_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = qcbnorm(&["verify", "--trials", "1", "--alpha", "0.7", "--tol", "1e-12", "--no-timing", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let r = report_at(&out);
    assert!(r.summary.failed > 0);
    assert_eq!(r.summary.total, r.records.len());
    assert_eq!(r.summary.passed, r.records.iter().filter(|x| x.pass).count());
    let failing = r.records.iter().find(|x| !x.pass).unwrap();
    assert!(failing.gap.unwrap().abs() > 1e-12 && failing.tolerance == Some(1e-12));
    let keys: Vec<&String> = r.records.iter().map(|x| &x.key).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn verify_reports_dimension_cap_per_case() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = qcbnorm(&[
        "verify", "--trials", "0", "--alpha", "0.7", "--zoo", "identity", "--params", "d=4", "--no-timing", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let r = report_at(&out);
    let capped: Vec<_> = r.records.iter().filter(|x| x.channels == ["identity(d=4)", "identity(d=4)"]).collect();
    assert!(!capped.is_empty());
    assert!(capped.iter().all(|x| !x.pass && x.error.as_deref().unwrap_or("").contains("cap")));
    // The corpus checks still ran and passed.
    assert!(r.records.iter().filter(|x| !x.channels.iter().any(|c| c.contains("d=4"))).all(|x| x.pass));
}
