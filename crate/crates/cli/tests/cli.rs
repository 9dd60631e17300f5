use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn prewet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prewet")).args(args).output().expect("binary runs")
}

fn prewet_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prewet")).args(args).env(key, val).output().expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fs_reference_happy_path() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    let o = prewet(&["fs-reference", "--lambda", "1", "--chi", "1", "--n", "1000", "--out", s(&d)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(d.join("fs_reference.csv")).unwrap();
    assert!(text.starts_with("r,phi0,density,t,y,kernel\n"));
    let m = manifest(&d);
    assert_eq!(m["command"], "fs-reference");
    assert_eq!(m["outputs"].as_object().unwrap().len(), 1);
    let density_rows = text.lines().skip(1).filter(|l| l.ends_with(",,,")).count();
    assert_eq!(density_rows, 1001);
}

#[test]
fn subcritical_beta_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = prewet(&["simulate-ising", "--beta", "0.3", "--n", "8", "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    assert_eq!(e["kind"], "validation");
    assert!(e["message"].as_str().unwrap().contains("beta below critical"));
}

#[test]
fn bad_arguments_and_config_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(prewet(&["simulate-ising", "--bogus"]).status.code(), Some(1));
    assert_eq!(prewet(&["simulate-walk", "--n", "many"]).status.code(), Some(1));
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "seed = 1\n[walk]\nn = 8\nspan = 3\n").unwrap();
    let o = prewet(&["simulate-walk", "--config", s(&cfg), "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["context"], "config");
    let o = prewet(&[
        "simulate-ising",
        "--n",
        "8",
        "--samples",
        "3",
        "--thin",
        "2",
        "--sweeps",
        "7",
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(prewet(&["--version"]).status.code(), Some(0));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("f");
    std::fs::write(&file, "x").unwrap();
    let o = prewet(&["fs-reference", "--out", s(&file.join("sub"))]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["kind"], "runtime");
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "seed = 3\nreplicas = 2\n[walk]\nlambda = 0.5\nn = 16\nsamples = 4\n").unwrap();
    let d = tmp.path().join("w");
    let o = prewet(&["simulate-walk", "--config", s(&cfg), "--n", "12", "--out", s(&d)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&d);
    assert_eq!(m["config"]["seed"], 3);
    assert_eq!(m["config"]["walk"]["n"], 12);
    assert_eq!(m["config"]["walk"]["lambda"], 0.5);
    assert_eq!(m["replica_seeds"].as_array().unwrap().len(), 2);
    let stats = std::fs::read_to_string(d.join("walk_stats.csv")).unwrap();
    assert_eq!(stats.lines().count(), 1 + 2 * 4);
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let o = prewet(&[
        "simulate-ising",
        "--n",
        "10",
        "--burnin",
        "50",
        "--samples",
        "6",
        "--thin",
        "5",
        "--replicas",
        "3",
        "--seed",
        "11",
        "--out",
        s(&a),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o =
        prewet_env(&["simulate-ising", "--config", s(&a.join("manifest.json")), "--out", s(&b)], "PREWET_THREADS", "1");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert_eq!(ma["outputs"], mb["outputs"]);
    assert_eq!(ma["notes"]["contour_convention"], "split-ne-sw");
    for f in ["interface.csv", "interface_summary.csv", "steps.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }

    let w1 = tmp.path().join("w1");
    let w2 = tmp.path().join("w2");
    let args = ["simulate-walk", "--n", "20", "--samples", "9", "--replicas", "2", "--seed", "4"];
    assert_eq!(prewet(&[&args[..], &["--out", s(&w1)]].concat()).status.code(), Some(0));
    let o = prewet_env(
        &["simulate-walk", "--config", s(&w1.join("manifest.json")), "--out", s(&w2)],
        "PREWET_THREADS",
        "2",
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(manifest(&w1)["outputs"], manifest(&w2)["outputs"]);
}

#[test]
fn analyze_and_report_verify_digests() {
    let tmp = tempfile::tempdir().unwrap();
    let w = tmp.path().join("w");
    let an = tmp.path().join("an");
    let o = prewet(&["simulate-walk", "--lambda", "0.2", "--n", "32", "--samples", "120", "--out", s(&w)]);
    assert_eq!(o.status.code(), Some(0));
    let o = prewet(&["analyze", s(&w), "--out", s(&an)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(an.join("report.json")).unwrap()).unwrap();
    assert!(report["calibration_note"].as_str().unwrap().contains("calibration"));
    assert_eq!(report["runs"][0]["ks"].as_array().unwrap().len(), 3);
    let first = std::fs::read(an.join("report.json")).unwrap();
    assert_eq!(prewet(&["analyze", s(&w), "--out", s(&an)]).status.code(), Some(0));
    assert_eq!(std::fs::read(an.join("report.json")).unwrap(), first);

    let o = prewet(&["report", "--out", s(&an)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("KS(t=0.0)"));

    let stats = w.join("walk_stats.csv");
    let mut text = std::fs::read_to_string(&stats).unwrap();
    text.push_str("0,999,0,1,1.0\n");
    std::fs::write(&stats, text).unwrap();
    let o = prewet(&["report", "--out", s(&an)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["context"], "digest");
    assert_eq!(prewet(&["analyze", s(&w), "--out", s(&an)]).status.code(), Some(1));
}

#[test]
fn analyze_ising_run_has_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("i");
    let an = tmp.path().join("an");
    let o = prewet(&[
        "simulate-ising",
        "--n",
        "16",
        "--burnin",
        "200",
        "--samples",
        "60",
        "--thin",
        "8",
        "--replicas",
        "2",
        "--out",
        s(&d),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = prewet(&["analyze", s(&d), "--out", s(&an)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(an.join("report.json")).unwrap()).unwrap();
    let r = &report["runs"][0];
    assert_eq!(r["provenance"], "ising");
    assert_eq!(r["samples"], 120);
    for key in ["restricted_phase_rate", "repulsion_hit_rate", "area_exceed_rate", "length_exceed_rate"] {
        let v = r["diagnostics"][key].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v), "{key}");
    }
    assert!(r["chi"].as_f64().unwrap() > 0.0);
}
