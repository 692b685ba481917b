use std::process::{Command, Output};

use serde_json::Value;

fn btmem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_btmem")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = btmem(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    assert_eq!(v["schema_version"], "1");
    v
}

#[test]
fn bifset_document() {
    let v = json(&["bifset", "--mu3", "0.1", "--resolution", "60"]);
    assert_eq!(v["kind"], "curves");
    assert!(v["payload"]["points"].as_array().unwrap().len() >= 7);
    let curves = v["payload"]["curves"].as_array().unwrap();
    let labels: Vec<&str> = curves.iter().map(|c| c["label"].as_str().unwrap()).collect();
    for l in ["saddle_node", "hopf+", "hopf-", "het+", "het-", "hom+", "hom-"] {
        assert!(labels.contains(&l), "{l} missing from {labels:?}");
    }
    let hom = curves.iter().find(|c| c["label"] == "hom+").unwrap();
    assert_eq!(hom["columns"], serde_json::json!(["mu2", "mu1", "theta"]));
    let mu2: Vec<f64> = hom["rows"].as_array().unwrap().iter().map(|r| r[0].as_f64().unwrap()).collect();
    let lo = mu2.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mu2.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(lo <= -0.2454 && lo >= -0.2456, "{lo}");
    assert!(hi >= -0.1001, "{hi}");
}

#[test]
fn bifset_rejects_negative_mu3() {
    let out = btmem(&["bifset", "--mu3", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mu3 must be positive"));
}

#[test]
fn bifset_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = btmem(&["bifset", "--mu3", "0.1", "--resolution", "20", "--format", "csv", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let hom = std::fs::read_to_string(dir.path().join("hom_plus.csv")).unwrap();
    assert_eq!(hom.lines().next().unwrap(), "mu2,mu1,theta");
    let sn = std::fs::read_to_string(dir.path().join("saddle_node.csv")).unwrap();
    assert_eq!(sn.lines().next().unwrap(), "mu2,mu1");
    let row: Vec<f64> = sn.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row.len(), 2);
    assert!(dir.path().join("points.csv").exists());
}

#[test]
fn melnikov_het_oracle() {
    let v = json(&["melnikov", "het", "--nu1", "0", "--nu2", "1", "--nu3", "1", "--oracle"]);
    let p = &v["payload"];
    assert!((p["closed"].as_f64().unwrap() - 0.3771236).abs() < 1e-7);
    assert!((p["quadrature"].as_f64().unwrap() - 0.3771236).abs() < 1e-7);
    assert!(p["reldiff"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn melnikov_het_error() {
    let out = btmem(&["melnikov", "het", "--nu2", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NonPositiveNu2"));
}

#[test]
fn melnikov_hom_check_curve() {
    let v = json(&["melnikov", "hom", "--theta", "1.0", "--check-curve"]);
    assert_eq!(v["payload"]["on_curve"], true);
    assert!(v["payload"]["relative_to_area"].as_f64().unwrap() <= 1e-5);
}

#[test]
fn shoot_curves() {
    let v = json(&["shoot", "--mu3", "0.1", "--samples", "5"]);
    let curves = v["payload"]["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 2);
    for c in curves {
        for r in c["rows"].as_array().unwrap() {
            let mu2 = r[0].as_f64().unwrap();
            assert!((-0.2456..=-0.1).contains(&mu2), "{mu2}");
        }
    }
    assert!(v["payload"]["relative_deviation"].as_f64().unwrap() <= 0.15);
    // A looser integrator reproduces the roots.
    let w = json(&["shoot", "--mu3", "0.1", "--samples", "5", "--abs-tol", "1e-11", "--rel-tol", "1e-11"]);
    let rows = |v: &Value| v["payload"]["curves"][0]["rows"].as_array().unwrap().clone();
    for (a, b) in rows(&v).iter().zip(rows(&w).iter()) {
        assert!((a[1].as_f64().unwrap() - b[1].as_f64().unwrap()).abs() <= 1e-7);
    }
}

#[test]
fn shoot_requires_two_samples() {
    assert_eq!(btmem(&["shoot", "--mu3", "0.1", "--samples", "1"]).status.code(), Some(2));
}

#[test]
fn classify_limit_cycle_region() {
    let v = json(&["classify", "--mu1", "0", "--mu2", "-0.3", "--mu3", "0.1"]);
    assert_eq!(v["payload"]["has_limit_cycle"], true);
    assert_eq!(v["payload"]["equilibria"].as_array().unwrap().len(), 3);
}

#[test]
fn portrait_has_separatrices_and_cycle() {
    let v = json(&["portrait", "--mu1", "0", "--mu2", "-0.3", "--mu3", "0.1", "--t-end", "30", "--start", "0.1,0"]);
    let names: Vec<&str> =
        v["payload"]["trajectories"].as_array().unwrap().iter().map(|t| t["label"].as_str().unwrap()).collect();
    assert_eq!(names.iter().filter(|n| n.starts_with("saddle")).count(), 8);
    assert!(names.contains(&"orbit0") && names.contains(&"limit_cycle"));
    assert!(v["payload"]["limit_cycle"]["multiplier"].as_f64().unwrap().abs() < 1.0);
}

#[test]
fn memristor_sphere_slices() {
    let v = json(&["memristor", "sphere", "--a", "1", "--b", "4.8", "--beta", "5", "--xi", "80", "--slices", "9"]);
    assert_eq!(v["kind"], "slices");
    let slices = v["payload"]["slices"].as_array().unwrap();
    assert_eq!(slices.len(), 9);
    for s in slices {
        assert!(s["leaf_residual"].as_f64().unwrap() <= 1e-7);
        assert!(s["closure_gap"].as_f64().unwrap() <= 1e-7);
        assert_eq!(s["columns"], serde_json::json!(["t", "x", "y", "z"]));
    }
}

#[test]
fn memristor_sphere_hypotheses() {
    let out = btmem(&["memristor", "sphere", "--a", "3", "--b", "1", "--beta", "5", "--xi", "80"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("HypothesesViolated"));
}

#[test]
fn memristor_reduce_and_simulate() {
    let v = json(&["memristor", "reduce", "--a", "1", "--b", "4.8", "--beta", "5", "--xi", "80", "--h", "0"]);
    let mu = &v["payload"]["canonical"];
    assert!((mu["mu3"].as_f64().unwrap() - 0.10667).abs() <= 1e-5);
    assert!((mu["mu2"].as_f64().unwrap() + 2.30667).abs() <= 1e-5);
    let v = json(&["memristor", "simulate", "--a", "1", "--b", "1", "--beta", "5", "--xi", "100", "--t-end", "5"]);
    assert!((v["payload"]["h"].as_f64().unwrap() - 0.3).abs() < 1e-15);
    assert!(v["payload"]["invariant_drift"].as_f64().unwrap() <= 1e-7);
    let out = btmem(&["memristor", "reduce", "--a", "1", "--b", "1", "--beta", "5", "--xi", "100", "--alpha", "0", "--h", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn duffing_audit_verdict() {
    let v = json(&["duffing", "audit", "--alpha", "0.0001", "--omega", "0.35", "--betad", "0.85"]);
    assert_eq!(v["payload"]["verdict"], "NoPeriodicOrbits");
    assert!(v["payload"]["amplitude_trend"].as_f64().unwrap() < 0.0);
    let v = json(&["duffing", "audit", "--alpha", "0", "--omega", "0.35", "--betad", "0.85", "--t-final", "50"]);
    assert_eq!(v["payload"]["verdict"], "HamiltonianFoliation");
}

#[test]
fn report_csv() {
    let out = btmem(&["classify", "--mu1", "0", "--mu2", "-0.3", "--mu3", "0.1", "--format", "csv"]);
    let s = String::from_utf8(out.stdout).unwrap();
    assert_eq!(s.lines().next().unwrap(), "field,value");
    assert!(s.contains("has_limit_cycle,true"));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["bifset", "--mu3", "0.1", "--resolution", "30"];
    assert_eq!(btmem(&args).stdout, btmem(&args).stdout);
    let args = ["memristor", "sphere", "--a", "1", "--b", "4.8", "--beta", "5", "--xi", "80", "--slices", "3"];
    assert_eq!(btmem(&args).stdout, btmem(&args).stdout);
}

#[test]
fn timestamp_is_opt_in() {
    let v = json(&["classify", "--mu1", "0", "--mu2", "-0.3", "--mu3", "0.1"]);
    assert!(v["metadata"].get("timestamp_unix").is_none());
    let v = json(&["classify", "--mu1", "0", "--mu2", "-0.3", "--mu3", "0.1", "--timestamp"]);
    assert!(v["metadata"]["timestamp_unix"].as_u64().unwrap() > 0);
}

#[test]
fn non_finite_input_is_a_usage_error() {
    assert_eq!(btmem(&["classify", "--mu1", "nan", "--mu2", "0", "--mu3", "0.1"]).status.code(), Some(2));
}
