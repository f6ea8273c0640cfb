use std::path::PathBuf;
use std::process::{Command, Output};

use gevreylab::text::{default_names, parse_series};
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gevreylab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

#[test]
fn euler_solves() {
    let out = run(&["solve", &path("euler.toml")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["branch"], "divergent");
    assert_eq!(v["certified_order"], 30);
    assert_eq!(v["residual_order"], "above truncation");
    let sol = v["solution"][0].as_str().unwrap();
    assert!(sol.starts_with("x - x^2 + 2 x^3 - 6 x^4 + 24 x^5"), "{sol}");
    let s = v["gevrey"][0]["estimate"]["s_hat"].as_f64().unwrap();
    assert!((0.9..=1.1).contains(&s), "{s}");
}

#[test]
fn trunc_flag_overrides_the_file() {
    let v = json(&run(&["solve", &path("euler.toml"), "--trunc", "8"]));
    assert_eq!(v["trunc"], 8);
    assert_eq!(v["certified_order"], 8);
}

#[test]
fn swapped_ex_ode_is_refused() {
    let out = run(&["solve", &path("ex_ode_swapped.toml")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("hypotheses not satisfied"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn forcing_the_convergent_branch_on_euler_is_refused() {
    let out = run(&["solve", &path("euler.toml"), "--branch", "convergent"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors_exit_one_with_position() {
    let out = run(&["solve", &path("malformed.toml")]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("7:12"), "{err}");

    assert_eq!(run(&["solve", &path("missing.toml")]).status.code(), Some(1));
    assert_eq!(run(&["solve"]).status.code(), Some(1));
    assert_eq!(run(&["solve", &path("euler.toml"), "--proxy", "l2"]).status.code(), Some(1));
    assert_eq!(run(&["solve", &path("euler.toml"), "--radius", "-1"]).status.code(), Some(1));
}

#[test]
fn geometric_series_has_unit_coefficients() {
    let out = run(&["decompose", &path("geometric.toml")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let coeffs = v["coefficients"].as_array().unwrap();
    assert_eq!(coeffs.len(), 7);
    assert!(coeffs.iter().all(|c| c == "1"));

    let v = json(&run(&["decompose", &path("geometric.toml"), "--padic-terms", "3"]));
    assert_eq!(v["coefficients"].as_array().unwrap().len(), 4);
}

#[test]
fn division_recomposes() {
    let v = json(&run(&["divide", &path("divide.toml")]));
    let names = default_names(2);
    let t = 8;
    let parse = |key: &str| parse_series(v[key].as_str().unwrap(), &names, t).unwrap();
    let (f, p, q, r) = (parse("f"), parse("p"), parse("quotient"), parse("remainder"));
    let qt = v["quotient_trunc"].as_u64().unwrap() as u32;
    let lhs = &(&q.truncate(qt) * &p) + &r;
    assert_eq!(lhs.truncate(qt), f.truncate(qt));
    assert_eq!(v["alpha"], serde_json::json!([0, 1]));
    // remainder is free of x2
    let r_text = v["remainder"].as_str().unwrap();
    assert!(!r_text.contains("x2"), "{r_text}");
}

#[test]
fn gevrey_on_series_and_problems() {
    let v = json(&run(&["gevrey", &path("geometric.toml")]));
    assert_eq!(v["gevrey"][0]["estimate"]["s_hat"].as_f64(), Some(0.0));
    let v = json(&run(&["gevrey", &path("multi_euler.toml")]));
    let s = v["gevrey"][0]["estimate"]["s_hat"].as_f64().unwrap();
    assert!((0.8..=1.2).contains(&s), "{s}");
    let v = json(&run(&["gevrey", &path("euler.toml"), "--proxy", "max", "--radius", "1"]));
    assert_eq!(v["proxy"], "max");
    assert_eq!(v["radius"], "1");
}

#[test]
fn nagumo_checks_pass() {
    let v = json(&run(&["nagumo-check", &path("norms.toml")]));
    let checks = v["inequalities"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 5);
    assert!(checks.iter().all(|c| c["pass"] == true));
    assert_eq!(v["radii"], serde_json::json!([1.0, 0.5]));

    let v = json(&run(&["nagumo-check", &path("euler.toml"), "--trunc", "10"]));
    let rows = v["dominance"].as_array().unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["z"].as_f64().unwrap().is_finite()));
}

#[test]
fn out_dir_receives_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("reports");
    let out = run(&[
        "gevrey",
        &path("euler.toml"),
        "--out",
        out_dir.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let json_text = std::fs::read_to_string(out_dir.join("gevrey.json")).unwrap();
    assert!(serde_json::from_str::<Value>(&json_text).is_ok());
    let csv = std::fs::read_to_string(out_dir.join("gevrey.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("component,n,M_n"));
    assert_eq!(lines.count(), 31);
}

#[test]
fn csv_to_stdout() {
    let out = run(&["decompose", &path("geometric.toml"), "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,f_n\n0,\"1\"\n"), "{text}");
}

#[test]
fn reports_are_deterministic_across_thread_counts() {
    let file = path("ex_ode.toml");
    let a = run(&["solve", &file]);
    let b = Command::new(env!("CARGO_BIN_EXE_gevreylab"))
        .args(["solve", &file])
        .env("GEVREYLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["nagumo-check", &path("norms.toml")]);
    let d = Command::new(env!("CARGO_BIN_EXE_gevreylab"))
        .args(["nagumo-check", &path("norms.toml")])
        .env("GEVREYLAB_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(c.stdout, d.stdout);
}
