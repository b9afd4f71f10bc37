use std::process::{Command, Output};

fn apery(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apery")).args(args).output().expect("spawn apery")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_zeta3_passes_with_forty_digits() {
    let o =
        apery(&["verify", "--case", "zeta3", "--n", "50", "--digits", "40", "--prec-bits", "512", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["case"], "zeta3");
    assert_eq!(v["pass"], true);
    assert_eq!(v["ode_verified_to"], 200);
    assert!(v["abs_error"].as_f64().unwrap() < 1e-40);
    assert!(v["limit_estimate"].as_str().unwrap().starts_with("2.003428171932657142332896935"));
}

#[test]
fn verify_all_prints_summary_table() {
    let o = apery(&["verify"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for id in ["zeta3", "zeta2", "case_h", "l2f7", "case_e", "l2f6", "case_beta"] {
        assert!(s.lines().any(|l| l.starts_with(id) && l.contains("PASS")), "{id} missing in\n{s}");
    }
    assert!(s.contains("7/7 cases pass"));
    assert!(s.contains("factor 729"));
}

#[test]
fn unknown_case_exits_with_usage_error() {
    let o = apery(&["verify", "--case", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nosuch"));
    assert_eq!(apery(&["dump", "--case", "nosuch"]).status.code(), Some(2));
}

#[test]
fn config_bounds_are_usage_errors() {
    assert_eq!(apery(&["verify", "--prec-bits", "32"]).status.code(), Some(2));
    assert_eq!(apery(&["verify", "--digits", "5"]).status.code(), Some(2));
    assert_eq!(apery(&["verify", "--n", "0"]).status.code(), Some(2));
}

#[test]
fn dump_zeta3_sequences_csv() {
    let o = apery(&["dump", "--case", "zeta3", "--what", "sequences", "--n", "10", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut rows = s.lines();
    assert_eq!(rows.next(), Some("n,a,b"));
    let a: Vec<String> = rows.map(|r| r.split(',').nth(1).unwrap().to_string()).collect();
    assert_eq!(a.len(), 11);
    assert_eq!(&a[..5], ["1", "5", "73", "1445", "33001"]);
    assert_eq!(a[10], "13657436403073");
}

#[test]
fn dump_uniformizers() {
    let o = apery(&["dump", "--case", "zeta2", "--what", "tseries", "--n", "4", "--format", "text"]);
    // `--n` is the relative order: four terms past the lead.
    assert_eq!(stdout(&o).trim(), "q - 5q^2 + 15q^3 - 30q^4 + 40q^5 + O(q^6)");
    let o = apery(&["dump", "--case", "l2f7", "--what", "tseries", "--n", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["coeff"].as_str().unwrap()).collect();
    assert_eq!(c, ["1", "-10", "49", "-184", "700"]);
}

#[test]
fn dump_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    let o = apery(&[
        "dump",
        "--case",
        "case_h",
        "--what",
        "aseries",
        "--n",
        "3",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v[0]["exponent"], "0");
    assert_eq!(v[1]["coeff"], "-21");
}

#[test]
fn identities_mod12_to_eight_digits() {
    let o = apery(&["identities", "--which", "mod12", "--digits", "8", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let checks = v["corollaries"][0]["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["identity"].as_str().unwrap().contains("(2+sqrt3)/3")));
    assert!(checks.iter().all(|c| c["pass"] == true));
}

#[test]
fn identities_stabilizer_reports_both_cusps() {
    let o = apery(&["identities", "--which", "stabilizer", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("L(2) = zeta(2)/5"));
    assert!(s.contains("L(2) = -L(2,f)"));
    assert!(!s.contains(",false"));
}

#[test]
fn list_shows_every_case() {
    let s = stdout(&apery(&["list"]));
    assert_eq!(s.lines().count(), 7);
}
