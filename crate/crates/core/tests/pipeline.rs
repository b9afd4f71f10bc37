use apery_core::apery::{
    builtin_case, exact_sequences, ratio_series, run_case, run_cases, RateLaw, Registry, RunOptions,
};
use apery_core::par::Exec;
use proptest::prelude::*;
use rug::Float;

fn quick() -> RunOptions {
    RunOptions { series_order: 60, ..RunOptions::default() }
}

#[test]
fn sequential_and_parallel_runs_agree() {
    let reg = Registry::builtin().unwrap();
    let fast: Vec<_> =
        reg.cases().iter().filter(|c| matches!(c.expected_rate, RateLaw::Geometric { .. })).cloned().collect();
    let a = run_cases(Exec::Sequential, &fast, &quick());
    let b = run_cases(Exec::Parallel, &fast, &quick());
    assert_eq!(a.len(), 4);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.case, y.case);
        assert_eq!(x.limit_estimate, y.limit_estimate);
        assert_eq!(x.pass, y.pass);
        assert!(x.pass, "{}: {:?}", x.case, x.errors);
    }
}

#[test]
fn zeta3_report_schema() {
    let r = run_case(&builtin_case("zeta3").unwrap(), &quick());
    let v = serde_json::to_value(&r).unwrap();
    for key in [
        "case",
        "ode_verified_to",
        "integrand_match_order",
        "n_used",
        "limit_estimate",
        "target",
        "abs_error",
        "rate_model",
        "fitted_rate",
        "pass",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["ode_verified_to"], 60);
    assert_eq!(v["n_used"], 50);
    assert_eq!(v["rate_model"], "geometric");
    // The direct Eichler relation at i/sqrt6 is reported but does not gate.
    assert_eq!(r.advisory_checks.len(), 1);
    assert!(!r.advisory_checks[0].pass);
    assert!(r.analytic_checks.iter().all(|c| c.pass));
    assert!(r.pass);
}

#[test]
fn substep_failures_are_recorded() {
    // N below 10·d is rejected by the limit stage.
    let r = run_case(&builtin_case("l2f7").unwrap(), &RunOptions { n: Some(5), ..quick() });
    assert!(!r.pass);
    assert!(r.errors.iter().any(|e| e.starts_with("limit:")), "{:?}", r.errors);
    assert!(r.estimate.is_none());
    // Other stages still ran.
    assert_eq!(r.ode_verified_to, Some(60));
}

#[test]
fn loglike_case_reports_extrapolation() {
    let r = run_case(&builtin_case("case_e").unwrap(), &RunOptions { n: Some(3000), ..quick() });
    let e = r.estimate.as_ref().unwrap();
    assert!(e.method.contains("kappa"));
    assert!(e.log_poly_estimate.is_some());
    assert!(e.error_vs_target < e.raw_error);
}

#[test]
fn geometric_error_decays_without_plateau() {
    let c = builtin_case("zeta3").unwrap();
    let (rec, pair) = exact_sequences(&c, 60).unwrap();
    let prec = 1024;
    let rs = ratio_series(&rec, &pair, 60, prec, &c.expected_rate).unwrap();
    let target = c.expected_limit.eval(300).unwrap();
    let RateLaw::Geometric { ratio, .. } = c.expected_rate else { unreachable!() };
    let errs: Vec<f64> =
        rs.points.iter().map(|(_, r)| Float::with_val(prec, r - &target).abs().to_f64().ln()).collect();
    for w in errs.windows(2).skip(5) {
        let step = w[1] - w[0];
        assert!((step / ratio.ln() - 1.0).abs() < 0.1, "step {step}");
    }
    // Doubling N roughly doubles the number of correct digits.
    let (e20, e40) = (errs[20], errs[40]);
    assert!((e40 / e20 - 2.0).abs() < 0.15, "{e20} {e40}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn default_order_runs_are_deterministic(idx in 0usize..4) {
        let ids = ["zeta3", "zeta2", "l2f7", "l2f6"];
        let c = builtin_case(ids[idx]).unwrap();
        let a = run_case(&c, &quick());
        let b = run_case(&c, &quick());
        prop_assert_eq!(a.limit_estimate, b.limit_estimate);
        prop_assert_eq!(a.abs_error.to_bits(), b.abs_error.to_bits());
    }
}
