use lcgeom_harness::{run_suite, BodySpec, CheckName, FunctionSpec, Report, Scenario};

fn gaussian(id: &str, checks: Vec<CheckName>) -> Scenario {
    Scenario::new(id, FunctionSpec::Gaussian { dim: 2 }, checks)
}

#[test]
fn reports_are_ordered_by_identifier() {
    let list: Vec<_> = ["zeta", "alpha", "mid"].iter().map(|id| gaussian(id, vec![CheckName::Centering]).resolve().unwrap()).collect();
    let reports = run_suite(&list).unwrap();
    let ids: Vec<&str> = reports.iter().map(|r| r.scenario.id.as_str()).collect();
    assert_eq!(ids, ["alpha", "mid", "zeta"]);
}

#[test]
fn duplicate_identifiers_are_rejected() {
    let a = gaussian("same", vec![CheckName::Centering]).resolve().unwrap();
    assert!(run_suite(&[a.clone(), a]).unwrap_err().to_string().contains("twice"));
}

#[test]
fn a_failing_check_does_not_abort_the_suite() {
    let mut bad = gaussian("bad", vec![CheckName::DivergencePairing, CheckName::Centering]);
    // the origin is not interior to L, so the pairing is undefined
    bad.bodies.l = Some(BodySpec::Box { lo: vec![0.5, 0.5], hi: vec![1.0, 1.0] });
    let good = gaussian("good", vec![CheckName::Centering]);
    let reports = run_suite(&[bad.resolve().unwrap(), good.resolve().unwrap()]).unwrap();
    let bad = &reports[0];
    assert_eq!(bad.checks.len(), 2);
    let pairing = bad.checks.iter().find(|c| c.name == "divergence-pairing").unwrap();
    assert!(!pairing.pass && pairing.error.is_some());
    assert!(bad.checks.iter().find(|c| c.name == "centering").unwrap().pass);
    assert!(reports[1].passed());
}

#[test]
fn report_json_round_trip_and_version_guard() {
    let r = gaussian("json", vec![CheckName::Centering]).resolve().unwrap();
    let report = lcgeom_harness::run_scenario(&r);
    let text = report.to_json();
    assert_eq!(Report::from_json(&text).unwrap(), report);
    let bumped = text.replacen(&format!("\"schema_version\": \"{}\"", lcgeom_harness::SCHEMA_VERSION), "\"schema_version\": \"2.0\"", 1);
    assert!(Report::from_json(&bumped).unwrap_err().contains("incompatible"));
}
