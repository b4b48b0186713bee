use std::time::Duration;

use infconv::subdiff::{frechet_test, rhs_frechet, SamplingPlan, Verdict};
use infconv::verifier::*;
use infconv::{ConvexBody, Covector, Error, Gauge, PNorm, Vector};

fn quick() -> CheckSettings {
    CheckSettings { gauge_trials: 2000, covectors: 200, polar_covectors: 200, ..CheckSettings::default() }
}

fn v(c: &[f64]) -> Vector {
    Vector::new(c.to_vec()).unwrap()
}

#[test]
fn gauge_checks_pass_on_intact_bodies() {
    let settings = CheckSettings::default();
    let simplex = Gauge::new(ConvexBody::vpolytope(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap());
    let r = check_gauge_properties("simplex", &simplex, &settings);
    assert_eq!(r.verdict, CheckVerdict::Pass, "{:?}", r.counterexamples);
    assert!(r.trials >= 10_000);
    let ball = Gauge::new(ConvexBody::euclidean_ball(2));
    let r = check_gauge_properties("ball", &ball, &settings);
    assert_eq!(r.verdict, CheckVerdict::Pass, "{:?}", r.counterexamples);
    let cube = Gauge::new(ConvexBody::norm_ball(PNorm::LInf, 0.5, 3).unwrap());
    assert_eq!(check_gauge_properties("cube", &cube, &quick()).verdict, CheckVerdict::Pass);
}

#[test]
fn corrupted_gauge_fails_with_witness() {
    let ball = CorruptedGauge(Gauge::new(ConvexBody::euclidean_ball(2)));
    let r = check_gauge_properties("ball", &ball, &quick());
    assert_eq!(r.verdict, CheckVerdict::Fail);
    assert!(r.disagreements > 0);
    assert!(!r.counterexamples.is_empty() && r.counterexamples.len() <= MAX_COUNTEREXAMPLES);
    assert!(r.counterexamples.iter().all(|c| !c.input.is_empty()));
}

#[test]
fn inclusion_on_the_distance_fixture() {
    let fx = bundled_fixture("halfplane_ball").unwrap();
    for eps in [0.0, 0.25] {
        let r = check_upper_estimate(&fx, eps, &quick());
        assert_eq!(r.verdict, CheckVerdict::Pass, "{:?}", r.counterexamples);
        assert_eq!(r.disagreements, 0);
    }
}

#[test]
fn distance_fixture_equality_decides_almost_everything() {
    let fx = bundled_fixture("halfplane_ball").unwrap();
    let r = check_frechet_equality(&fx, &CheckSettings::default());
    assert_eq!(r.verdict, CheckVerdict::Pass, "{:?}", r.counterexamples);
    assert_eq!(r.disagreements, 0);
    assert!(r.undetermined * 50 <= r.trials, "{} of {}", r.undetermined, r.trials);
    assert!(r.worst_gap.unwrap() <= 0.05);
}

#[test]
fn corrupted_rhs_fails_and_counterexamples_reproduce() {
    let fx = bundled_fixture("halfplane_ball").unwrap();
    let settings = CheckSettings { fault: Some(Fault::RhsPredicate), ..quick() };
    let r = check_frechet_equality(&fx, &settings);
    assert_eq!(r.verdict, CheckVerdict::Fail);
    let plan = SamplingPlan::for_dim(2);
    let t = fx.transform();
    let mut replayed = 0;
    for c in r.counterexamples.iter().filter(|c| c.input.len() == 2) {
        let xbar = v(c.base_point.as_ref().unwrap());
        let y = Covector::new(c.input.clone()).unwrap();
        let lhs = frechet_test(t, &xbar, &y, 0.0, &plan).unwrap();
        let rhs = rhs_frechet(t, &xbar, &y.scale(2.0), 0.0, &plan).unwrap();
        assert_ne!(lhs.verdict, Verdict::Undetermined);
        assert_ne!(lhs.verdict, rhs.verdict, "{c:?}");
        replayed += 1;
    }
    assert!(replayed > 0);
}

#[test]
fn steep_perturbation_is_skipped() {
    let fx = bundled_fixture("steep_perturbation").unwrap();
    assert!(fx.known_ell.is_none());
    assert!(hypothesis_violation(&fx, 1).unwrap().is_some());
    let r = check_frechet_equality(&fx, &quick());
    assert_eq!(r.verdict, CheckVerdict::SkippedHypothesis);
    assert!(r.counterexamples[0].detail.contains("ell < m"));
    assert_eq!(check_holder_equality(&fx, &quick()).verdict, CheckVerdict::SkippedHypothesis);
    assert_eq!(check_alpha_inflation(&fx, ALPHA_EPSILON, &quick()).verdict, CheckVerdict::SkippedHypothesis);
}

#[test]
fn fixture_invariants() {
    for fx in bundled_fixtures() {
        assert!(!fx.base_points.is_empty());
        if let Some(ell) = fx.known_ell {
            assert!(ell < fx.coercivity_constant(), "{}", fx.name);
        }
    }
    let omega = infconv::Region::halfspaces(vec![(Covector::new(vec![0.0, 1.0]).unwrap(), 0.0)], 2).unwrap();
    let ball = Gauge::new(ConvexBody::euclidean_ball(2));
    let outside = Fixture::new("outside", ball.clone(), omega.clone(), None, vec![v(&[0.0, 1.0])], None);
    assert!(matches!(outside, Err(Error::Precondition(m)) if m.contains("outside")));
    let steep = Fixture::new("steep", ball, omega, None, vec![v(&[0.0, 0.0])], Some(1.0));
    assert!(matches!(steep, Err(Error::InvalidInput(_))));
}

#[test]
fn tiny_budget_fails_with_reason() {
    let fx = bundled_fixture("square_simplex").unwrap();
    let settings = CheckSettings { budget: Duration::from_nanos(1), ..quick() };
    let r = check_frechet_equality(&fx, &settings);
    assert_eq!(r.verdict, CheckVerdict::Fail);
    assert!(r.counterexamples.iter().any(|c| c.detail.starts_with("budget")));
}

#[test]
fn suite_config_errors() {
    let empty = SuiteConfig::from_json(r#"{"fixtures": []}"#).unwrap();
    assert!(matches!(run_suite(&empty), Err(Error::InvalidInput(_))));
    assert!(matches!(SuiteConfig::from_json(r#"{"fixtures": ["a"], "colour": 1}"#), Err(Error::InvalidInput(m)) if m.contains("colour")));
    let unknown = SuiteConfig::from_json(r#"{"fixtures": ["nope"]}"#).unwrap();
    assert!(run_suite(&unknown).is_err());
    let empty_region = SuiteConfig::from_json(
        r#"{"fixtures": [{"name": "hollow", "base_points": [[0, 0]], "scene": {
            "dimension": 2, "F": {"kind": "ball", "p": 2, "radius": 1},
            "Omega": {"kind": "points", "points": []}}}]}"#,
    )
    .unwrap();
    match run_suite(&empty_region) {
        Err(e) => assert!(e.to_string().contains("hollow"), "{e}"),
        Ok(_) => panic!("empty region accepted"),
    }
}

#[test]
fn small_suite_is_deterministic_and_sorted() {
    let cfg = SuiteConfig::from_json(
        r#"{"fixtures": ["ray_interval_1d", "two_point_ball"], "seed": 11, "gauge_trials": 1000, "covectors": 100}"#,
    )
    .unwrap();
    let a = run_suite(&cfg).unwrap();
    let b = run_suite(&cfg).unwrap();
    assert!(a.passed(), "{}", a.to_jsonl());
    assert_eq!(a.to_jsonl(), b.to_jsonl());
    let keys: Vec<(String, String)> = a.records.iter().map(|r| (r.check_id.clone(), r.fixture.clone())).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(a.records.iter().any(|r| r.check_id == "degenerate_branches" && r.verdict == CheckVerdict::Pass));
    assert_eq!(a.count(CheckVerdict::Fail), 0);
}

#[test]
fn inline_fixture_runs() {
    let cfg = SuiteConfig::from_json(
        r#"{"fixtures": [{"name": "segment", "base_points": [[0, 0]], "known_ell": 0, "scene": {
            "dimension": 2, "F": {"kind": "ball", "p": 1, "radius": 1},
            "Omega": {"kind": "vpolytope", "vertices": [[0, 0], [1, 0]]}}}],
            "gauge_trials": 500, "covectors": 60}"#,
    )
    .unwrap();
    let report = run_suite(&cfg).unwrap();
    assert!(report.passed(), "{}", report.to_jsonl());
    assert!(report.records.iter().any(|r| r.fixture == "segment" && r.check_id == "holder_equality"));
}
