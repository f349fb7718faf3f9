mod common;

use std::time::{Duration, Instant};

use common::{corpus, load, scenario_problem};
use vnfscale::chain_state::ChainState;
use vnfscale::scaling::{forwarding_cost_of, Action};
use vnfscale::scenario::{run_loaded, Overrides, Scenario, ScenarioError, SolverKind};

#[test]
fn corpus_meets_its_expectations() {
    let files = corpus();
    assert!(files.len() >= 15);
    for (name, s) in files {
        assert!(s.expect.is_some(), "{name} has no expectations");
        let start = Instant::now();
        let report = run_loaded(&s, &Overrides::default()).unwrap();
        assert!(report.expectation_failures.is_empty(), "{name}: {:?}", report.expectation_failures);
        assert!(start.elapsed() < Duration::from_secs(60), "{name} took {:?}", start.elapsed());
        assert_eq!(report.decision.is_some(), report.state != ChainState::Normal, "{name}");
    }
}

#[test]
fn cost_delta_round_trips_through_flows() {
    for (name, s) in corpus() {
        let report = run_loaded(&s, &Overrides::default()).unwrap();
        let Some(d) = report.decision else { continue };
        let cost = forwarding_cost_of(&d.flows, &s.topology).unwrap();
        assert_eq!(cost, d.forwarding_cost, "{name}");
        let base = d.baseline_cost.unwrap();
        assert_eq!(Some((cost - base) / base), d.cost_delta, "{name}");
    }
}

#[test]
fn normal_chain_solves_nothing() {
    let report = run_loaded(&load("all_normal"), &Overrides::default()).unwrap();
    assert_eq!(report.state, ChainState::Normal);
    assert!(report.decision.is_none() && report.stats.is_empty());
    assert!(report.to_string().contains("no scaling needed"));
}

#[test]
fn detection_picks_the_middle_group() {
    let s = load("detect_overload");
    assert_eq!(s.detect().unwrap(), (ChainState::Overload, Some(1)));
    assert_eq!(s.groups[1].ingress_pms, vec![0]);
    assert_eq!(s.groups[1].egress_pms, vec![3]);
    let s = load("detect_underload");
    assert_eq!(s.detect().unwrap(), (ChainState::Underload, Some(1)));
}

#[test]
fn traffic_presets() {
    let p = scenario_problem("row1_overload_v4");
    assert_eq!((p.traffic, p.v_star), (20.0, 4));
    assert!((p.phi - 0.25).abs() < 1e-15);
    let p = scenario_problem("row1_underload");
    assert_eq!((p.traffic, p.v_star), (5.0, 1));
}

#[test]
fn restricted_candidates_leave_other_pms_full() {
    let p = scenario_problem("row3_overload_v4");
    assert_eq!(p.free_slots(0), 0);
    assert_eq!(p.free_slots(1), 0);
    assert_eq!(p.free_slots(2), 1);
    assert_eq!(p.candidate_set(), (2..16).collect::<Vec<_>>());
}

#[test]
fn milp_keeps_overloaded_vms_and_adds_capacity() {
    let s = load("row3_overload_v4");
    let o = Overrides { solver: Some(SolverKind::Milp), ..Overrides::default() };
    let report = run_loaded(&s, &o).unwrap();
    let d = report.decision.unwrap();
    assert!(!d.actions.iter().any(|a| matches!(a, Action::Terminate { .. })));
    assert_eq!(d.launch_hosts(), vec![2, 3]);
    assert!((d.total_share() - 1.0).abs() < 1e-8);
}

#[test]
fn underload_milp_turns_a_vm_off() {
    let s = load("row1_underload");
    let o = Overrides { solver: Some(SolverKind::Milp), ..Overrides::default() };
    let report = run_loaded(&s, &o).unwrap();
    assert!(report.expectation_failures.is_empty(), "{:?}", report.expectation_failures);
}

fn parse(text: &str) -> Result<Scenario, ScenarioError> {
    Scenario::from_toml(text)
}

const MINIMAL: &str = r#"
[topology]
k = 4
[[group]]
ingress = ["P1"]
egress = ["P4"]
omega = { cpu = 0.1 }
capacity = { cpu = 0.55 }
vms = [{ pm = "P2", util = { cpu = 0.5 } }]
[event]
traffic = 10.0
"#;

#[test]
fn parse_errors_are_classified() {
    assert!(parse(MINIMAL).is_ok());
    let e = parse("not toml at all [").unwrap_err();
    assert!(matches!(e, ScenarioError::Parse(_)));
    assert_eq!(e.exit_code(), 2);
    let e = parse(&MINIMAL.replace("P2", "P99")).unwrap_err();
    assert!(matches!(e, ScenarioError::Invalid(_)), "{e}");
    let e = parse(&MINIMAL.replace("k = 4", "k = 3")).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    let e = parse(&MINIMAL.replace("traffic = 10.0", "traffic = 10.0\nsurprise = 1")).unwrap_err();
    assert!(matches!(e, ScenarioError::Parse(_)));
    let e = parse(&format!("{}\n[solver]\nkind = \"simplex\"\n", MINIMAL)).unwrap_err();
    assert!(matches!(e, ScenarioError::Invalid(_)));
    let two_targets = MINIMAL.replace("[[group]]", "[[group]]\ntarget = true") + &MINIMAL[MINIMAL.find("[[group]]").unwrap()..MINIMAL.find("[event]").unwrap()].replace("[[group]]", "[[group]]\ntarget = true");
    assert!(parse(&two_targets).is_err());
}

#[test]
fn pool_shortfall_is_infeasible() {
    let text = MINIMAL.replace("util = { cpu = 0.5 }", "util = { cpu = 0.95 }").replace("cpu = 0.1", "cpu = 0.05");
    let s = parse(&text).unwrap();
    let e = run_loaded(&s, &Overrides::default()).unwrap_err();
    assert_eq!(e.exit_code(), 3, "{e}");
}
