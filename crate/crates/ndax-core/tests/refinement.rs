//! End-to-end checks of the tireworld refinement mapping: reachability of
//! the refined state space, properness, the execution constraints, and the
//! soundness, completeness, and bisimulation verdicts.

mod common;

use ndax_core::abstraction::ConstraintKind;
use ndax_core::limits::Limits;

#[test]
fn refined_reachability_keeps_the_truck_at_one_location() {
    let session = common::tireworld_session();
    let mapping = session.mapping("tire").unwrap();
    let ll = session.theory("tire_ll").unwrap();
    let names = session.names();
    let at = names.get("At_LL").unwrap();
    let flat = names.get("Flat_LL").unwrap();
    let locations: Vec<_> = ["11", "12", "13", "21", "22", "31"]
        .iter()
        .map(|loc| names.get(loc).unwrap())
        .collect();

    let reachable = mapping.refinement_reachable(&Limits::default()).unwrap();
    assert!(!reachable.is_empty());
    for state in &reachable {
        let here = locations
            .iter()
            .filter(|&&loc| ll.holds(state, at, &[loc]).unwrap())
            .count();
        assert_eq!(here, 1, "state {:?}", ll.render_state(state));
    }

    let twelve = names.get("12").unwrap();
    assert!(
        reachable
            .iter()
            .any(|s| ll.holds(s, at, &[twelve]).unwrap() && ll.holds(s, flat, &[]).unwrap()),
        "a trip that ends with an unrepaired flat at 12 must be reachable"
    );
}

#[test]
fn tireworld_mapping_is_proper() {
    let session = common::tireworld_session();
    let mapping = session.mapping("tire").unwrap();
    let check = mapping.check_proper_mapping(&Limits::default()).unwrap();
    assert!(check.passed(), "{:?}", check.witness);
    assert!(check.states_checked > 0);
}

#[test]
fn tireworld_mapping_satisfies_every_execution_constraint() {
    let session = common::tireworld_session();
    let mapping = session.mapping("tire").unwrap();
    let limits = Limits::default();
    for kind in [
        ConstraintKind::InevitableTermination,
        ConstraintKind::AgentExecutable,
        ConstraintKind::EnvironmentExecutable,
    ] {
        let check = mapping.check_constraint(kind, &limits).unwrap();
        assert!(check.passed(), "{}: {:?}", kind.key(), check.witness);
    }
}

#[test]
fn dropping_the_repair_branch_fails_properness_at_a_flat_spare_state() {
    let mut session = common::tireworld_session();
    session
        .load_mapping_file(common::fixture("tireworld/tire_mutant.ndm"))
        .unwrap();
    let mapping = session.mapping("tire_mutant").unwrap();
    let check = mapping.check_proper_mapping(&Limits::default()).unwrap();
    assert!(!check.passed());

    let witness = check.witness.unwrap();
    assert!(witness.action.starts_with("driveAndTryFix("));
    assert!(
        witness.detail.contains("under some reaction"),
        "the stray end state comes from the system side: {}",
        witness.detail
    );

    let ll = session.theory("tire_ll").unwrap();
    let names = session.names();
    let end = witness.end_state.unwrap();
    assert!(ll.holds(&end, names.get("Flat_LL").unwrap(), &[]).unwrap());
    let destination = witness
        .action
        .trim_end_matches(')')
        .rsplit(',')
        .next()
        .unwrap()
        .trim();
    let spare = names.get("Spare_LL").unwrap();
    assert!(
        ll.holds(&end, spare, &[names.get(destination).unwrap()]).unwrap(),
        "the flat tire is left at a location that stocks a spare: {}",
        witness.action
    );
}

#[test]
fn tireworld_abstraction_is_sound_and_complete() {
    let session = common::tireworld_session();
    let mapping = session.mapping("tire").unwrap();
    let limits = Limits::default();

    let report = mapping.verify_sound_abstraction(&limits).unwrap();
    for check in &report.checks {
        assert!(check.passed(), "{}: {:?}", check.check, check.witness);
    }
    assert_eq!(report.checks.len(), 3);

    let complete = mapping.verify_complete_abstraction(&limits).unwrap();
    assert!(complete.passed(), "{:?}", complete.witness);
}

#[test]
fn logistics_mapping_with_set_valued_reactions_is_proper() {
    let session = common::logistics_session();
    let mapping = session.mapping("logistics").unwrap();
    let check = mapping.check_proper_mapping(&Limits::default()).unwrap();
    assert!(check.passed(), "{:?}", check.witness);
    assert!(check.states_checked > 0);
}

#[test]
fn tireworld_models_are_bisimilar_from_their_initial_states() {
    let session = common::tireworld_session();
    let mapping = session.mapping("tire").unwrap();
    let limits = Limits::default();
    let hl0 = &session.theory("tire_hl").unwrap().initial_states(&limits).unwrap()[0];
    let ll0 = &session.theory("tire_ll").unwrap().initial_states(&limits).unwrap()[0];

    let bisim = mapping.compute_m_bisimulation(hl0, ll0, &limits).unwrap();
    assert!(bisim.initial_included);
    assert_eq!(bisim.hl_partners(ll0), vec![hl0]);
}
