//! End-to-end checks of the bundled example domains: loading, validation,
//! and hand-checked execution facts.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::{fixture, logistics_session, tireworld_plus_session, tireworld_session};
use ndax_core::congolog::end_states;
use ndax_core::domain::{GroundTheory, State, UpdateAtom, Value};
use ndax_core::syntax::Session;
use ndax_core::Limits;

fn sym(theory: &GroundTheory, name: &str) -> ndax_core::intern::Sym {
    theory
        .names
        .get(name)
        .unwrap_or_else(|| panic!("name {name} not interned"))
}

fn initial(theory: &GroundTheory) -> State {
    let states = theory.initial_states(&Limits::default()).unwrap();
    assert_eq!(states.len(), 1, "expected a single initial model");
    states.into_iter().next().unwrap()
}

fn holds(theory: &GroundTheory, state: &State, fluent: &str, args: &[&str]) -> bool {
    let args: Vec<_> = args.iter().map(|a| sym(theory, a)).collect();
    theory.holds(state, sym(theory, fluent), &args).unwrap()
}

#[test]
fn every_bundled_theory_validates() {
    let limits = Limits::default();
    let mut session = Session::new();
    for path in [
        "tireworld/tire_ll.ndt",
        "tireworld/tire_hl.ndt",
        "tireworld_plus/ttplus_ll.ndt",
        "tireworld_plus/ttplus_hl.ndt",
        "logistics/logistics_ll.ndt",
        "logistics/logistics_hl.ndt",
    ] {
        let theory = session.load_theory_file(fixture(path)).unwrap();
        let report = theory.validate(&limits).unwrap();
        assert!(
            report.passed(),
            "{path} has reaction violations: {:?}",
            report.violations
        );
        assert!(report.states_explored > 0);
    }
}

#[test]
fn bundled_mappings_load() {
    tireworld_session();
    tireworld_plus_session();
    logistics_session();
    let mut session = tireworld_session();
    session
        .load_mapping_file(fixture("tireworld/tire_mutant.ndm"))
        .unwrap();
}

#[test]
fn tireworld_initial_state_facts() {
    let session = tireworld_session();
    let ll = session.theory("tire_ll").unwrap();
    let s0 = initial(&ll);

    assert!(holds(&ll, &s0, "At_LL", &["11"]));
    assert!(!holds(&ll, &s0, "Flat_LL", &[]));
    assert!(holds(&ll, &s0, "Spare_LL", &["21"]));
    assert!(!holds(&ll, &s0, "Spare_LL", &["11"]));
    assert!(holds(&ll, &s0, "Road_LL", &["12", "13"]));
    assert!(!holds(&ll, &s0, "Road_LL", &["11", "13"]));

    let drive = ll
        .ground_agent_action(sym(&ll, "drive"), vec![sym(&ll, "11"), sym(&ll, "12")])
        .unwrap();
    assert!(ll.poss_ag(&s0, &drive).unwrap());
    assert_eq!(ll.legal_reactions(&s0, &drive).unwrap().len(), 2);

    let fix = ll
        .ground_agent_action(sym(&ll, "fixFlatTire"), vec![sym(&ll, "11")])
        .unwrap();
    assert!(!ll.poss_ag(&s0, &fix).unwrap());
    assert!(ll.legal_reactions(&s0, &fix).unwrap().is_empty());

    assert!(ll
        .ground_system_action(
            sym(&ll, "drive"),
            vec![sym(&ll, "11"), sym(&ll, "12")],
            Value::Obj(sym(&ll, "Success_LF")),
        )
        .is_err());
}

#[test]
fn driving_into_a_flat_updates_the_state() {
    let session = tireworld_session();
    let ll = session.theory("tire_ll").unwrap();
    let s0 = initial(&ll);

    let act = ll
        .ground_system_action(
            sym(&ll, "drive"),
            vec![sym(&ll, "11"), sym(&ll, "12")],
            Value::Obj(sym(&ll, "FlatTire")),
        )
        .unwrap();
    let s1 = ll.successor(&s0, &act).unwrap();
    assert!(holds(&ll, &s1, "At_LL", &["12"]));
    assert!(!holds(&ll, &s1, "At_LL", &["11"]));
    assert!(holds(&ll, &s1, "Flat_LL", &[]));
    assert!(holds(&ll, &s1, "Visited_LL", &["11"]));
    assert!(holds(&ll, &s1, "Visited_LL", &["12"]));
    assert!(!holds(&ll, &s1, "Visited_LL", &["13"]));

    let fix_here = ll
        .ground_system_action(
            sym(&ll, "fixFlatTire"),
            vec![sym(&ll, "12")],
            Value::Obj(sym(&ll, "Success_LF")),
        )
        .unwrap();
    assert!(ll.successor(&s1, &fix_here).is_err(), "no spare at 12");

    let drive_on = ll
        .ground_agent_action(sym(&ll, "drive"), vec![sym(&ll, "12"), sym(&ll, "13")])
        .unwrap();
    assert!(!ll.poss_ag(&s1, &drive_on).unwrap(), "cannot drive on a flat");
}

#[test]
fn trip_refinement_reaches_the_destination() {
    let session = tireworld_session();
    let ll = session.theory("tire_ll").unwrap();
    let map = session.mapping("tire").unwrap();
    let s0 = initial(&ll);
    let limits = Limits::default();

    let hl = session.theory("tire_hl").unwrap();
    let trip = ll
        .ground_agent_action(sym(&hl, "driveAndTryFix"), vec![sym(&ll, "11"), sym(&ll, "21")]);
    assert!(trip.is_err(), "high-level action is not part of the low-level theory");

    let trip = hl
        .ground_agent_action(sym(&hl, "driveAndTryFix"), vec![sym(&hl, "11"), sym(&hl, "21")])
        .unwrap();
    let agent = map.agent_program(&trip).unwrap();
    let ends = end_states(&ll, &agent, &s0, &limits).unwrap();
    assert_eq!(ends.len(), 1, "flat-and-fix collapses with the clean drive");
    assert!(holds(&ll, &ends[0], "At_LL", &["21"]));
    assert!(!holds(&ll, &ends[0], "Flat_LL", &[]));

    let fix_trip = hl
        .ground_system_action(
            sym(&hl, "driveAndTryFix"),
            vec![sym(&hl, "11"), sym(&hl, "21")],
            Value::Obj(sym(&hl, "DrvFlatFix")),
        )
        .unwrap();
    let ends = end_states(&ll, &map.system_program(&fix_trip).unwrap(), &s0, &limits).unwrap();
    assert_eq!(ends.len(), 1);
    assert!(holds(&ll, &ends[0], "At_LL", &["21"]));
    assert!(!holds(&ll, &ends[0], "Flat_LL", &[]));

    let flat_trip = hl
        .ground_system_action(
            sym(&hl, "driveAndTryFix"),
            vec![sym(&hl, "11"), sym(&hl, "21")],
            Value::Obj(sym(&hl, "DrvFlat")),
        )
        .unwrap();
    let ends = end_states(&ll, &map.system_program(&flat_trip).unwrap(), &s0, &limits).unwrap();
    assert!(ends.is_empty(), "a spare at 21 rules out ending with a flat");
}

#[test]
fn extended_tireworld_buying_clears_the_flags() {
    let session = tireworld_plus_session();
    let ll = session.theory("ttplus_ll").unwrap();
    let hl = session.theory("ttplus_hl").unwrap();
    let map = session.mapping("ttplus").unwrap();
    let limits = Limits::default();

    assert_eq!(hl.initial_states(&limits).unwrap().len(), 4);

    let s0 = initial(&ll);
    let flat_at_12 = ll
        .ground_system_action(
            sym(&ll, "drive"),
            vec![sym(&ll, "11"), sym(&ll, "12")],
            Value::Obj(sym(&ll, "FlatTire")),
        )
        .unwrap();
    let s1 = ll.successor(&s0, &flat_at_12).unwrap();

    let buy = hl
        .ground_system_action(
            sym(&hl, "buyAndFix"),
            vec![sym(&hl, "12")],
            Value::Obj(sym(&hl, "Succ_HBuy")),
        )
        .unwrap();
    let ends = end_states(&ll, &map.system_program(&buy).unwrap(), &s1, &limits).unwrap();
    assert_eq!(ends.len(), 1);
    let done = &ends[0];
    assert!(!holds(&ll, done, "Flat_LL", &[]));
    assert!(!holds(&ll, done, "Ordered_LL", &["12"]), "repair consumes the order");
    assert!(!holds(&ll, done, "Paid_LL", &["12"]));
    assert!(holds(&ll, done, "At_LL", &["12"]));

    let service = hl
        .ground_system_action(
            sym(&hl, "serviceAndFix"),
            vec![sym(&hl, "12")],
            Value::Obj(sym(&hl, "Succ_HServ")),
        )
        .unwrap();
    let ends = end_states(&ll, &map.system_program(&service).unwrap(), &s1, &limits).unwrap();
    assert_eq!(ends.len(), 1, "12 lies inside the service zone");
    assert!(!holds(&ll, &ends[0], "CalledSrv_LL", &["12"]));
}

#[test]
fn route_report_reactions_and_closure() {
    let session = logistics_session();
    let hl = session.theory("logistics_hl").unwrap();
    let ll = session.theory("logistics_ll").unwrap();

    let hl0 = initial(&hl);
    let check_routes = hl.ground_agent_action(sym(&hl, "checkRouteStatus"), vec![]).unwrap();
    assert_eq!(hl.legal_reactions(&hl0, &check_routes).unwrap().len(), 9);

    let ll0 = initial(&ll);
    let check_roads = ll.ground_agent_action(sym(&ll, "checkRoadStatus"), vec![]).unwrap();
    assert_eq!(ll.legal_reactions(&ll0, &check_roads).unwrap().len(), 243);

    let close_a: BTreeSet<UpdateAtom> = [UpdateAtom {
        family: sym(&hl, "close_Rt"),
        args: vec![sym(&hl, "Rt_A")],
    }]
    .into_iter()
    .collect();
    let report = hl
        .ground_system_action(
            sym(&hl, "checkRouteStatus"),
            vec![],
            Value::Set(Arc::new(close_a)),
        )
        .unwrap();
    let s1 = hl.successor(&hl0, &report).unwrap();
    assert!(holds(&hl, &s1, "Closed_Rt", &["Rt_A"]));
    assert!(!holds(&hl, &s1, "Closed_Rt", &["Rt_B"]));
    assert!(holds(&hl, &s1, "At_HL", &["L0"]));

    let take = hl
        .ground_agent_action(
            sym(&hl, "takeRoute"),
            vec![sym(&hl, "Rt_A"), sym(&hl, "L0"), sym(&hl, "L2")],
        )
        .unwrap();
    assert!(hl.poss_ag(&hl0, &take).unwrap());
    assert!(!hl.poss_ag(&s1, &take).unwrap(), "route A is now closed");
}

#[test]
fn route_trip_refinement_hops_through_the_middle() {
    let session = logistics_session();
    let ll = session.theory("logistics_ll").unwrap();
    let hl = session.theory("logistics_hl").unwrap();
    let map = session.mapping("logistics").unwrap();
    let limits = Limits::default();
    let s0 = initial(&ll);

    let trip_ok = hl
        .ground_system_action(
            sym(&hl, "takeRoute"),
            vec![sym(&hl, "Rt_A"), sym(&hl, "L0"), sym(&hl, "L2")],
            Value::Obj(sym(&hl, "Success_HL")),
        )
        .unwrap();
    let ends = end_states(&ll, &map.system_program(&trip_ok).unwrap(), &s0, &limits).unwrap();
    assert_eq!(ends.len(), 1);
    assert!(holds(&ll, &ends[0], "At_LL", &["L2"]));

    let trip_fail = hl
        .ground_system_action(
            sym(&hl, "takeRoute"),
            vec![sym(&hl, "Rt_A"), sym(&hl, "L0"), sym(&hl, "L2")],
            Value::Obj(sym(&hl, "Failure_HL")),
        )
        .unwrap();
    let ends = end_states(&ll, &map.system_program(&trip_fail).unwrap(), &s0, &limits).unwrap();
    assert_eq!(ends.len(), 1, "failed trips leave the truck at the origin");
    assert!(holds(&ll, &ends[0], "At_LL", &["L0"]));

    let close_rd_a: BTreeSet<UpdateAtom> = [UpdateAtom {
        family: sym(&ll, "close_Rd"),
        args: vec![sym(&ll, "Rd_a")],
    }]
    .into_iter()
    .collect();
    let blocked = ll
        .ground_system_action(
            sym(&ll, "checkRoadStatus"),
            vec![],
            Value::Set(Arc::new(close_rd_a)),
        )
        .unwrap();
    let s1 = ll.successor(&s0, &blocked).unwrap();
    let ends = end_states(&ll, &map.system_program(&trip_ok).unwrap(), &s1, &limits).unwrap();
    assert!(ends.is_empty(), "the only first hop is closed");

    let closed_rt_a = map
        .fluent_formula(sym(&hl, "Closed_Rt"), &[ndax_core::domain::Term::Obj(sym(&hl, "Rt_A"))])
        .unwrap();
    let mut env = ndax_core::domain::Env::plain();
    assert!(ndax_core::domain::eval_formula(&ll, &s1, &mut env, &closed_rt_a).unwrap());
    let mut env = ndax_core::domain::Env::plain();
    assert!(!ndax_core::domain::eval_formula(&ll, &s0, &mut env, &closed_rt_a).unwrap());
}

#[test]
fn strategy_fixtures_are_well_formed_json() {
    for rel in ["tireworld/f_h.json", "tireworld/f_l.json"] {
        let text = std::fs::read_to_string(fixture(rel)).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(doc["theory"].is_string());
        assert!(!doc["decisions"].as_array().unwrap().is_empty());
    }
}
