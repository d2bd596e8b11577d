//! Shared helpers for the integration tests: fixture paths and sessions
//! preloaded with the example domains.

#![allow(dead_code)]

use std::path::PathBuf;

use ndax_core::syntax::Session;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

pub fn tireworld_session() -> Session {
    let mut session = Session::new();
    session.load_theory_file(fixture("tireworld/tire_ll.ndt")).unwrap();
    session.load_theory_file(fixture("tireworld/tire_hl.ndt")).unwrap();
    session.load_mapping_file(fixture("tireworld/tire.ndm")).unwrap();
    session
}

pub fn tireworld_plus_session() -> Session {
    let mut session = Session::new();
    session.load_theory_file(fixture("tireworld_plus/ttplus_ll.ndt")).unwrap();
    session.load_theory_file(fixture("tireworld_plus/ttplus_hl.ndt")).unwrap();
    session.load_mapping_file(fixture("tireworld_plus/ttplus.ndm")).unwrap();
    session
}

pub fn logistics_session() -> Session {
    let mut session = Session::new();
    session.load_theory_file(fixture("logistics/logistics_ll.ndt")).unwrap();
    session.load_theory_file(fixture("logistics/logistics_hl.ndt")).unwrap();
    session.load_mapping_file(fixture("logistics/logistics.ndm")).unwrap();
    session
}
