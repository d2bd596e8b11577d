//! Finite-domain engine for agents acting in nondeterministic environments.
//!
//! The crate grounds nondeterministic basic action theories (NDBATs) and
//! ConGolog programs over finite object universes, solves reachability games
//! for weak/strong plans and program-execution strategies, verifies refinement
//! mappings and bisimulation-based abstraction between a high-level and a
//! low-level theory, refines high-level strategies into low-level ones, and
//! explains low-level traces as unique high-level action sequences.

pub mod abstraction;
pub mod congolog;
pub mod domain;
pub mod error;
pub mod games;
pub mod intern;
pub mod limits;
pub mod monitor;
pub mod pipeline;
pub mod syntax;

pub use error::{Error, Result};
pub use limits::Limits;
