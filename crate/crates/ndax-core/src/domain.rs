//! Ground NDBAT representation: object universes, formulas, states, and
//! theories with precondition, successor-state, and well-formedness
//! evaluation.

mod eval;
mod formula;
mod state;
pub(crate) mod theory;
mod universe;

pub use eval::{eval_formula, Env};
pub use formula::{Formula, Term, UpdatePat};
pub use state::{AtomTable, State, StateStore};
pub use theory::{
    ActionSchema, FluentSchema, GroundAgentAction, GroundSystemAction, GroundTheory, Ssa, Trace,
    ValidationReport, ValidationViolation,
};
pub use universe::{ReactionSort, SortDef, Sorts, UpdateAtom, UpdateFamily, Value, VarDomain};

pub type SortId = usize;
pub type FluentId = usize;
pub type ActionId = usize;
