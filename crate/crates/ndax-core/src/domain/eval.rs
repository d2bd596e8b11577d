//! Formula evaluation against a state, with guided expansion of existential
//! quantifiers so large reaction domains are rarely enumerated.

use crate::domain::formula::{Formula, Term};
use crate::domain::state::State;
use crate::domain::theory::{GroundSystemAction, GroundTheory};
use crate::domain::universe::{UpdateAtom, Value, VarDomain};
use crate::error::{Error, Result};
use crate::intern::Sym;

/// Variable bindings plus the action bound while a successor-state axiom
/// body is evaluated. Bindings form a stack; later entries shadow earlier
/// ones.
pub struct Env<'a> {
    stack: Vec<(Sym, Value)>,
    pub action: Option<&'a GroundSystemAction>,
}

impl<'a> Env<'a> {
    pub fn plain() -> Env<'static> {
        Env { stack: Vec::new(), action: None }
    }

    pub fn with_action(action: &'a GroundSystemAction) -> Env<'a> {
        Env { stack: Vec::new(), action: Some(action) }
    }

    pub fn bind(&mut self, var: Sym, value: Value) {
        self.stack.push((var, value));
    }

    pub fn pop(&mut self) {
        self.stack.pop();
    }

    pub fn snapshot(&self) -> usize {
        self.stack.len()
    }

    pub fn rewind(&mut self, mark: usize) {
        self.stack.truncate(mark);
    }

    pub fn lookup(&self, var: Sym) -> Option<&Value> {
        self.stack.iter().rev().find(|(v, _)| *v == var).map(|(_, value)| value)
    }
}

fn resolve_term(theory: &GroundTheory, env: &Env, term: &Term) -> Result<Value> {
    match term {
        Term::Var(v) => env.lookup(*v).cloned().ok_or_else(|| {
            Error::execution(format!("unbound variable {}", theory.names.resolve(*v)))
        }),
        Term::Obj(sym) => Ok(Value::Obj(*sym)),
        Term::SetLit(set) => Ok(Value::Set(set.clone())),
    }
}

fn try_resolve(env: &Env, term: &Term) -> Option<Value> {
    match term {
        Term::Var(v) => env.lookup(*v).cloned(),
        Term::Obj(sym) => Some(Value::Obj(*sym)),
        Term::SetLit(set) => Some(Value::Set(set.clone())),
    }
}

pub fn eval_formula(
    theory: &GroundTheory,
    state: &State,
    env: &mut Env<'_>,
    formula: &Formula,
) -> Result<bool> {
    match formula {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Atom { fluent, args } => {
            let id = theory.fluent_id(*fluent).ok_or_else(|| {
                Error::execution(format!(
                    "unknown fluent {} in formula",
                    theory.names.resolve(*fluent)
                ))
            })?;
            let mut ground = Vec::with_capacity(args.len());
            for term in args {
                match resolve_term(theory, env, term)? {
                    Value::Obj(sym) => ground.push(sym),
                    Value::Set(_) => {
                        return Err(Error::execution(format!(
                            "set value in argument position of fluent {}",
                            theory.names.resolve(*fluent)
                        )))
                    }
                }
            }
            let atom = theory.atoms.atom_id(&theory.sorts, id, &ground).ok_or_else(|| {
                Error::execution(format!(
                    "fluent {} applied outside its sorts",
                    theory.names.resolve(*fluent)
                ))
            })?;
            Ok(state.get(atom))
        }
        Formula::Eq(a, b) => {
            Ok(resolve_term(theory, env, a)? == resolve_term(theory, env, b)?)
        }
        Formula::InReaction { atom, set } => {
            let set_value = resolve_term(theory, env, set)?;
            let Value::Set(members) = set_value else {
                return Err(Error::execution(
                    "membership test applied to a non-set reaction".to_string(),
                ));
            };
            let mut ground = Vec::with_capacity(atom.args.len());
            for term in &atom.args {
                match resolve_term(theory, env, term)? {
                    Value::Obj(sym) => ground.push(sym),
                    Value::Set(_) => {
                        return Err(Error::execution(
                            "set value inside an update atom".to_string(),
                        ))
                    }
                }
            }
            Ok(members.contains(&UpdateAtom { family: atom.family, args: ground }))
        }
        Formula::ActEq { action, args, reaction } => {
            let act = env.action.ok_or_else(|| {
                Error::execution("action equation evaluated without a bound action".to_string())
            })?;
            if act.name != *action {
                return Ok(false);
            }
            if act.args.len() != args.len() {
                return Err(Error::execution(format!(
                    "action equation for {} has wrong arity",
                    theory.names.resolve(*action)
                )));
            }
            for (term, &actual) in args.iter().zip(&act.args) {
                if resolve_term(theory, env, term)? != Value::Obj(actual) {
                    return Ok(false);
                }
            }
            Ok(resolve_term(theory, env, reaction)? == act.reaction)
        }
        Formula::Not(inner) => Ok(!eval_formula(theory, state, env, inner)?),
        Formula::And(parts) => {
            for part in parts {
                if !eval_formula(theory, state, env, part)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(parts) => {
            for part in parts {
                if eval_formula(theory, state, env, part)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Implies(a, b) => {
            if !eval_formula(theory, state, env, a)? {
                return Ok(true);
            }
            eval_formula(theory, state, env, b)
        }
        Formula::Iff(a, b) => {
            Ok(eval_formula(theory, state, env, a)? == eval_formula(theory, state, env, b)?)
        }
        Formula::Exists(var, dom, body) => eval_exists(theory, state, env, *var, dom, body),
        Formula::Forall(var, dom, body) => {
            let mark = env.snapshot();
            for value in dom.enumerate().iter() {
                env.bind(*var, value.clone());
                let holds = eval_formula(theory, state, env, body);
                env.rewind(mark);
                if !holds? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// What scanning the body's conjuncts tells us about an existential variable.
enum Pin {
    /// The body can only hold at this value.
    Value(Value),
    /// The body holds at no value.
    Contradiction,
    Unknown,
}

/// Looks for an equation that fixes `var` in a conjunctive context: directly,
/// inside nested conjunctions, under double negation, or under an inner
/// quantifier over a nonempty domain, where a fixed value or a refuted
/// conjunct decides the whole body.
fn find_pin(env: &Env, var: Sym, formula: &Formula) -> Pin {
    match formula {
        Formula::False => Pin::Contradiction,
        Formula::And(parts) => {
            for part in parts {
                match find_pin(env, var, part) {
                    Pin::Unknown => continue,
                    decided => return decided,
                }
            }
            Pin::Unknown
        }
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Not(f) => find_pin(env, var, f),
            _ => Pin::Unknown,
        },
        Formula::Exists(v, _, body) if *v != var => find_pin(env, var, body),
        Formula::Forall(v, dom, body) if *v != var && !dom.is_empty() => {
            find_pin(env, var, body)
        }
        Formula::Eq(a, b) => {
            if let Term::Var(v) = a {
                if *v == var {
                    if let Some(value) = try_resolve(env, b) {
                        return Pin::Value(value);
                    }
                }
            }
            if let Term::Var(v) = b {
                if *v == var {
                    if let Some(value) = try_resolve(env, a) {
                        return Pin::Value(value);
                    }
                }
            }
            Pin::Unknown
        }
        Formula::ActEq { action, args, reaction } => {
            let Some(act) = env.action else { return Pin::Unknown };
            if act.name != *action {
                return Pin::Contradiction;
            }
            if act.args.len() != args.len() {
                return Pin::Unknown;
            }
            let mut pin: Option<Value> = None;
            for (term, &actual) in args.iter().zip(&act.args) {
                match term {
                    Term::Var(v) if *v == var => {
                        let candidate = Value::Obj(actual);
                        match &pin {
                            Some(existing) if *existing != candidate => {
                                return Pin::Contradiction
                            }
                            _ => pin = Some(candidate),
                        }
                    }
                    other => {
                        if let Some(value) = try_resolve(env, other) {
                            if value != Value::Obj(actual) {
                                return Pin::Contradiction;
                            }
                        }
                    }
                }
            }
            match reaction {
                Term::Var(v) if *v == var => {
                    let candidate = act.reaction.clone();
                    match &pin {
                        Some(existing) if *existing != candidate => {
                            return Pin::Contradiction
                        }
                        _ => pin = Some(candidate),
                    }
                }
                other => {
                    if let Some(value) = try_resolve(env, other) {
                        if value != act.reaction {
                            return Pin::Contradiction;
                        }
                    }
                }
            }
            match pin {
                Some(value) => Pin::Value(value),
                None => Pin::Unknown,
            }
        }
        _ => Pin::Unknown,
    }
}

fn eval_exists(
    theory: &GroundTheory,
    state: &State,
    env: &mut Env<'_>,
    var: Sym,
    dom: &VarDomain,
    body: &Formula,
) -> Result<bool> {
    match find_pin(env, var, body) {
        Pin::Contradiction => Ok(false),
        Pin::Value(value) => {
            if !dom.contains(&value) {
                return Ok(false);
            }
            let mark = env.snapshot();
            env.bind(var, value);
            let holds = eval_formula(theory, state, env, body);
            env.rewind(mark);
            holds
        }
        Pin::Unknown => {
            let mark = env.snapshot();
            for value in dom.enumerate().iter() {
                env.bind(var, value.clone());
                let holds = eval_formula(theory, state, env, body);
                env.rewind(mark);
                if holds? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::formula::UpdatePat;
    use crate::domain::theory::testkit::gridlet;
    use crate::limits::Limits;
    use std::sync::Arc;

    fn sym(theory: &GroundTheory, name: &str) -> Sym {
        theory.names.get(name).unwrap()
    }

    fn start(theory: &GroundTheory) -> State {
        theory.initial_states(&Limits::default()).unwrap()[0].clone()
    }

    fn loc_domain(theory: &GroundTheory) -> VarDomain {
        VarDomain::Objects {
            sort: sym(theory, "loc"),
            values: Arc::new(vec![sym(theory, "p"), sym(theory, "q")]),
        }
    }

    #[test]
    fn exists_pins_action_arguments() {
        let theory = gridlet();
        let (d, q) = (sym(&theory, "d"), sym(&theory, "q"));
        let mv = sym(&theory, "move");
        let arrive = sym(&theory, "Arrive");
        let formula = Formula::Exists(
            d,
            loc_domain(&theory),
            Box::new(Formula::ActEq {
                action: mv,
                args: vec![Term::Var(d)],
                reaction: Term::Obj(arrive),
            }),
        );
        let s0 = start(&theory);
        let act = theory.ground_system_action(mv, vec![q], Value::Obj(arrive)).unwrap();
        let mut env = Env::with_action(&act);
        assert!(eval_formula(&theory, &s0, &mut env, &formula).unwrap());

        let slip = theory
            .ground_system_action(mv, vec![q], Value::Obj(sym(&theory, "Slip")))
            .unwrap();
        let mut env = Env::with_action(&slip);
        assert!(!eval_formula(&theory, &s0, &mut env, &formula).unwrap());
    }

    #[test]
    fn pinned_value_outside_the_domain_is_false() {
        let theory = gridlet();
        let (d, p, q) = (sym(&theory, "d"), sym(&theory, "p"), sym(&theory, "q"));
        let mv = sym(&theory, "move");
        let arrive = sym(&theory, "Arrive");
        let narrow = VarDomain::Objects { sort: sym(&theory, "loc"), values: Arc::new(vec![p]) };
        let formula = Formula::Exists(
            d,
            narrow,
            Box::new(Formula::ActEq {
                action: mv,
                args: vec![Term::Var(d)],
                reaction: Term::Obj(arrive),
            }),
        );
        let s0 = start(&theory);
        let act = theory.ground_system_action(mv, vec![q], Value::Obj(arrive)).unwrap();
        let mut env = Env::with_action(&act);
        assert!(!eval_formula(&theory, &s0, &mut env, &formula).unwrap());
    }

    #[test]
    fn action_name_mismatch_refutes_the_body() {
        let theory = gridlet();
        let d = sym(&theory, "d");
        let formula = Formula::Exists(
            d,
            loc_domain(&theory),
            Box::new(Formula::ActEq {
                action: sym(&theory, "move"),
                args: vec![Term::Var(d)],
                reaction: Term::Obj(sym(&theory, "Arrive")),
            }),
        );
        let s0 = start(&theory);
        let act = theory
            .ground_system_action(sym(&theory, "ping"), vec![], Value::Obj(sym(&theory, "Pong")))
            .unwrap();
        let mut env = Env::with_action(&act);
        assert!(!eval_formula(&theory, &s0, &mut env, &formula).unwrap());
    }

    #[test]
    fn forall_enumerates_the_domain() {
        let theory = gridlet();
        let (d, p) = (sym(&theory, "d"), sym(&theory, "p"));
        let linked = sym(&theory, "Linked");
        let s0 = start(&theory);
        let mut env = Env::plain();
        let all_linked = Formula::Forall(
            d,
            loc_domain(&theory),
            Box::new(Formula::Atom { fluent: linked, args: vec![Term::Obj(p), Term::Var(d)] }),
        );
        assert!(!eval_formula(&theory, &s0, &mut env, &all_linked).unwrap());
        let linked_or_self = Formula::Forall(
            d,
            loc_domain(&theory),
            Box::new(Formula::Or(vec![
                Formula::Eq(Term::Var(d), Term::Obj(p)),
                Formula::Atom { fluent: linked, args: vec![Term::Obj(p), Term::Var(d)] },
            ])),
        );
        assert!(eval_formula(&theory, &s0, &mut env, &linked_or_self).unwrap());
    }

    #[test]
    fn implication_and_equivalence_evaluate_classically() {
        let theory = gridlet();
        let p = sym(&theory, "p");
        let s0 = start(&theory);
        let mut env = Env::plain();
        let at_p = Formula::Atom { fluent: sym(&theory, "At"), args: vec![Term::Obj(p)] };
        let tagged_p = Formula::Atom { fluent: sym(&theory, "Tagged"), args: vec![Term::Obj(p)] };
        let jammed = Formula::Atom { fluent: sym(&theory, "Jammed"), args: vec![] };
        let implies = Formula::Implies(Box::new(at_p.clone()), Box::new(tagged_p.clone()));
        assert!(!eval_formula(&theory, &s0, &mut env, &implies).unwrap());
        let iff = Formula::Iff(Box::new(jammed), Box::new(tagged_p));
        assert!(eval_formula(&theory, &s0, &mut env, &iff).unwrap());
    }

    #[test]
    fn set_reaction_domains_enumerate_when_unpinned() {
        let theory = gridlet();
        let (e, p, q) = (sym(&theory, "e"), sym(&theory, "p"), sym(&theory, "q"));
        let scan = sym(&theory, "scan");
        let mark = sym(&theory, "mark");
        let dom = VarDomain::Reactions {
            action: scan,
            sort: theory.reactions_of(theory.action_id(scan).unwrap()).clone(),
        };
        let formula = Formula::Exists(
            e,
            dom,
            Box::new(Formula::And(vec![
                Formula::InReaction {
                    atom: UpdatePat { family: mark, args: vec![Term::Obj(p)] },
                    set: Term::Var(e),
                },
                Formula::not(Formula::InReaction {
                    atom: UpdatePat { family: mark, args: vec![Term::Obj(q)] },
                    set: Term::Var(e),
                }),
            ])),
        );
        let s0 = start(&theory);
        let mut env = Env::plain();
        assert!(eval_formula(&theory, &s0, &mut env, &formula).unwrap());
    }

    #[test]
    fn evaluation_errors_are_reported() {
        let theory = gridlet();
        let s0 = start(&theory);
        let mut env = Env::plain();
        let unbound = Formula::Atom {
            fluent: sym(&theory, "At"),
            args: vec![Term::Var(sym(&theory, "l"))],
        };
        assert!(eval_formula(&theory, &s0, &mut env, &unbound)
            .unwrap_err()
            .to_string()
            .contains("unbound variable"));

        let no_action = Formula::ActEq {
            action: sym(&theory, "move"),
            args: vec![Term::Obj(sym(&theory, "p"))],
            reaction: Term::Obj(sym(&theory, "Arrive")),
        };
        assert!(eval_formula(&theory, &s0, &mut env, &no_action).is_err());

        let bad_membership = Formula::InReaction {
            atom: UpdatePat { family: sym(&theory, "mark"), args: vec![Term::Obj(sym(&theory, "p"))] },
            set: Term::Obj(sym(&theory, "p")),
        };
        assert!(eval_formula(&theory, &s0, &mut env, &bad_membership).is_err());
    }
}
