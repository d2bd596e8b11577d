//! Situation-suppressed first-order formulas over a ground theory.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::domain::universe::{UpdateAtom, Value, VarDomain};
use crate::intern::Sym;

/// A term: a variable, an object constant (reaction tokens included), or a
/// set-valued reaction literal produced by substitution.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Sym),
    Obj(Sym),
    SetLit(Arc<BTreeSet<UpdateAtom>>),
}

impl Term {
    pub fn from_value(value: &Value) -> Term {
        match value {
            Value::Obj(sym) => Term::Obj(*sym),
            Value::Set(set) => Term::SetLit(set.clone()),
        }
    }
}

/// Update-atom pattern on the left of a membership test; its arguments may
/// contain variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UpdatePat {
    pub family: Sym,
    pub args: Vec<Term>,
}

/// A formula evaluated against a state, with an optional system action bound
/// for successor-state axioms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    /// Fluent atom, resolved by name against the evaluating theory.
    Atom { fluent: Sym, args: Vec<Term> },
    Eq(Term, Term),
    /// Membership of an update atom in a set-valued reaction.
    InReaction { atom: UpdatePat, set: Term },
    /// Equation `a = name(args, reaction)` on the bound action variable.
    ActEq {
        action: Sym,
        args: Vec<Term>,
        reaction: Term,
    },
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(Sym, VarDomain, Box<Formula>),
    Forall(Sym, VarDomain, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::True,
            1 => fs.into_iter().next().unwrap(),
            _ => Formula::And(fs),
        }
    }

    pub fn or(fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::False,
            1 => fs.into_iter().next().unwrap(),
            _ => Formula::Or(fs),
        }
    }

    /// Substitutes `value` for free occurrences of `var`.
    pub fn subst(&self, var: Sym, value: &Value) -> Formula {
        let term = Term::from_value(value);
        self.subst_term(var, &term)
    }

    pub fn subst_term(&self, var: Sym, term: &Term) -> Formula {
        let sub = |t: &Term| -> Term {
            match t {
                Term::Var(v) if *v == var => term.clone(),
                other => other.clone(),
            }
        };
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom { fluent, args } => Formula::Atom {
                fluent: *fluent,
                args: args.iter().map(sub).collect(),
            },
            Formula::Eq(a, b) => Formula::Eq(sub(a), sub(b)),
            Formula::InReaction { atom, set } => Formula::InReaction {
                atom: UpdatePat {
                    family: atom.family,
                    args: atom.args.iter().map(sub).collect(),
                },
                set: sub(set),
            },
            Formula::ActEq { action, args, reaction } => Formula::ActEq {
                action: *action,
                args: args.iter().map(sub).collect(),
                reaction: sub(reaction),
            },
            Formula::Not(f) => Formula::not(f.subst_term(var, term)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.subst_term(var, term)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.subst_term(var, term)).collect()),
            Formula::Implies(a, b) => Formula::Implies(
                Box::new(a.subst_term(var, term)),
                Box::new(b.subst_term(var, term)),
            ),
            Formula::Iff(a, b) => Formula::Iff(
                Box::new(a.subst_term(var, term)),
                Box::new(b.subst_term(var, term)),
            ),
            Formula::Exists(v, dom, body) if *v != var => Formula::Exists(
                *v,
                dom.clone(),
                Box::new(body.subst_term(var, term)),
            ),
            Formula::Forall(v, dom, body) if *v != var => Formula::Forall(
                *v,
                dom.clone(),
                Box::new(body.subst_term(var, term)),
            ),
            shadowed @ (Formula::Exists(..) | Formula::Forall(..)) => shadowed.clone(),
        }
    }

    /// Whether `var` occurs free, without collecting anything.
    pub fn mentions_var(&self, var: Sym) -> bool {
        let term_hits = |t: &Term| matches!(t, Term::Var(v) if *v == var);
        match self {
            Formula::True | Formula::False => false,
            Formula::Atom { args, .. } => args.iter().any(term_hits),
            Formula::Eq(a, b) => term_hits(a) || term_hits(b),
            Formula::InReaction { atom, set } => {
                atom.args.iter().any(term_hits) || term_hits(set)
            }
            Formula::ActEq { args, reaction, .. } => {
                args.iter().any(term_hits) || term_hits(reaction)
            }
            Formula::Not(f) => f.mentions_var(var),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(|f| f.mentions_var(var)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.mentions_var(var) || b.mentions_var(var)
            }
            Formula::Exists(v, _, body) | Formula::Forall(v, _, body) => {
                *v != var && body.mentions_var(var)
            }
        }
    }

    /// Free variables, in first-occurrence order.
    pub fn free_vars(&self) -> Vec<Sym> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Sym>, out: &mut Vec<Sym>) {
        let visit_term = |t: &Term, bound: &[Sym], out: &mut Vec<Sym>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(*v);
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom { args, .. } => {
                args.iter().for_each(|t| visit_term(t, bound, out));
            }
            Formula::Eq(a, b) => {
                visit_term(a, bound, out);
                visit_term(b, bound, out);
            }
            Formula::InReaction { atom, set } => {
                atom.args.iter().for_each(|t| visit_term(t, bound, out));
                visit_term(set, bound, out);
            }
            Formula::ActEq { args, reaction, .. } => {
                args.iter().for_each(|t| visit_term(t, bound, out));
                visit_term(reaction, bound, out);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().for_each(|f| f.collect_free(bound, out));
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, _, body) | Formula::Forall(v, _, body) => {
                bound.push(*v);
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Renders the formula in surface syntax.
    pub fn render(&self, names: &crate::intern::Names) -> String {
        fn term(t: &Term, names: &crate::intern::Names) -> String {
            match t {
                Term::Var(v) | Term::Obj(v) => names.resolve(*v).to_string(),
                Term::SetLit(set) => Value::Set(set.clone()).display(names),
            }
        }
        fn args(ts: &[Term], names: &crate::intern::Names) -> String {
            ts.iter().map(|t| term(t, names)).collect::<Vec<_>>().join(", ")
        }
        match self {
            Formula::True => "true".to_string(),
            Formula::False => "false".to_string(),
            Formula::Atom { fluent, args: a } => {
                if a.is_empty() {
                    names.resolve(*fluent).to_string()
                } else {
                    format!("{}({})", names.resolve(*fluent), args(a, names))
                }
            }
            Formula::Eq(a, b) => format!("{} = {}", term(a, names), term(b, names)),
            Formula::InReaction { atom, set } => {
                let pat = if atom.args.is_empty() {
                    names.resolve(atom.family).to_string()
                } else {
                    format!("{}({})", names.resolve(atom.family), args(&atom.args, names))
                };
                format!("{} in {}", pat, term(set, names))
            }
            Formula::ActEq { action, args: a, reaction } => {
                let mut rendered: Vec<String> = a.iter().map(|t| term(t, names)).collect();
                rendered.push(term(reaction, names));
                format!("a = {}({})", names.resolve(*action), rendered.join(", "))
            }
            Formula::Not(f) => format!("!({})", f.render(names)),
            Formula::And(fs) => {
                let parts: Vec<String> = fs.iter().map(|f| format!("({})", f.render(names))).collect();
                parts.join(" & ")
            }
            Formula::Or(fs) => {
                let parts: Vec<String> = fs.iter().map(|f| format!("({})", f.render(names))).collect();
                parts.join(" | ")
            }
            Formula::Implies(a, b) => format!("({}) -> ({})", a.render(names), b.render(names)),
            Formula::Iff(a, b) => format!("({}) <-> ({})", a.render(names), b.render(names)),
            Formula::Exists(v, dom, body) => format!(
                "exists {}: {} . ({})",
                names.resolve(*v),
                dom.display(names),
                body.render(names)
            ),
            Formula::Forall(v, dom, body) => format!(
                "forall {}: {} . ({})",
                names.resolve(*v),
                dom.display(names),
                body.render(names)
            ),
        }
    }

    /// True when the formula mentions no fluent atoms, i.e. its value cannot
    /// depend on the state.
    pub fn is_state_independent(&self) -> bool {
        match self {
            Formula::True
            | Formula::False
            | Formula::Eq(..)
            | Formula::InReaction { .. }
            | Formula::ActEq { .. } => true,
            Formula::Atom { .. } => false,
            Formula::Not(f) => f.is_state_independent(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(|f| f.is_state_independent()),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.is_state_independent() && b.is_state_independent()
            }
            Formula::Exists(_, _, body) | Formula::Forall(_, _, body) => {
                body.is_state_independent()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intern::Names;
    use std::sync::Arc as StdArc;

    #[test]
    fn substitution_respects_shadowing() {
        let mut names = Names::new();
        let x = names.intern("x");
        let fluent = names.intern("P");
        let obj = names.intern("c");
        let dom = VarDomain::Objects {
            sort: names.intern("S"),
            values: StdArc::new(vec![obj]),
        };
        let inner = Formula::Atom { fluent, args: vec![Term::Var(x)] };
        let shadowed = Formula::Exists(x, dom.clone(), Box::new(inner.clone()));
        let outer = Formula::And(vec![inner.clone(), shadowed.clone()]);
        let result = outer.subst(x, &Value::Obj(obj));
        match &result {
            Formula::And(parts) => {
                assert_eq!(
                    parts[0],
                    Formula::Atom { fluent, args: vec![Term::Obj(obj)] }
                );
                assert_eq!(parts[1], shadowed);
            }
            other => panic!("unexpected shape: {other:?}"),
        }
    }

    #[test]
    fn free_vars_skip_bound_occurrences() {
        let mut names = Names::new();
        let x = names.intern("x");
        let y = names.intern("y");
        let fluent = names.intern("P");
        let dom = VarDomain::Objects {
            sort: names.intern("S"),
            values: StdArc::new(vec![names.intern("c")]),
        };
        let f = Formula::Exists(
            x,
            dom,
            Box::new(Formula::Atom { fluent, args: vec![Term::Var(x), Term::Var(y)] }),
        );
        assert_eq!(f.free_vars(), vec![y]);
    }

    #[test]
    fn state_independence_detects_atoms() {
        let mut names = Names::new();
        let fluent = names.intern("P");
        let c = names.intern("c");
        let with_atom = Formula::not(Formula::Atom { fluent, args: vec![] });
        let without = Formula::Eq(Term::Obj(c), Term::Obj(c));
        assert!(!with_atom.is_state_independent());
        assert!(without.is_state_independent());
    }
}
