//! Printers from the parsed form back to surface syntax. Reprinting a
//! parsed document yields a string that parses to the same print, which the
//! round-trip tests lean on.

use crate::syntax::ast::*;

fn term(t: &TermAst) -> String {
    t.name.clone()
}

fn terms(args: &[TermAst]) -> String {
    args.iter().map(term).collect::<Vec<_>>().join(", ")
}

fn domain(d: &DomainAst) -> String {
    match d {
        DomainAst::Sort(name, _) => name.clone(),
        DomainAst::Reactions(action, _) => format!("reactions({action})"),
    }
}

fn atomish(f: &FormulaAst) -> bool {
    matches!(
        f,
        FormulaAst::True | FormulaAst::False | FormulaAst::PossAg(_) | FormulaAst::Atom { .. }
    )
}

fn operand(f: &FormulaAst) -> String {
    if atomish(f) {
        pretty_formula(f)
    } else {
        format!("({})", pretty_formula(f))
    }
}

fn binders(list: &[(String, DomainAst)], keyword: &str) -> String {
    list.iter()
        .map(|(var, dom)| format!("{keyword} {var}: {} . ", domain(dom)))
        .collect()
}

pub fn pretty_formula(f: &FormulaAst) -> String {
    match f {
        FormulaAst::True => "true".to_string(),
        FormulaAst::False => "false".to_string(),
        FormulaAst::PossAg(_) => "poss_ag".to_string(),
        FormulaAst::Atom { name, args, .. } => {
            if args.is_empty() {
                name.clone()
            } else {
                format!("{name}({})", terms(args))
            }
        }
        FormulaAst::Eq { left, right, negated } => {
            let op = if *negated { "!=" } else { "=" };
            format!("{} {op} {}", term(left), term(right))
        }
        FormulaAst::ActEq { action, args, .. } => format!("a = {action}({})", terms(args)),
        FormulaAst::InSet { pattern, set } => {
            if pattern.args.is_empty() {
                format!("{} in {}", pattern.family, term(set))
            } else {
                format!("{}({}) in {}", pattern.family, terms(&pattern.args), term(set))
            }
        }
        FormulaAst::Not(inner) => format!("!{}", operand(inner)),
        FormulaAst::And(l, r) => format!("{} & {}", operand(l), operand(r)),
        FormulaAst::Or(l, r) => format!("{} | {}", operand(l), operand(r)),
        FormulaAst::Implies(l, r) => format!("{} -> {}", operand(l), operand(r)),
        FormulaAst::Iff(l, r) => format!("{} <-> {}", operand(l), operand(r)),
        FormulaAst::Exists { binders: bs, body, .. } => {
            format!("{}{}", binders(bs, "exists"), pretty_formula(body))
        }
        FormulaAst::Forall { binders: bs, body, .. } => {
            format!("{}{}", binders(bs, "forall"), pretty_formula(body))
        }
    }
}

fn prec(p: &ProgramAst) -> u8 {
    match p {
        ProgramAst::Choice(_) | ProgramAst::Pick { .. } => 0,
        ProgramAst::Conc(..) => 1,
        ProgramAst::Seq(_) => 2,
        _ => 3,
    }
}

fn at_prec(p: &ProgramAst, min: u8) -> String {
    if prec(p) < min {
        format!("({})", pretty_program(p))
    } else {
        pretty_program(p)
    }
}

pub fn pretty_program(p: &ProgramAst) -> String {
    match p {
        ProgramAst::Nil => "nil".to_string(),
        ProgramAst::Test(f, _) => match f {
            FormulaAst::Atom { .. } | FormulaAst::True | FormulaAst::False => {
                format!("{}?", pretty_formula(f))
            }
            other => format!("({})?", pretty_formula(other)),
        },
        ProgramAst::Call { name, args, .. } => {
            if args.is_empty() {
                name.clone()
            } else {
                format!("{name}({})", terms(args))
            }
        }
        ProgramAst::Seq(parts) => parts
            .iter()
            .map(|part| at_prec(part, 3))
            .collect::<Vec<_>>()
            .join("; "),
        ProgramAst::Choice(parts) => parts
            .iter()
            .map(|part| at_prec(part, 1))
            .collect::<Vec<_>>()
            .join(" | "),
        ProgramAst::Conc(l, r) => format!("{} || {}", at_prec(l, 1), at_prec(r, 2)),
        ProgramAst::Pick { binders: bs, body, .. } => {
            let head: String = bs
                .iter()
                .map(|(var, dom)| format!("pi {var}: {} . ", domain(dom)))
                .collect();
            format!("{head}{}", pretty_program(body))
        }
        ProgramAst::Star(body) => format!("{}*", at_prec(body, 3)),
        ProgramAst::If { cond, then_branch, else_branch, .. } => {
            let mut out = format!(
                "if {} then {}",
                pretty_formula(cond),
                pretty_program(then_branch)
            );
            if let Some(els) = else_branch {
                out.push_str(&format!(" else {}", pretty_program(els)));
            }
            out.push_str(" endif");
            out
        }
        ProgramAst::While { cond, body, .. } => {
            format!("while {} do {} endwhile", pretty_formula(cond), pretty_program(body))
        }
    }
}
