//! Name resolution and lowering: turns parsed documents into ground
//! theories, programs, and refinement mappings. The session owns the name
//! table; every artifact it builds keeps a snapshot, so symbols stay valid
//! across later loads.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use crate::abstraction::{MappedAction, MappedFluent, RefinementMapping};
use crate::congolog::Program;
use crate::domain::{
    ActionSchema, FluentSchema, Formula, GroundTheory, ReactionSort, SortId, Sorts, Ssa, Term,
    UpdateAtom, UpdateFamily, UpdatePat, VarDomain,
};
use crate::error::{Diagnostic, Error, Result};
use crate::intern::{Names, Sym};
use crate::syntax::ast::*;
use crate::syntax::parser;

/// A program document resolved against its theory.
#[derive(Debug, Clone)]
pub struct LoadedProgram {
    pub name: String,
    pub kind: ProgramKind,
    pub theory: Arc<GroundTheory>,
    pub program: Program,
}

/// Owns the shared name table and the artifacts loaded so far. Theories
/// must be loaded before mappings or programs that refer to them.
#[derive(Debug, Default)]
pub struct Session {
    names: Names,
    theories: HashMap<String, Arc<GroundTheory>>,
    mappings: HashMap<String, Arc<RefinementMapping>>,
}

impl Session {
    pub fn new() -> Session {
        Session::default()
    }

    pub fn names(&self) -> &Names {
        &self.names
    }

    pub fn load_theory(&mut self, src: &str, origin: &str) -> Result<Arc<GroundTheory>> {
        let doc = parser::parse_theory(src, origin)?;
        if self.theories.contains_key(&doc.name) {
            return Err(Error::spec(format!("theory {} is already loaded", doc.name)));
        }
        let theory = Arc::new(lower_theory(&mut self.names, &doc, origin)?);
        self.theories.insert(doc.name.clone(), theory.clone());
        Ok(theory)
    }

    pub fn load_mapping(&mut self, src: &str, origin: &str) -> Result<Arc<RefinementMapping>> {
        let doc = parser::parse_mapping(src, origin)?;
        if self.mappings.contains_key(&doc.name) {
            return Err(Error::spec(format!("mapping {} is already loaded", doc.name)));
        }
        let hl = self.theory(&doc.hl)?;
        let ll = self.theory(&doc.ll)?;
        let mapping = Arc::new(lower_mapping(&mut self.names, &doc, hl, ll, origin)?);
        self.mappings.insert(doc.name.clone(), mapping.clone());
        Ok(mapping)
    }

    /// Loads every program document in the source, each resolved against its
    /// declared theory.
    pub fn load_programs(&mut self, src: &str, origin: &str) -> Result<Vec<LoadedProgram>> {
        let docs = parser::parse_programs(src, origin)?;
        let mut out = Vec::new();
        for doc in docs {
            let theory = self.theory(&doc.theory)?;
            let view = TheoryView::of(&theory, None);
            let mut ctx = Ctx::new(origin, &mut self.names, &view);
            let program = ctx.lower_program(&doc.body, doc.kind)?.canonicalize();
            out.push(LoadedProgram { name: doc.name, kind: doc.kind, theory, program });
        }
        Ok(out)
    }

    pub fn load_theory_file(&mut self, path: impl AsRef<Path>) -> Result<Arc<GroundTheory>> {
        let (src, origin) = read_source(path.as_ref())?;
        self.load_theory(&src, &origin)
    }

    pub fn load_mapping_file(&mut self, path: impl AsRef<Path>) -> Result<Arc<RefinementMapping>> {
        let (src, origin) = read_source(path.as_ref())?;
        self.load_mapping(&src, &origin)
    }

    pub fn load_program_file(&mut self, path: impl AsRef<Path>) -> Result<Vec<LoadedProgram>> {
        let (src, origin) = read_source(path.as_ref())?;
        self.load_programs(&src, &origin)
    }

    pub fn theory(&self, name: &str) -> Result<Arc<GroundTheory>> {
        self.theories
            .get(name)
            .cloned()
            .ok_or_else(|| Error::spec(format!("theory {name} is not loaded")))
    }

    pub fn mapping(&self, name: &str) -> Result<Arc<RefinementMapping>> {
        self.mappings
            .get(name)
            .cloned()
            .ok_or_else(|| Error::spec(format!("mapping {name} is not loaded")))
    }

    /// Lowers a formula source string against a loaded theory, for goals and
    /// queries given on the command line.
    pub fn parse_goal(&mut self, theory: &GroundTheory, src: &str, origin: &str) -> Result<Formula> {
        let formula = parser::parse_formula_str(src, origin)?;
        let view = TheoryView::of(theory, None);
        let mut ctx = Ctx::new(origin, &mut self.names, &view);
        ctx.lower_formula(&formula)
    }
}

fn read_source(path: &Path) -> Result<(String, String)> {
    let origin = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: origin.clone(),
        source,
    })?;
    Ok((src, origin))
}

fn at_span(origin: &str, span: Span, message: String, hint: Option<&str>) -> Error {
    Error::Parse {
        origin: origin.to_string(),
        diagnostics: vec![Diagnostic {
            line: span.line,
            col: span.col,
            message,
            hint: hint.map(str::to_string),
        }],
    }
}

#[derive(Clone)]
struct ActionSig {
    sym: Sym,
    arity: usize,
    reactions: ReactionSort,
}

/// Everything formula and program lowering needs to resolve names: the
/// primary theory's vocabulary, plus the high-level one when lowering
/// mapping bodies, whose tests mention high-level reactions.
struct TheoryView<'a> {
    sorts: &'a Sorts,
    fluents: HashMap<String, usize>,
    actions: HashMap<String, ActionSig>,
    families: HashMap<String, (Sym, usize)>,
    reaction_tokens: HashSet<Sym>,
}

impl<'a> TheoryView<'a> {
    fn of(primary: &'a GroundTheory, extra: Option<&GroundTheory>) -> TheoryView<'a> {
        let mut view = TheoryView {
            sorts: &primary.sorts,
            fluents: HashMap::new(),
            actions: HashMap::new(),
            families: HashMap::new(),
            reaction_tokens: HashSet::new(),
        };
        view.absorb(primary);
        if let Some(extra) = extra {
            let mut extra_view = TheoryView {
                sorts: &primary.sorts,
                fluents: HashMap::new(),
                actions: HashMap::new(),
                families: HashMap::new(),
                reaction_tokens: HashSet::new(),
            };
            extra_view.absorb(extra);
            for (name, family) in extra_view.families {
                view.families.entry(name).or_insert(family);
            }
            view.reaction_tokens.extend(extra_view.reaction_tokens);
        }
        view
    }

    fn absorb(&mut self, theory: &GroundTheory) {
        for fluent in &theory.fluents {
            self.fluents
                .insert(theory.names.resolve(fluent.name).to_string(), fluent.param_sorts.len());
        }
        for action in &theory.actions {
            self.actions.insert(
                theory.names.resolve(action.name).to_string(),
                ActionSig {
                    sym: action.name,
                    arity: action.params.len(),
                    reactions: action.reactions.clone(),
                },
            );
            if let ReactionSort::Tokens(tokens) = &action.reactions {
                self.reaction_tokens.extend(tokens.iter().copied());
            }
        }
        for family in &theory.update_families {
            self.families.insert(
                theory.names.resolve(family.name).to_string(),
                (family.name, family.param_sorts.len()),
            );
        }
    }
}

struct Ctx<'a, 'v> {
    origin: &'a str,
    names: &'a mut Names,
    view: &'a TheoryView<'v>,
    scope: Vec<(String, Sym)>,
    allow_action_atoms: bool,
    poss_ag: Option<Formula>,
}

impl<'a, 'v> Ctx<'a, 'v> {
    fn new(origin: &'a str, names: &'a mut Names, view: &'a TheoryView<'v>) -> Ctx<'a, 'v> {
        Ctx {
            origin,
            names,
            view,
            scope: Vec::new(),
            allow_action_atoms: false,
            poss_ag: None,
        }
    }

    fn err(&self, span: Span, message: String, hint: Option<&str>) -> Error {
        at_span(self.origin, span, message, hint)
    }

    fn bind(&mut self, name: &str, span: Span) -> Result<Sym> {
        if name == "a" {
            return Err(self.err(
                span,
                "the name 'a' is reserved for the action variable".to_string(),
                None,
            ));
        }
        let sym = self.names.intern(name);
        if self.view.sorts.object(sym).is_some() {
            return Err(self.err(span, format!("variable {name} shadows an object"), None));
        }
        if self.view.reaction_tokens.contains(&sym) {
            return Err(self.err(span, format!("variable {name} shadows a reaction token"), None));
        }
        Ok(sym)
    }

    fn resolve_term(&mut self, term: &TermAst) -> Result<Term> {
        if term.name == "a" {
            return Err(self.err(
                term.span,
                "the name 'a' is reserved for the action variable".to_string(),
                None,
            ));
        }
        for (name, sym) in self.scope.iter().rev() {
            if *name == term.name {
                return Ok(Term::Var(*sym));
            }
        }
        if let Some(sym) = self.names.get(&term.name) {
            if self.view.sorts.object(sym).is_some() || self.view.reaction_tokens.contains(&sym) {
                return Ok(Term::Obj(sym));
            }
        }
        Err(self.err(
            term.span,
            format!("unknown name {}", term.name),
            Some("expected a bound variable, an object, or a reaction token"),
        ))
    }

    fn resolve_terms(&mut self, terms: &[TermAst]) -> Result<Vec<Term>> {
        terms.iter().map(|t| self.resolve_term(t)).collect()
    }

    fn domain(&mut self, dom: &DomainAst) -> Result<VarDomain> {
        match dom {
            DomainAst::Sort(name, span) => {
                let sort_id = self
                    .names
                    .get(name)
                    .and_then(|sym| self.view.sorts.by_name(sym));
                let Some(sort_id) = sort_id else {
                    return Err(self.err(*span, format!("unknown sort {name}"), None));
                };
                let def = self.view.sorts.def(sort_id);
                Ok(VarDomain::Objects { sort: def.name, values: Arc::new(def.objects.clone()) })
            }
            DomainAst::Reactions(action, span) => {
                let Some(sig) = self.view.actions.get(action) else {
                    return Err(self.err(*span, format!("unknown action {action}"), None));
                };
                Ok(VarDomain::Reactions { action: sig.sym, sort: sig.reactions.clone() })
            }
        }
    }

    fn lower_formula(&mut self, ast: &FormulaAst) -> Result<Formula> {
        match ast {
            FormulaAst::True => Ok(Formula::True),
            FormulaAst::False => Ok(Formula::False),
            FormulaAst::PossAg(span) => self.poss_ag.clone().ok_or_else(|| {
                self.err(
                    *span,
                    "poss_ag may only appear inside a poss clause".to_string(),
                    None,
                )
            }),
            FormulaAst::Atom { name, args, span } => {
                let Some(&arity) = self.view.fluents.get(name) else {
                    return Err(self.err(*span, format!("unknown fluent {name}"), None));
                };
                if args.len() != arity {
                    return Err(self.err(
                        *span,
                        format!("fluent {name} takes {arity} arguments, got {}", args.len()),
                        None,
                    ));
                }
                let args = self.resolve_terms(args)?;
                Ok(Formula::Atom { fluent: self.names.intern(name), args })
            }
            FormulaAst::Eq { left, right, negated } => {
                let l = self.resolve_term(left)?;
                let r = self.resolve_term(right)?;
                let eq = Formula::Eq(l, r);
                Ok(if *negated { Formula::not(eq) } else { eq })
            }
            FormulaAst::ActEq { action, args, span } => {
                if !self.allow_action_atoms {
                    return Err(self.err(
                        *span,
                        "action equations may only appear in successor-state axioms".to_string(),
                        None,
                    ));
                }
                let Some(sig) = self.view.actions.get(action).cloned() else {
                    return Err(self.err(*span, format!("unknown action {action}"), None));
                };
                if args.len() != sig.arity + 1 {
                    return Err(self.err(
                        *span,
                        format!(
                            "action {action} takes {} arguments plus a reaction, got {}",
                            sig.arity,
                            args.len()
                        ),
                        None,
                    ));
                }
                let mut terms = self.resolve_terms(args)?;
                let reaction = terms.pop().unwrap();
                Ok(Formula::ActEq { action: sig.sym, args: terms, reaction })
            }
            FormulaAst::InSet { pattern, set } => {
                let atom = self.lower_pattern(pattern)?;
                let set = self.resolve_term(set)?;
                Ok(Formula::InReaction { atom, set })
            }
            FormulaAst::Not(inner) => Ok(Formula::not(self.lower_formula(inner)?)),
            FormulaAst::And(l, r) => {
                Ok(Formula::And(vec![self.lower_formula(l)?, self.lower_formula(r)?]))
            }
            FormulaAst::Or(l, r) => {
                Ok(Formula::Or(vec![self.lower_formula(l)?, self.lower_formula(r)?]))
            }
            FormulaAst::Implies(l, r) => Ok(Formula::Implies(
                Box::new(self.lower_formula(l)?),
                Box::new(self.lower_formula(r)?),
            )),
            FormulaAst::Iff(l, r) => Ok(Formula::Iff(
                Box::new(self.lower_formula(l)?),
                Box::new(self.lower_formula(r)?),
            )),
            FormulaAst::Exists { binders, body, .. } => self.lower_quantifier(binders, body, true),
            FormulaAst::Forall { binders, body, .. } => self.lower_quantifier(binders, body, false),
        }
    }

    fn lower_quantifier(
        &mut self,
        binders: &[(String, DomainAst)],
        body: &FormulaAst,
        existential: bool,
    ) -> Result<Formula> {
        let mut bound = Vec::new();
        for (name, dom) in binders {
            let span = match dom {
                DomainAst::Sort(_, span) | DomainAst::Reactions(_, span) => *span,
            };
            let dom = self.domain(dom)?;
            let sym = self.bind(name, span)?;
            self.scope.push((name.clone(), sym));
            bound.push((sym, dom));
        }
        let mut formula = self.lower_formula(body)?;
        for (sym, dom) in bound.into_iter().rev() {
            self.scope.pop();
            formula = if existential {
                Formula::Exists(sym, dom, Box::new(formula))
            } else {
                Formula::Forall(sym, dom, Box::new(formula))
            };
        }
        Ok(formula)
    }

    fn lower_pattern(&mut self, pattern: &UpdatePatAst) -> Result<UpdatePat> {
        let Some(&(family, arity)) = self.view.families.get(&pattern.family) else {
            return Err(self.err(
                pattern.span,
                format!("unknown update family {}", pattern.family),
                None,
            ));
        };
        if pattern.args.len() != arity {
            return Err(self.err(
                pattern.span,
                format!(
                    "update family {} takes {arity} arguments, got {}",
                    pattern.family,
                    pattern.args.len()
                ),
                None,
            ));
        }
        Ok(UpdatePat { family, args: self.resolve_terms(&pattern.args)? })
    }

    fn lower_program(&mut self, ast: &ProgramAst, kind: ProgramKind) -> Result<Program> {
        match ast {
            ProgramAst::Nil => Ok(Program::Nil),
            ProgramAst::Test(formula, _) => Ok(Program::test(self.lower_formula(formula)?)),
            ProgramAst::Call { name, args, span } => {
                let Some(sig) = self.view.actions.get(name).cloned() else {
                    return Err(self.err(*span, format!("unknown action {name}"), None));
                };
                match kind {
                    ProgramKind::Agent => {
                        if args.len() != sig.arity {
                            return Err(self.err(
                                *span,
                                format!(
                                    "action {name} takes {} arguments, got {}",
                                    sig.arity,
                                    args.len()
                                ),
                                None,
                            ));
                        }
                        Ok(Program::AgtAct { name: sig.sym, args: self.resolve_terms(args)? })
                    }
                    ProgramKind::System => {
                        if args.len() != sig.arity + 1 {
                            return Err(self.err(
                                *span,
                                format!(
                                    "action {name} takes {} arguments plus a reaction, got {}",
                                    sig.arity,
                                    args.len()
                                ),
                                None,
                            ));
                        }
                        let mut terms = self.resolve_terms(args)?;
                        let reaction = terms.pop().unwrap();
                        Ok(Program::SysAct { name: sig.sym, args: terms, reaction })
                    }
                }
            }
            ProgramAst::Seq(parts) => {
                let lowered = parts
                    .iter()
                    .map(|p| self.lower_program(p, kind))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Program::Seq(lowered))
            }
            ProgramAst::Choice(parts) => {
                let lowered = parts
                    .iter()
                    .map(|p| self.lower_program(p, kind))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Program::Choice(lowered))
            }
            ProgramAst::Conc(l, r) => Ok(Program::Conc(
                Box::new(self.lower_program(l, kind)?),
                Box::new(self.lower_program(r, kind)?),
            )),
            ProgramAst::Pick { binders, body, .. } => {
                let mut bound = Vec::new();
                for (name, dom) in binders {
                    let span = match dom {
                        DomainAst::Sort(_, span) | DomainAst::Reactions(_, span) => *span,
                    };
                    let dom = self.domain(dom)?;
                    let sym = self.bind(name, span)?;
                    self.scope.push((name.clone(), sym));
                    bound.push((sym, dom));
                }
                let mut program = self.lower_program(body, kind)?;
                for (sym, dom) in bound.into_iter().rev() {
                    self.scope.pop();
                    program = Program::Pick { var: sym, dom, body: Box::new(program) };
                }
                Ok(program)
            }
            ProgramAst::Star(body) => {
                Ok(Program::Star(Box::new(self.lower_program(body, kind)?)))
            }
            ProgramAst::If { cond, then_branch, else_branch, .. } => {
                let cond = self.lower_formula(cond)?;
                let then_branch = self.lower_program(then_branch, kind)?;
                let else_branch = match else_branch {
                    Some(els) => self.lower_program(els, kind)?,
                    None => Program::Nil,
                };
                Ok(Program::Choice(vec![
                    Program::Seq(vec![Program::test(cond.clone()), then_branch]),
                    Program::Seq(vec![Program::test(Formula::not(cond)), else_branch]),
                ]))
            }
            ProgramAst::While { cond, body, .. } => {
                let cond = self.lower_formula(cond)?;
                let body = self.lower_program(body, kind)?;
                Ok(Program::Seq(vec![
                    Program::Star(Box::new(Program::Seq(vec![
                        Program::test(cond.clone()),
                        body,
                    ]))),
                    Program::test(Formula::not(cond)),
                ]))
            }
        }
    }
}

fn lower_theory(names: &mut Names, doc: &TheoryDoc, origin: &str) -> Result<GroundTheory> {
    let mut sorts = Sorts::new();
    for decl in &doc.sorts {
        let name = names.intern(&decl.name);
        let objects: Vec<Sym> = decl.objects.iter().map(|o| names.intern(o)).collect();
        sorts
            .add(names, name, objects)
            .map_err(|msg| at_span(origin, decl.span, msg, None))?;
    }

    let mut families = Vec::new();
    let mut family_view: HashMap<String, (Sym, usize)> = HashMap::new();
    for decl in &doc.updates {
        if family_view.contains_key(&decl.name) {
            return Err(at_span(
                origin,
                decl.span,
                format!("duplicate update family {}", decl.name),
                None,
            ));
        }
        let name = names.intern(&decl.name);
        let mut param_sorts = Vec::new();
        for sort_name in &decl.param_sorts {
            param_sorts.push(resolve_sort(names, &sorts, sort_name, decl.span, origin)?);
        }
        family_view.insert(decl.name.clone(), (name, param_sorts.len()));
        families.push(UpdateFamily { name, param_sorts });
    }

    let mut fluents = Vec::new();
    let mut fluent_view: HashMap<String, usize> = HashMap::new();
    for decl in &doc.fluents {
        if fluent_view.contains_key(&decl.name) {
            return Err(at_span(
                origin,
                decl.span,
                format!("duplicate fluent {}", decl.name),
                None,
            ));
        }
        let name = names.intern(&decl.name);
        let mut param_sorts = Vec::new();
        for sort_name in &decl.param_sorts {
            param_sorts.push(resolve_sort(names, &sorts, sort_name, decl.span, origin)?);
        }
        fluent_view.insert(decl.name.clone(), param_sorts.len());
        fluents.push(FluentSchema { name, param_sorts });
    }

    let mut action_view: HashMap<String, ActionSig> = HashMap::new();
    let mut reaction_tokens: HashSet<Sym> = HashSet::new();
    let mut action_frames = Vec::new();
    for decl in &doc.actions {
        if action_view.contains_key(&decl.name) {
            return Err(at_span(
                origin,
                decl.span,
                format!("duplicate action {}", decl.name),
                None,
            ));
        }
        let name = names.intern(&decl.name);
        let mut params = Vec::new();
        for (var, sort_name) in &decl.params {
            let sort = resolve_sort(names, &sorts, sort_name, decl.span, origin)?;
            params.push((intern_binder(names, var, decl.span, origin)?, sort));
        }
        let reactions = match &decl.reactions {
            ReactionDecl::Tokens(tokens) => {
                let mut syms = Vec::new();
                for token in tokens {
                    let sym = names.intern(token);
                    if syms.contains(&sym) {
                        return Err(at_span(
                            origin,
                            decl.span,
                            format!("duplicate reaction token {token}"),
                            None,
                        ));
                    }
                    syms.push(sym);
                }
                reaction_tokens.extend(syms.iter().copied());
                ReactionSort::Tokens(Arc::new(syms))
            }
            ReactionDecl::Subsets { patterns, binders } => {
                let base = expand_reaction_base(
                    names,
                    &sorts,
                    &family_view,
                    patterns,
                    binders,
                    decl.span,
                    origin,
                )?;
                ReactionSort::subsets(base)
            }
        };
        action_view.insert(
            decl.name.clone(),
            ActionSig { sym: name, arity: params.len(), reactions: reactions.clone() },
        );
        action_frames.push((decl, name, params, reactions));
    }

    let view = TheoryView {
        sorts: &sorts,
        fluents: fluent_view,
        actions: action_view,
        families: family_view,
        reaction_tokens,
    };

    let mut actions = Vec::new();
    for (decl, name, params, reactions) in action_frames {
        let mut ctx = Ctx::new(origin, names, &view);
        for ((var, _), (var_name, _)) in params.iter().zip(&decl.params) {
            ctx.scope.push((var_name.clone(), *var));
        }
        let poss_ag = ctx.lower_formula(&decl.poss_ag)?;
        if decl.params.iter().any(|(v, _)| *v == decl.reaction_var) {
            return Err(at_span(
                origin,
                decl.span,
                format!("reaction variable {} shadows a parameter", decl.reaction_var),
                None,
            ));
        }
        let reaction_var = intern_binder(ctx.names, &decl.reaction_var, decl.span, origin)?;
        ctx.scope.push((decl.reaction_var.clone(), reaction_var));
        ctx.poss_ag = Some(poss_ag.clone());
        let poss = ctx.lower_formula(&decl.poss)?;
        actions.push(ActionSchema { name, params, reaction_var, reactions, poss_ag, poss });
    }

    let mut ssas: Vec<Option<Ssa>> = vec![None; fluents.len()];
    let fluent_ids: HashMap<&str, usize> = doc
        .fluents
        .iter()
        .enumerate()
        .map(|(id, decl)| (decl.name.as_str(), id))
        .collect();
    for decl in &doc.ssas {
        let Some(&fluent_id) = fluent_ids.get(decl.fluent.as_str()) else {
            return Err(at_span(
                origin,
                decl.span,
                format!("unknown fluent {}", decl.fluent),
                None,
            ));
        };
        if ssas[fluent_id].is_some() {
            return Err(at_span(
                origin,
                decl.span,
                format!("duplicate successor-state axiom for {}", decl.fluent),
                None,
            ));
        }
        let mut ctx = Ctx::new(origin, names, &view);
        ctx.allow_action_atoms = true;
        let mut params = Vec::new();
        for var in &decl.params {
            let sym = intern_binder(ctx.names, var, decl.span, origin)?;
            ctx.scope.push((var.clone(), sym));
            params.push(sym);
        }
        let body = ctx.lower_formula(&decl.body)?;
        ssas[fluent_id] = Some(Ssa { params, body });
    }

    let closed = lower_init_atoms(names, &sorts, &view, &doc.init.closed, origin)?;
    let open = lower_init_atoms(names, &sorts, &view, &doc.init.open, origin)?;

    let theory_name = names.intern(&doc.name);
    GroundTheory::new(
        theory_name,
        Arc::new((*names).clone()),
        sorts,
        families,
        fluents,
        actions,
        ssas,
        &closed,
        &open,
    )
}

fn resolve_sort(
    names: &Names,
    sorts: &Sorts,
    name: &str,
    span: Span,
    origin: &str,
) -> Result<SortId> {
    names
        .get(name)
        .and_then(|sym| sorts.by_name(sym))
        .ok_or_else(|| at_span(origin, span, format!("unknown sort {name}"), None))
}

fn intern_binder(names: &mut Names, name: &str, span: Span, origin: &str) -> Result<Sym> {
    if name == "a" {
        return Err(at_span(
            origin,
            span,
            "the name 'a' is reserved for the action variable".to_string(),
            None,
        ));
    }
    Ok(names.intern(name))
}

fn expand_reaction_base(
    names: &mut Names,
    sorts: &Sorts,
    families: &HashMap<String, (Sym, usize)>,
    patterns: &[UpdatePatAst],
    binders: &[(String, String)],
    span: Span,
    origin: &str,
) -> Result<Vec<UpdateAtom>> {
    let mut binder_domains = Vec::new();
    for (var, sort_name) in binders {
        let sort = resolve_sort(names, sorts, sort_name, span, origin)?;
        binder_domains.push((var.as_str(), sorts.def(sort).objects.clone()));
    }
    let mut base: Vec<UpdateAtom> = Vec::new();
    for pattern in patterns {
        let Some(&(family, arity)) = families.get(&pattern.family) else {
            return Err(at_span(
                origin,
                pattern.span,
                format!("unknown update family {}", pattern.family),
                None,
            ));
        };
        if pattern.args.len() != arity {
            return Err(at_span(
                origin,
                pattern.span,
                format!(
                    "update family {} takes {arity} arguments, got {}",
                    pattern.family,
                    pattern.args.len()
                ),
                None,
            ));
        }
        let mut assignment = vec![0usize; binder_domains.len()];
        loop {
            let mut args = Vec::with_capacity(pattern.args.len());
            for arg in &pattern.args {
                let bound = binder_domains
                    .iter()
                    .position(|(var, _)| *var == arg.name)
                    .map(|i| binder_domains[i].1[assignment[i]]);
                let sym = match bound {
                    Some(sym) => sym,
                    None => names.get(&arg.name).filter(|s| sorts.object(*s).is_some()).ok_or_else(
                        || at_span(origin, arg.span, format!("unknown name {}", arg.name), None),
                    )?,
                };
                args.push(sym);
            }
            let atom = UpdateAtom { family, args };
            if base.contains(&atom) {
                return Err(at_span(
                    origin,
                    pattern.span,
                    "duplicate update atom in reaction base".to_string(),
                    None,
                ));
            }
            base.push(atom);
            let mut slot = binder_domains.len();
            loop {
                if slot == 0 {
                    break;
                }
                slot -= 1;
                assignment[slot] += 1;
                if assignment[slot] < binder_domains[slot].1.len() {
                    break;
                }
                assignment[slot] = 0;
            }
            if assignment.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    Ok(base)
}

fn lower_init_atoms(
    names: &mut Names,
    sorts: &Sorts,
    view: &TheoryView<'_>,
    atoms: &[GroundAtomAst],
    origin: &str,
) -> Result<Vec<(Sym, Vec<Sym>)>> {
    let mut out = Vec::new();
    for atom in atoms {
        let Some(&arity) = view.fluents.get(&atom.fluent) else {
            return Err(at_span(
                origin,
                atom.span,
                format!("unknown fluent {}", atom.fluent),
                None,
            ));
        };
        if atom.args.len() != arity {
            return Err(at_span(
                origin,
                atom.span,
                format!("fluent {} takes {arity} arguments, got {}", atom.fluent, atom.args.len()),
                None,
            ));
        }
        let fluent = names.intern(&atom.fluent);
        let mut args = Vec::new();
        for arg in &atom.args {
            let sym = names
                .get(arg)
                .filter(|s| sorts.object(*s).is_some())
                .ok_or_else(|| {
                    at_span(origin, atom.span, format!("unknown object {arg}"), None)
                })?;
            args.push(sym);
        }
        out.push((fluent, args));
    }
    Ok(out)
}

fn lower_mapping(
    names: &mut Names,
    doc: &MappingDoc,
    hl: Arc<GroundTheory>,
    ll: Arc<GroundTheory>,
    origin: &str,
) -> Result<RefinementMapping> {
    let view = TheoryView::of(&ll, Some(&hl));
    let mut actions = HashMap::new();
    for decl in &doc.actions {
        let hl_action = names
            .get(&decl.name)
            .and_then(|sym| hl.action_id(sym).map(|id| (sym, id)));
        let Some((action_sym, action_id)) = hl_action else {
            return Err(at_span(
                origin,
                decl.span,
                format!("unknown high-level action {}", decl.name),
                None,
            ));
        };
        if actions.contains_key(&action_sym) {
            return Err(at_span(
                origin,
                decl.span,
                format!("duplicate action clause for {}", decl.name),
                None,
            ));
        }
        let schema = &hl.actions[action_id];
        if decl.params.len() != schema.params.len() {
            return Err(at_span(
                origin,
                decl.span,
                format!(
                    "action {} takes {} parameters, clause declares {}",
                    decl.name,
                    schema.params.len(),
                    decl.params.len()
                ),
                None,
            ));
        }
        for ((_, sort_name), (_, expected)) in decl.params.iter().zip(&schema.params) {
            let declared = names.get(sort_name).and_then(|sym| hl.sorts.by_name(sym));
            if declared != Some(*expected) {
                return Err(at_span(
                    origin,
                    decl.span,
                    format!("parameter sort {sort_name} does not match the action declaration"),
                    None,
                ));
            }
        }
        let mut ctx = Ctx::new(origin, names, &view);
        let mut params = Vec::new();
        for (var, _) in &decl.params {
            let sym = intern_binder(ctx.names, var, decl.span, origin)?;
            ctx.scope.push((var.clone(), sym));
            params.push(sym);
        }
        let agent = ctx.lower_program(&decl.agent, ProgramKind::Agent)?.canonicalize();
        let system_var = intern_binder(ctx.names, &decl.system_var, decl.span, origin)?;
        ctx.scope.push((decl.system_var.clone(), system_var));
        let system = ctx.lower_program(&decl.system, ProgramKind::System)?.canonicalize();
        actions.insert(action_sym, MappedAction { params, agent, system_var, system });
    }
    for schema in &hl.actions {
        if !actions.contains_key(&schema.name) {
            return Err(Error::spec(format!(
                "mapping {} has no clause for action {}",
                doc.name,
                hl.names.resolve(schema.name)
            )));
        }
    }

    let mut fluents = HashMap::new();
    for decl in &doc.fluents {
        let hl_fluent = names
            .get(&decl.name)
            .and_then(|sym| hl.fluent_id(sym).map(|id| (sym, id)));
        let Some((fluent_sym, fluent_id)) = hl_fluent else {
            return Err(at_span(
                origin,
                decl.span,
                format!("unknown high-level fluent {}", decl.name),
                None,
            ));
        };
        if fluents.contains_key(&fluent_sym) {
            return Err(at_span(
                origin,
                decl.span,
                format!("duplicate fluent clause for {}", decl.name),
                None,
            ));
        }
        let arity = hl.fluents[fluent_id].param_sorts.len();
        if decl.params.len() != arity {
            return Err(at_span(
                origin,
                decl.span,
                format!(
                    "fluent {} takes {arity} parameters, clause declares {}",
                    decl.name,
                    decl.params.len()
                ),
                None,
            ));
        }
        let mut ctx = Ctx::new(origin, names, &view);
        let mut params = Vec::new();
        for var in &decl.params {
            let sym = intern_binder(ctx.names, var, decl.span, origin)?;
            ctx.scope.push((var.clone(), sym));
            params.push(sym);
        }
        let body = ctx.lower_formula(&decl.body)?;
        fluents.insert(fluent_sym, MappedFluent { params, body });
    }
    for schema in &hl.fluents {
        if !fluents.contains_key(&schema.name) {
            return Err(Error::spec(format!(
                "mapping {} has no clause for fluent {}",
                doc.name,
                hl.names.resolve(schema.name)
            )));
        }
    }

    Ok(RefinementMapping {
        name: doc.name.clone(),
        names: Arc::new((*names).clone()),
        hl,
        ll,
        actions,
        fluents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Env, Value};
    use crate::limits::Limits;

    const GRID: &str = "
theory grid {
    sort loc = { p, q };
    updates mark(loc);
    fluent At(loc);
    fluent Jammed;
    fluent Linked(loc, loc);
    fluent Tagged(loc);
    action move(d: loc) reactions r in { Arrive, Slip } {
        poss_ag: !At(d);
        poss: poss_ag & (r = Arrive | r = Slip & !Jammed);
    }
    action ping() reactions r in { Pong, Pang } {
        poss_ag: true;
        poss: r = Pong;
    }
    action scan() reactions e subset of { mark(l) where l: loc } {
        poss_ag: true;
        poss: !(mark(p) in e & mark(q) in e);
    }
    ssa At(l): (exists o: loc, r: reactions(move) . a = move(l, r))
        | (At(l) & !(exists d: loc, r: reactions(move) . a = move(d, r)));
    ssa Jammed: (exists d: loc . a = move(d, Slip)) | Jammed;
    ssa Tagged(l): (exists e: reactions(scan) . a = scan(e) & mark(l) in e) | Tagged(l);
    init {
        closed: At(p), Linked(p, q), Linked(q, p);
        open: Tagged(q);
    }
}";

    #[test]
    fn theories_load_and_execute() {
        let mut session = Session::new();
        let theory = session.load_theory(GRID, "grid.ndt").unwrap();
        assert_eq!(theory.fluents.len(), 4);
        assert_eq!(theory.actions.len(), 3);
        let initial = theory.initial_states(&Limits::default()).unwrap();
        assert_eq!(initial.len(), 2);
        let act = theory
            .ground_system_action(
                session.names().get("move").unwrap(),
                vec![session.names().get("q").unwrap()],
                Value::Obj(session.names().get("Slip").unwrap()),
            )
            .unwrap();
        let next = theory.successor(&initial[0], &act).unwrap();
        assert!(theory
            .holds(&next, session.names().get("Jammed").unwrap(), &[])
            .unwrap());
    }

    #[test]
    fn subset_reactions_expand_in_pattern_order() {
        let mut session = Session::new();
        let theory = session.load_theory(GRID, "grid.ndt").unwrap();
        let scan = theory.action_id(session.names().get("scan").unwrap()).unwrap();
        match theory.reactions_of(scan) {
            ReactionSort::Subsets { base, .. } => {
                let rendered: Vec<String> = base
                    .iter()
                    .map(|atom| {
                        let args: Vec<&str> =
                            atom.args.iter().map(|a| theory.names.resolve(*a)).collect();
                        format!("{}({})", theory.names.resolve(atom.family), args.join(","))
                    })
                    .collect();
                assert_eq!(rendered, vec!["mark(p)", "mark(q)"]);
            }
            other => panic!("unexpected reaction sort {other:?}"),
        }
    }

    #[test]
    fn validation_passes_on_the_loaded_theory() {
        let mut session = Session::new();
        let theory = session.load_theory(GRID, "grid.ndt").unwrap();
        let report = theory.validate(&Limits::default()).unwrap();
        assert!(report.passed(), "violations: {:?}", report.violations);
    }

    #[test]
    fn programs_load_against_their_theory() {
        let mut session = Session::new();
        session.load_theory(GRID, "grid.ndt").unwrap();
        let programs = session
            .load_programs(
                "agent program visit over grid { [pi d: loc . move(d)]*; At(q)? }",
                "visit.ndp",
            )
            .unwrap();
        assert_eq!(programs.len(), 1);
        assert_eq!(
            programs[0].program.render(session.names()),
            "(pi d: loc . move(d))*; At(q)?"
        );
    }

    #[test]
    fn if_and_while_desugar_to_tests_and_choice() {
        let mut session = Session::new();
        session.load_theory(GRID, "grid.ndt").unwrap();
        let body =
            "agent program cautious over grid { if Jammed then ping else move(q) endif }";
        let program = session.load_programs(body, "c.ndp").unwrap().remove(0).program;
        match &program {
            Program::Choice(parts) => {
                assert_eq!(parts.len(), 2);
                assert!(matches!(&parts[0], Program::Seq(seq) if seq.len() == 2));
            }
            other => panic!("expected a choice, got {other:?}"),
        }
        let looped = "agent program drain over grid { while Jammed do ping endwhile }";
        let program = session.load_programs(looped, "d.ndp").unwrap().remove(0).program;
        assert!(matches!(&program, Program::Seq(seq) if matches!(seq[0], Program::Star(_))));
    }

    #[test]
    fn unknown_names_are_rejected_with_positions() {
        let mut session = Session::new();
        let err = session
            .load_theory(
                "theory t { sort s = { x }; fluent F(s); action go() reactions r in { Ok } {
                    poss_ag: F(y);
                    poss: poss_ag;
                } init { closed: ; } }",
                "t.ndt",
            )
            .unwrap_err();
        match err {
            Error::Parse { diagnostics, .. } => {
                assert!(diagnostics[0].message.contains("unknown name y"));
                assert_eq!(diagnostics[0].line, 2);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn mappings_cover_and_instantiate() {
        let mut session = Session::new();
        session.load_theory(GRID, "grid.ndt").unwrap();
        let hi = "
theory grid_hi {
    sort loc = { p, q };
    fluent At_H(loc);
    action hop(d: loc) reactions r in { Done } {
        poss_ag: !At_H(d);
        poss: poss_ag & r = Done;
    }
    ssa At_H(l): (exists r: reactions(hop) . a = hop(l, r))
        | (At_H(l) & !(exists d: loc, r: reactions(hop) . a = hop(d, r)));
    init { closed: At_H(p); }
}";
        session.load_theory(hi, "grid_hi.ndt").unwrap();
        let mapping = session
            .load_mapping(
                "
mapping hop_map from grid_hi to grid {
    action hop(d: loc) {
        agent: move(d); At(d)?;
        system(r): pi rl: reactions(move) . move(d, rl); At(d)?; (r = Done)?;
    }
    fluent At_H(l): At(l);
}",
                "hop.ndm",
            )
            .unwrap();
        let hl = mapping.hl.clone();
        let q = session.names().get("q").unwrap();
        let hop = session.names().get("hop").unwrap();
        let act = hl.ground_agent_action(hop, vec![q]).unwrap();
        let agent = mapping.agent_program(&act).unwrap();
        assert_eq!(agent.render(session.names()), "move(q); At(q)?");
        let done = Value::Obj(session.names().get("Done").unwrap());
        let sys = hl.ground_system_action(hop, vec![q], done).unwrap();
        let system = mapping.system_program(&sys).unwrap();
        assert_eq!(
            system.render(session.names()),
            "pi rl: reactions(move) . move(q, rl); At(q)?; (Done = Done)?"
        );
        let at_h = session.names().get("At_H").unwrap();
        let mapped = mapping
            .fluent_formula(at_h, &[Term::Obj(q)])
            .unwrap();
        let ll = mapping.ll.clone();
        let state = ll.initial_states(&Limits::default()).unwrap()[0].clone();
        let mut env = Env::plain();
        assert!(!ll.eval(&state, &mut env, &mapped).unwrap());
    }

    #[test]
    fn incomplete_mappings_are_rejected() {
        let mut session = Session::new();
        session.load_theory(GRID, "grid.ndt").unwrap();
        session
            .load_theory(
                "
theory tiny_hi {
    sort loc = { p, q };
    fluent Here(loc);
    action hop(d: loc) reactions r in { Done } {
        poss_ag: true;
        poss: poss_ag;
    }
    init { closed: Here(p); }
}",
                "tiny.ndt",
            )
            .unwrap();
        let err = session
            .load_mapping(
                "mapping m from tiny_hi to grid { fluent Here(l): At(l); }",
                "m.ndm",
            )
            .unwrap_err();
        assert!(err.to_string().contains("no clause for action hop"));
    }
}
