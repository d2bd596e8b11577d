//! Ground theories: fluent and action schemas, preconditions, successor-state
//! axioms, initial models, and the two reaction well-formedness checks.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::domain::eval::{eval_formula, Env};
use crate::domain::formula::Formula;
use crate::domain::state::{render_atom, AtomTable, State, StateStore};
use crate::domain::universe::{ReactionSort, Sorts, UpdateFamily, Value};
use crate::domain::{ActionId, FluentId, SortId};
use crate::error::{Error, Result};
use crate::intern::{Names, Sym};
use crate::limits::Limits;

/// Declared fluent with its parameter sorts.
#[derive(Debug, Clone)]
pub struct FluentSchema {
    pub name: Sym,
    pub param_sorts: Vec<SortId>,
}

/// Declared action type. `poss_ag` is the agent's precondition over the
/// parameters; `poss` is the full system precondition over the parameters and
/// the reaction variable.
#[derive(Debug, Clone)]
pub struct ActionSchema {
    pub name: Sym,
    pub params: Vec<(Sym, SortId)>,
    pub reaction_var: Sym,
    pub reactions: ReactionSort,
    pub poss_ag: Formula,
    pub poss: Formula,
}

/// Successor-state axiom for one fluent: `body` holds exactly when the atom
/// is true after the bound action, with `params` naming the atom's arguments.
#[derive(Debug, Clone)]
pub struct Ssa {
    pub params: Vec<Sym>,
    pub body: Formula,
}

/// Agent-chosen part of an action instance: the type and object arguments,
/// with the environment reaction left open.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAgentAction {
    pub action: ActionId,
    pub name: Sym,
    pub args: Vec<Sym>,
}

/// Full action instance including the environment's reaction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundSystemAction {
    pub action: ActionId,
    pub name: Sym,
    pub args: Vec<Sym>,
    pub reaction: Value,
}

impl GroundSystemAction {
    pub fn agent_part(&self) -> GroundAgentAction {
        GroundAgentAction {
            action: self.action,
            name: self.name,
            args: self.args.clone(),
        }
    }
}

/// Sequence of executed system actions.
pub type Trace = Vec<GroundSystemAction>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Some reaction is possible although the agent's precondition fails.
    ReactionIndependence,
    /// The agent's precondition holds but no reaction is possible.
    ReactionExistence,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationViolation {
    pub kind: ViolationKind,
    pub action: String,
    pub state: Vec<String>,
    pub depth: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<ValidationViolation>,
    pub states_explored: usize,
    pub initial_models: usize,
    pub depth: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A fully grounded theory over finite sorts. Built by the loader and then
/// immutable; the reaction cache only memoizes state-independent reaction
/// filters.
#[derive(Debug)]
pub struct GroundTheory {
    pub name: Sym,
    pub names: Arc<Names>,
    pub sorts: Sorts,
    pub update_families: Vec<UpdateFamily>,
    pub fluents: Vec<FluentSchema>,
    pub actions: Vec<ActionSchema>,
    /// Indexed by fluent; `None` means the fluent is rigid.
    pub ssas: Vec<Option<Ssa>>,
    pub atoms: AtomTable,
    /// Truth assignment shared by all initial models, open atoms false.
    pub init_base: State,
    /// Atom ids left open by the initial theory, ascending.
    pub open_atoms: Vec<usize>,
    fluent_index: HashMap<Sym, FluentId>,
    action_index: HashMap<Sym, ActionId>,
    reaction_cache: Mutex<HashMap<(ActionId, Vec<Sym>), Arc<Vec<Value>>>>,
}

impl GroundTheory {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: Sym,
        names: Arc<Names>,
        sorts: Sorts,
        update_families: Vec<UpdateFamily>,
        fluents: Vec<FluentSchema>,
        actions: Vec<ActionSchema>,
        ssas: Vec<Option<Ssa>>,
        closed_true: &[(Sym, Vec<Sym>)],
        open: &[(Sym, Vec<Sym>)],
    ) -> Result<GroundTheory> {
        if ssas.len() != fluents.len() {
            return Err(Error::spec(format!(
                "theory {} declares {} fluents but {} successor-state axioms",
                names.resolve(name),
                fluents.len(),
                ssas.len()
            )));
        }
        let mut fluent_index = HashMap::new();
        for (id, fluent) in fluents.iter().enumerate() {
            if fluent_index.insert(fluent.name, id).is_some() {
                return Err(Error::spec(format!(
                    "duplicate fluent {}",
                    names.resolve(fluent.name)
                )));
            }
            if let Some(ssa) = &ssas[id] {
                if ssa.params.len() != fluent.param_sorts.len() {
                    return Err(Error::spec(format!(
                        "successor-state axiom for {} binds {} parameters, fluent has {}",
                        names.resolve(fluent.name),
                        ssa.params.len(),
                        fluent.param_sorts.len()
                    )));
                }
            }
        }
        let mut action_index = HashMap::new();
        for (id, action) in actions.iter().enumerate() {
            if action_index.insert(action.name, id).is_some() {
                return Err(Error::spec(format!(
                    "duplicate action {}",
                    names.resolve(action.name)
                )));
            }
            if action.reactions.count() == 0 {
                return Err(Error::spec(format!(
                    "action {} declares no reactions",
                    names.resolve(action.name)
                )));
            }
        }
        let param_sorts: Vec<Vec<SortId>> =
            fluents.iter().map(|f| f.param_sorts.clone()).collect();
        let atoms = AtomTable::new(&sorts, &param_sorts);
        let lookup = |fluent: Sym, args: &[Sym]| -> Result<usize> {
            let id = fluent_index.get(&fluent).copied().ok_or_else(|| {
                Error::spec(format!(
                    "initial theory mentions unknown fluent {}",
                    names.resolve(fluent)
                ))
            })?;
            atoms.atom_id(&sorts, id, args).ok_or_else(|| {
                Error::spec(format!(
                    "initial atom {} has ill-sorted arguments",
                    render_atom(&names, fluent, args)
                ))
            })
        };
        let mut init_base = State::empty(atoms.len());
        for (fluent, args) in closed_true {
            init_base.set(lookup(*fluent, args)?, true);
        }
        let mut open_atoms = Vec::with_capacity(open.len());
        for (fluent, args) in open {
            let atom = lookup(*fluent, args)?;
            if init_base.get(atom) {
                return Err(Error::spec(format!(
                    "atom {} is both closed true and open",
                    render_atom(&names, *fluent, args)
                )));
            }
            open_atoms.push(atom);
        }
        open_atoms.sort_unstable();
        open_atoms.dedup();
        Ok(GroundTheory {
            name,
            names,
            sorts,
            update_families,
            fluents,
            actions,
            ssas,
            atoms,
            init_base,
            open_atoms,
            fluent_index,
            action_index,
            reaction_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn fluent_id(&self, name: Sym) -> Option<FluentId> {
        self.fluent_index.get(&name).copied()
    }

    pub fn action_id(&self, name: Sym) -> Option<ActionId> {
        self.action_index.get(&name).copied()
    }

    pub fn reactions_of(&self, action: ActionId) -> &ReactionSort {
        &self.actions[action].reactions
    }

    /// Builds and sort-checks an agent action instance.
    pub fn ground_agent_action(&self, name: Sym, args: Vec<Sym>) -> Result<GroundAgentAction> {
        let id = self
            .action_id(name)
            .ok_or_else(|| Error::spec(format!("unknown action {}", self.names.resolve(name))))?;
        let schema = &self.actions[id];
        if schema.params.len() != args.len() {
            return Err(Error::spec(format!(
                "action {} takes {} arguments, got {}",
                self.names.resolve(name),
                schema.params.len(),
                args.len()
            )));
        }
        for (&(_, sort), &arg) in schema.params.iter().zip(&args) {
            if !self.sorts.contains(sort, arg) {
                return Err(Error::spec(format!(
                    "argument {} of {} is not in sort {}",
                    self.names.resolve(arg),
                    self.names.resolve(name),
                    self.names.resolve(self.sorts.def(sort).name)
                )));
            }
        }
        Ok(GroundAgentAction { action: id, name, args })
    }

    /// Builds a system action instance, checking the reaction sort as well.
    pub fn ground_system_action(
        &self,
        name: Sym,
        args: Vec<Sym>,
        reaction: Value,
    ) -> Result<GroundSystemAction> {
        let base = self.ground_agent_action(name, args)?;
        let schema = &self.actions[base.action];
        if !schema.reactions.contains(&reaction) {
            return Err(Error::spec(format!(
                "{} is not a reaction of action {}",
                reaction.display(&self.names),
                self.names.resolve(name)
            )));
        }
        Ok(GroundSystemAction {
            action: base.action,
            name: base.name,
            args: base.args,
            reaction,
        })
    }

    /// All agent action instances, ordered by rendered name then arguments.
    pub fn ground_agent_actions(&self) -> Vec<GroundAgentAction> {
        let mut order: Vec<ActionId> = (0..self.actions.len()).collect();
        order.sort_by(|&a, &b| {
            self.names
                .resolve(self.actions[a].name)
                .cmp(self.names.resolve(self.actions[b].name))
        });
        let mut out = Vec::new();
        for id in order {
            let schema = &self.actions[id];
            let mut tuples: Vec<Vec<Sym>> = vec![Vec::new()];
            for &(_, sort) in &schema.params {
                let objects = &self.sorts.def(sort).objects;
                let mut next = Vec::with_capacity(tuples.len() * objects.len());
                for tuple in &tuples {
                    for &obj in objects {
                        let mut extended = tuple.clone();
                        extended.push(obj);
                        next.push(extended);
                    }
                }
                tuples = next;
            }
            for args in tuples {
                out.push(GroundAgentAction { action: id, name: schema.name, args });
            }
        }
        out
    }

    /// All system instances of one agent action, reactions in sort order.
    pub fn system_instances(&self, act: &GroundAgentAction) -> Vec<GroundSystemAction> {
        self.actions[act.action]
            .reactions
            .enumerate()
            .iter()
            .map(|reaction| GroundSystemAction {
                action: act.action,
                name: act.name,
                args: act.args.clone(),
                reaction: reaction.clone(),
            })
            .collect()
    }

    fn action_env(&self, schema: &ActionSchema, args: &[Sym]) -> Env<'static> {
        let mut env = Env::plain();
        for (&(var, _), &arg) in schema.params.iter().zip(args) {
            env.bind(var, Value::Obj(arg));
        }
        env
    }

    pub fn eval(&self, state: &State, env: &mut Env, formula: &Formula) -> Result<bool> {
        eval_formula(self, state, env, formula)
    }

    /// Truth of one ground fluent atom.
    pub fn holds(&self, state: &State, fluent: Sym, args: &[Sym]) -> Result<bool> {
        let id = self.fluent_id(fluent).ok_or_else(|| {
            Error::execution(format!("unknown fluent {}", self.names.resolve(fluent)))
        })?;
        let atom = self.atoms.atom_id(&self.sorts, id, args).ok_or_else(|| {
            Error::execution(format!(
                "no atom {}",
                render_atom(&self.names, fluent, args)
            ))
        })?;
        Ok(state.get(atom))
    }

    pub fn poss_ag(&self, state: &State, act: &GroundAgentAction) -> Result<bool> {
        let schema = &self.actions[act.action];
        let mut env = self.action_env(schema, &act.args);
        eval_formula(self, state, &mut env, &schema.poss_ag)
    }

    pub fn poss(&self, state: &State, act: &GroundSystemAction) -> Result<bool> {
        let schema = &self.actions[act.action];
        let mut env = self.action_env(schema, &act.args);
        env.bind(schema.reaction_var, act.reaction.clone());
        eval_formula(self, state, &mut env, &schema.poss)
    }

    /// Reactions the environment may legally answer with, i.e. those whose
    /// full precondition holds. The reaction-dependent part of the
    /// precondition is memoized per action instance when it cannot depend on
    /// the state.
    pub fn legal_reactions(
        &self,
        state: &State,
        act: &GroundAgentAction,
    ) -> Result<Arc<Vec<Value>>> {
        let schema = &self.actions[act.action];
        let mut env = self.action_env(schema, &act.args);
        let mut state_part = Vec::new();
        let mut reaction_part = Vec::new();
        for conjunct in flatten_and(&schema.poss) {
            if conjunct.free_vars().contains(&schema.reaction_var) {
                reaction_part.push(conjunct);
            } else {
                state_part.push(conjunct);
            }
        }
        for conjunct in &state_part {
            if !eval_formula(self, state, &mut env, conjunct)? {
                return Ok(Arc::new(Vec::new()));
            }
        }
        let cacheable = reaction_part.iter().all(|c| c.is_state_independent());
        if cacheable {
            let cache = self.reaction_cache.lock().unwrap();
            if let Some(hit) = cache.get(&(act.action, act.args.clone())) {
                return Ok(hit.clone());
            }
        }
        let mut legal = Vec::new();
        for reaction in schema.reactions.enumerate().iter() {
            env.bind(schema.reaction_var, reaction.clone());
            let mut ok = true;
            for conjunct in &reaction_part {
                if !eval_formula(self, state, &mut env, conjunct)? {
                    ok = false;
                    break;
                }
            }
            env.pop();
            if ok {
                legal.push(reaction.clone());
            }
        }
        let legal = Arc::new(legal);
        if cacheable {
            self.reaction_cache
                .lock()
                .unwrap()
                .insert((act.action, act.args.clone()), legal.clone());
        }
        Ok(legal)
    }

    /// Applies one system action, recomputing every non-rigid atom from its
    /// successor-state axiom. Fails if the action is not possible.
    pub fn successor(&self, state: &State, act: &GroundSystemAction) -> Result<State> {
        if !self.poss(state, act)? {
            return Err(Error::execution(format!(
                "action {} is not possible in the current state",
                self.render_system_action(act)
            )));
        }
        let mut next = state.clone();
        let mut env = Env::with_action(act);
        for (fluent, ssa) in self.ssas.iter().enumerate() {
            let Some(ssa) = ssa else { continue };
            let (start, end) = self.atoms.fluent_range(fluent);
            for atom in start..end {
                let (_, args) = self.atoms.atom(&self.sorts, atom);
                let mark = env.snapshot();
                for (&param, &arg) in ssa.params.iter().zip(&args) {
                    env.bind(param, Value::Obj(arg));
                }
                let value = eval_formula(self, state, &mut env, &ssa.body)?;
                env.rewind(mark);
                next.set(atom, value);
            }
        }
        Ok(next)
    }

    /// Replays a trace from a state, checking possibility at each step.
    pub fn replay(&self, from: &State, trace: &[GroundSystemAction]) -> Result<State> {
        let mut state = from.clone();
        for act in trace {
            state = self.successor(&state, act)?;
        }
        Ok(state)
    }

    /// All initial models: every truth assignment to the open atoms over the
    /// shared closed base, in binary-counter order.
    pub fn initial_states(&self, limits: &Limits) -> Result<Vec<State>> {
        let k = self.open_atoms.len();
        if k > limits.max_open_atoms {
            return Err(Error::capacity(format!(
                "{} open initial atoms exceed the limit of {}",
                k, limits.max_open_atoms
            )));
        }
        let mut out = Vec::with_capacity(1usize << k);
        for mask in 0u64..(1u64 << k) {
            let mut state = self.init_base.clone();
            for (bit, &atom) in self.open_atoms.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    state.set(atom, true);
                }
            }
            out.push(state);
        }
        Ok(out)
    }

    /// Checks the two reaction requirements over all states reachable within
    /// the depth bound from any initial model: a possible reaction implies
    /// the agent precondition, and the agent precondition implies some
    /// possible reaction.
    pub fn validate(&self, limits: &Limits) -> Result<ValidationReport> {
        let agent_actions = self.ground_agent_actions();
        let initial = self.initial_states(limits)?;
        let initial_models = initial.len();
        let mut store = StateStore::new();
        let mut queue: VecDeque<(u32, usize)> = VecDeque::new();
        for state in initial {
            let before = store.len();
            let id = store.insert(state);
            if store.len() > before {
                queue.push_back((id, 0));
            }
        }
        let mut violations = Vec::new();
        while let Some((id, depth)) = queue.pop_front() {
            let state = store.state(id).clone();
            for act in &agent_actions {
                let agent_ok = self.poss_ag(&state, act)?;
                let legal = self.legal_reactions(&state, act)?;
                if agent_ok && legal.is_empty() {
                    violations.push(ValidationViolation {
                        kind: ViolationKind::ReactionExistence,
                        action: self.render_agent_action(act),
                        state: self.render_state(&state),
                        depth,
                    });
                }
                if !agent_ok && !legal.is_empty() {
                    let witness = GroundSystemAction {
                        action: act.action,
                        name: act.name,
                        args: act.args.clone(),
                        reaction: legal[0].clone(),
                    };
                    violations.push(ValidationViolation {
                        kind: ViolationKind::ReactionIndependence,
                        action: self.render_system_action(&witness),
                        state: self.render_state(&state),
                        depth,
                    });
                }
                if depth < limits.depth {
                    for reaction in legal.iter() {
                        let step = GroundSystemAction {
                            action: act.action,
                            name: act.name,
                            args: act.args.clone(),
                            reaction: reaction.clone(),
                        };
                        let next = self.successor(&state, &step)?;
                        let before = store.len();
                        let next_id = store.insert(next);
                        if store.len() > before {
                            queue.push_back((next_id, depth + 1));
                        }
                    }
                }
            }
        }
        Ok(ValidationReport {
            violations,
            states_explored: store.len(),
            initial_models,
            depth: limits.depth,
        })
    }

    pub fn render_agent_action(&self, act: &GroundAgentAction) -> String {
        render_atom(&self.names, act.name, &act.args)
    }

    pub fn render_system_action(&self, act: &GroundSystemAction) -> String {
        let reaction = act.reaction.display(&self.names);
        if act.args.is_empty() {
            format!("{}({})", self.names.resolve(act.name), reaction)
        } else {
            let args: Vec<&str> = act.args.iter().map(|&a| self.names.resolve(a)).collect();
            format!(
                "{}({},{})",
                self.names.resolve(act.name),
                args.join(","),
                reaction
            )
        }
    }

    /// True atoms of a state, rendered in atom-table order.
    pub fn render_state(&self, state: &State) -> Vec<String> {
        (0..self.atoms.len())
            .filter(|&atom| state.get(atom))
            .map(|atom| {
                let (fluent, args) = self.atoms.atom(&self.sorts, atom);
                render_atom(&self.names, self.fluents[fluent].name, &args)
            })
            .collect()
    }
}

fn flatten_and(formula: &Formula) -> Vec<&Formula> {
    fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
        match f {
            Formula::And(parts) => parts.iter().for_each(|p| walk(p, out)),
            other => out.push(other),
        }
    }
    let mut out = Vec::new();
    walk(formula, &mut out);
    out
}

#[cfg(test)]
pub(crate) mod testkit {
    use super::*;
    use crate::domain::formula::{Term, UpdatePat};
    use crate::domain::universe::{UpdateAtom, VarDomain};

    /// Two-location theory exercising token and subset reactions, rigid
    /// fluents, and state-dependent reaction filters.
    pub(crate) fn gridlet() -> GroundTheory {
        let mut names = Names::new();
        let p = names.intern("p");
        let q = names.intern("q");
        let loc = names.intern("loc");
        let at = names.intern("At");
        let jammed = names.intern("Jammed");
        let linked = names.intern("Linked");
        let tagged = names.intern("Tagged");
        let mv = names.intern("move");
        let ping = names.intern("ping");
        let scan = names.intern("scan");
        let arrive = names.intern("Arrive");
        let slip = names.intern("Slip");
        let pong = names.intern("Pong");
        let pang = names.intern("Pang");
        let mark = names.intern("mark");
        let d = names.intern("d");
        let l = names.intern("l");
        let r = names.intern("r");
        let e = names.intern("e");
        let theory_name = names.intern("gridlet");

        let mut sorts = Sorts::new();
        let loc_id = sorts.add(&names, loc, vec![p, q]).unwrap();
        let loc_dom = VarDomain::Objects { sort: loc, values: Arc::new(vec![p, q]) };

        let move_reactions = ReactionSort::Tokens(Arc::new(vec![arrive, slip]));
        let ping_reactions = ReactionSort::Tokens(Arc::new(vec![pong, pang]));
        let scan_reactions = ReactionSort::subsets(vec![
            UpdateAtom { family: mark, args: vec![p] },
            UpdateAtom { family: mark, args: vec![q] },
        ]);
        let scan_dom = VarDomain::Reactions { action: scan, sort: scan_reactions.clone() };

        let at_d = Formula::Atom { fluent: at, args: vec![Term::Var(d)] };
        let move_poss_ag = Formula::not(at_d.clone());
        let move_poss = Formula::And(vec![
            Formula::not(at_d),
            Formula::Or(vec![
                Formula::Eq(Term::Var(r), Term::Obj(arrive)),
                Formula::And(vec![
                    Formula::Eq(Term::Var(r), Term::Obj(slip)),
                    Formula::not(Formula::Atom { fluent: jammed, args: vec![] }),
                ]),
            ]),
        ]);
        let ping_poss = Formula::Eq(Term::Var(r), Term::Obj(pong));
        let scan_poss = Formula::not(Formula::And(vec![
            Formula::InReaction {
                atom: UpdatePat { family: mark, args: vec![Term::Obj(p)] },
                set: Term::Var(e),
            },
            Formula::InReaction {
                atom: UpdatePat { family: mark, args: vec![Term::Obj(q)] },
                set: Term::Var(e),
            },
        ]));

        let actions = vec![
            ActionSchema {
                name: mv,
                params: vec![(d, loc_id)],
                reaction_var: r,
                reactions: move_reactions,
                poss_ag: move_poss_ag,
                poss: move_poss,
            },
            ActionSchema {
                name: ping,
                params: vec![],
                reaction_var: r,
                reactions: ping_reactions,
                poss_ag: Formula::True,
                poss: ping_poss,
            },
            ActionSchema {
                name: scan,
                params: vec![],
                reaction_var: e,
                reactions: scan_reactions,
                poss_ag: Formula::True,
                poss: scan_poss,
            },
        ];

        let fluents = vec![
            FluentSchema { name: at, param_sorts: vec![loc_id] },
            FluentSchema { name: jammed, param_sorts: vec![] },
            FluentSchema { name: linked, param_sorts: vec![loc_id, loc_id] },
            FluentSchema { name: tagged, param_sorts: vec![loc_id] },
        ];

        let at_ssa = Ssa {
            params: vec![l],
            body: Formula::Or(vec![
                Formula::ActEq {
                    action: mv,
                    args: vec![Term::Var(l)],
                    reaction: Term::Obj(arrive),
                },
                Formula::And(vec![
                    Formula::Atom { fluent: at, args: vec![Term::Var(l)] },
                    Formula::not(Formula::Exists(
                        d,
                        loc_dom.clone(),
                        Box::new(Formula::ActEq {
                            action: mv,
                            args: vec![Term::Var(d)],
                            reaction: Term::Obj(arrive),
                        }),
                    )),
                ]),
            ]),
        };
        let jammed_ssa = Ssa {
            params: vec![],
            body: Formula::Or(vec![
                Formula::Exists(
                    d,
                    loc_dom,
                    Box::new(Formula::ActEq {
                        action: mv,
                        args: vec![Term::Var(d)],
                        reaction: Term::Obj(slip),
                    }),
                ),
                Formula::Atom { fluent: jammed, args: vec![] },
            ]),
        };
        let tagged_ssa = Ssa {
            params: vec![l],
            body: Formula::Or(vec![
                Formula::Exists(
                    e,
                    scan_dom,
                    Box::new(Formula::And(vec![
                        Formula::ActEq { action: scan, args: vec![], reaction: Term::Var(e) },
                        Formula::InReaction {
                            atom: UpdatePat { family: mark, args: vec![Term::Var(l)] },
                            set: Term::Var(e),
                        },
                    ])),
                ),
                Formula::Atom { fluent: tagged, args: vec![Term::Var(l)] },
            ]),
        };
        let ssas = vec![Some(at_ssa), Some(jammed_ssa), None, Some(tagged_ssa)];

        GroundTheory::new(
            theory_name,
            Arc::new(names),
            sorts,
            vec![UpdateFamily { name: mark, param_sorts: vec![loc_id] }],
            fluents,
            actions,
            ssas,
            &[(linked, vec![p, q]), (linked, vec![q, p]), (at, vec![p])],
            &[(tagged, vec![q])],
        )
        .unwrap()
    }
}
