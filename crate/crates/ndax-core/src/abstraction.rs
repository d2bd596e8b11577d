//! Refinement mappings from a high-level theory to a low-level one: each
//! high-level action maps to low-level programs (an agent view and a
//! system view), and each high-level fluent maps to a low-level formula.
//! The checks in this module establish when such a mapping makes the
//! high-level theory a faithful abstraction of the low-level one.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::congolog::Program;
use crate::domain::{
    Env, Formula, GroundAgentAction, GroundSystemAction, GroundTheory, State, StateStore, Term,
    UpdateAtom, Value, VarDomain,
};
use crate::error::{Error, Result};
use crate::games;
use crate::intern::{Names, Sym};
use crate::limits::Limits;

/// How one high-level action translates: the agent view leaves reactions to
/// the environment, the system view is keyed by the high-level reaction
/// variable. Parameters occur free in both bodies.
#[derive(Debug, Clone)]
pub struct MappedAction {
    pub params: Vec<Sym>,
    pub agent: Program,
    pub system_var: Sym,
    pub system: Program,
}

/// Low-level definition of one high-level fluent, with the fluent's
/// parameters free in the body.
#[derive(Debug, Clone)]
pub struct MappedFluent {
    pub params: Vec<Sym>,
    pub body: Formula,
}

/// A complete translation of a high-level theory into low-level programs
/// and formulas, covering every high-level action and fluent.
#[derive(Debug)]
pub struct RefinementMapping {
    pub name: String,
    pub names: Arc<Names>,
    pub hl: Arc<GroundTheory>,
    pub ll: Arc<GroundTheory>,
    pub actions: HashMap<Sym, MappedAction>,
    pub fluents: HashMap<Sym, MappedFluent>,
}

impl RefinementMapping {
    fn action_clause(&self, name: Sym, arity: usize) -> Result<&MappedAction> {
        let clause = self.actions.get(&name).ok_or_else(|| {
            Error::spec(format!("no action clause for {}", self.names.resolve(name)))
        })?;
        if clause.params.len() != arity {
            return Err(Error::spec(format!(
                "action clause for {} expects {} arguments, got {arity}",
                self.names.resolve(name),
                clause.params.len()
            )));
        }
        Ok(clause)
    }

    /// The low-level agent program for one ground high-level action.
    pub fn agent_program(&self, act: &GroundAgentAction) -> Result<Program> {
        let clause = self.action_clause(act.name, act.args.len())?;
        let mut body = clause.agent.clone();
        for (param, arg) in clause.params.iter().zip(&act.args) {
            body = body.subst(*param, &crate::domain::Value::Obj(*arg));
        }
        Ok(body.canonicalize())
    }

    /// The low-level system program for one ground high-level action with
    /// its reaction fixed.
    pub fn system_program(&self, act: &GroundSystemAction) -> Result<Program> {
        let clause = self.action_clause(act.name, act.args.len())?;
        let mut body = clause.system.clone();
        for (param, arg) in clause.params.iter().zip(&act.args) {
            body = body.subst(*param, &crate::domain::Value::Obj(*arg));
        }
        body = body.subst(clause.system_var, &act.reaction);
        Ok(body.canonicalize())
    }

    /// The low-level formula standing for one high-level atom, with the
    /// given terms in place of the clause parameters.
    pub fn fluent_formula(&self, fluent: Sym, args: &[Term]) -> Result<Formula> {
        let clause = self.fluents.get(&fluent).ok_or_else(|| {
            Error::spec(format!("no fluent clause for {}", self.names.resolve(fluent)))
        })?;
        if clause.params.len() != args.len() {
            return Err(Error::spec(format!(
                "fluent clause for {} expects {} arguments, got {}",
                self.names.resolve(fluent),
                clause.params.len(),
                args.len()
            )));
        }
        let mut body = clause.body.clone();
        for (param, arg) in clause.params.iter().zip(args) {
            body = body.subst_term(*param, arg);
        }
        Ok(body)
    }

    /// Translates a high-level state formula into a low-level one by
    /// replacing every atom with its clause body. Only state formulas
    /// translate; action equations and reaction constraints do not.
    pub fn map_formula(&self, formula: &Formula) -> Result<Formula> {
        match formula {
            Formula::True => Ok(Formula::True),
            Formula::False => Ok(Formula::False),
            Formula::Atom { fluent, args } => self.fluent_formula(*fluent, args),
            Formula::Eq(l, r) => Ok(Formula::Eq(l.clone(), r.clone())),
            Formula::Not(f) => Ok(Formula::Not(Box::new(self.map_formula(f)?))),
            Formula::And(fs) => Ok(Formula::And(
                fs.iter().map(|f| self.map_formula(f)).collect::<Result<_>>()?,
            )),
            Formula::Or(fs) => Ok(Formula::Or(
                fs.iter().map(|f| self.map_formula(f)).collect::<Result<_>>()?,
            )),
            Formula::Implies(l, r) => Ok(Formula::Implies(
                Box::new(self.map_formula(l)?),
                Box::new(self.map_formula(r)?),
            )),
            Formula::Iff(l, r) => Ok(Formula::Iff(
                Box::new(self.map_formula(l)?),
                Box::new(self.map_formula(r)?),
            )),
            Formula::Exists(var, dom, body) => match dom {
                VarDomain::Objects { .. } => Ok(Formula::Exists(
                    *var,
                    dom.clone(),
                    Box::new(self.map_formula(body)?),
                )),
                VarDomain::Reactions { .. } => Err(Error::Unsupported(
                    "reaction quantifier in a translated formula".to_string(),
                )),
            },
            Formula::Forall(var, dom, body) => match dom {
                VarDomain::Objects { .. } => Ok(Formula::Forall(
                    *var,
                    dom.clone(),
                    Box::new(self.map_formula(body)?),
                )),
                VarDomain::Reactions { .. } => Err(Error::Unsupported(
                    "reaction quantifier in a translated formula".to_string(),
                )),
            },
            Formula::ActEq { .. } | Formula::InReaction { .. } => Err(Error::Unsupported(
                "action equation in a translated formula".to_string(),
            )),
        }
    }

    /// Translates a high-level agent program by replacing every action with
    /// its agent view and every test formula by its image, keeping the
    /// control structure. Action arguments may be variables bound by an
    /// enclosing pick.
    pub fn map_agent_program(&self, program: &Program) -> Result<Program> {
        Ok(self.map_agent_inner(program)?.canonicalize())
    }

    fn map_agent_inner(&self, program: &Program) -> Result<Program> {
        match program {
            Program::Nil => Ok(Program::Nil),
            Program::Test(f) => Ok(Program::test(self.map_formula(f)?)),
            Program::AgtAct { name, args } => {
                let clause = self.action_clause(*name, args.len())?;
                let mut binders = BTreeSet::new();
                collect_binders(&clause.agent, &mut binders);
                let mut body = clause.agent.clone();
                for (param, arg) in clause.params.iter().zip(args) {
                    if let Term::Var(v) = arg {
                        if binders.contains(v) {
                            return Err(Error::Unsupported(format!(
                                "argument {} of {} is shadowed inside its action clause",
                                self.names.resolve(*v),
                                self.names.resolve(*name)
                            )));
                        }
                    }
                    body = body.subst_term(*param, arg);
                }
                Ok(body)
            }
            Program::SysAct { .. } => Err(Error::Unsupported(
                "system action in a high-level program translation".to_string(),
            )),
            Program::Seq(parts) => Ok(Program::Seq(
                parts.iter().map(|p| self.map_agent_inner(p)).collect::<Result<_>>()?,
            )),
            Program::Choice(parts) => Ok(Program::Choice(
                parts.iter().map(|p| self.map_agent_inner(p)).collect::<Result<_>>()?,
            )),
            Program::Pick { var, dom, body } => match dom {
                VarDomain::Objects { .. } => Ok(Program::Pick {
                    var: *var,
                    dom: dom.clone(),
                    body: Box::new(self.map_agent_inner(body)?),
                }),
                VarDomain::Reactions { .. } => Err(Error::Unsupported(
                    "reaction pick in a high-level program translation".to_string(),
                )),
            },
            Program::Star(body) => Ok(Program::Star(Box::new(self.map_agent_inner(body)?))),
            Program::Conc(..) => Err(Error::Unsupported(
                "concurrent composition in a high-level program translation".to_string(),
            )),
        }
    }
}

fn collect_binders(program: &Program, out: &mut BTreeSet<Sym>) {
    fn from_formula(formula: &Formula, out: &mut BTreeSet<Sym>) {
        match formula {
            Formula::Exists(v, _, body) | Formula::Forall(v, _, body) => {
                out.insert(*v);
                from_formula(body, out);
            }
            Formula::Not(f) => from_formula(f, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| from_formula(f, out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                from_formula(a, out);
                from_formula(b, out);
            }
            _ => {}
        }
    }
    match program {
        Program::Nil | Program::AgtAct { .. } | Program::SysAct { .. } => {}
        Program::Test(f) => from_formula(f, out),
        Program::Seq(parts) | Program::Choice(parts) => {
            parts.iter().for_each(|p| collect_binders(p, out));
        }
        Program::Pick { var, body, .. } => {
            out.insert(*var);
            collect_binders(body, out);
        }
        Program::Star(body) => collect_binders(body, out),
        Program::Conc(a, b) => {
            collect_binders(a, out);
            collect_binders(b, out);
        }
    }
}

/// Execution requirement verified at every refinement-reachable state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// Every run of an instantiated agent view terminates.
    InevitableTermination,
    /// The agent can force each executable agent view to completion.
    AgentExecutable,
    /// The environment can force each executable system view to completion.
    EnvironmentExecutable,
}

impl ConstraintKind {
    pub fn key(self) -> &'static str {
        match self {
            ConstraintKind::InevitableTermination => "inev_term",
            ConstraintKind::AgentExecutable => "agt_exec",
            ConstraintKind::EnvironmentExecutable => "env_exec",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
}

/// Counterexample to a failed mapping check.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    /// Atoms true at the state where the check failed.
    pub state: Vec<String>,
    /// Action instance under scrutiny; empty for state-only checks.
    pub action: String,
    pub detail: String,
    #[serde(skip)]
    pub at: State,
    #[serde(skip)]
    pub end_state: Option<State>,
}

/// Outcome of a single mapping check.
#[derive(Debug, Clone, Serialize)]
pub struct MappingCheck {
    pub check: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub states_checked: usize,
}

impl MappingCheck {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    fn pass(check: &str, states_checked: usize) -> MappingCheck {
        MappingCheck {
            check: check.to_string(),
            status: CheckStatus::Pass,
            witness: None,
            states_checked,
        }
    }

    fn fail(check: &str, states_checked: usize, witness: Witness) -> MappingCheck {
        MappingCheck {
            check: check.to_string(),
            status: CheckStatus::Fail,
            witness: Some(witness),
            states_checked,
        }
    }
}

/// Results of the soundness clauses, one entry per clause.
#[derive(Debug, Clone, Serialize)]
pub struct AbstractionReport {
    pub checks: Vec<MappingCheck>,
}

impl AbstractionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(MappingCheck::passed)
    }
}

/// Greatest relation between high-level and low-level states under which
/// mapped atoms agree and every step of one model is matched by the other.
pub struct BisimRelation {
    hl_store: StateStore,
    ll_store: StateStore,
    pairs: BTreeSet<(u32, u32)>,
    /// Whether the pair of initial states the relation was computed for
    /// survived the refinement.
    pub initial_included: bool,
}

impl BisimRelation {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, hl: &State, ll: &State) -> bool {
        match (self.hl_store.get_id(hl), self.ll_store.get_id(ll)) {
            (Some(h), Some(l)) => self.pairs.contains(&(h, l)),
            _ => false,
        }
    }

    /// High-level partners of a low-level state, in ascending state order.
    pub fn hl_partners(&self, ll: &State) -> Vec<&State> {
        let Some(l) = self.ll_store.get_id(ll) else {
            return Vec::new();
        };
        let mut partners: Vec<&State> = self
            .pairs
            .iter()
            .filter(|&&(_, pl)| pl == l)
            .map(|&(h, _)| self.hl_store.state(h))
            .collect();
        partners.sort();
        partners
    }
}

/// Shared exploration cache for one low-level theory. States are interned
/// once across all queries, successor computations are memoized per ground
/// action, and end-state sets are resolved per program configuration so that
/// repeated views over the same reachable region cost nothing extra.
struct Expander<'a> {
    theory: &'a GroundTheory,
    limits: &'a Limits,
    store: StateStore,
    succ: HashMap<(u32, GroundSystemAction), u32>,
    nodes: HashMap<(Program, u32), usize>,
    keys: Vec<(Program, u32)>,
    ends: Vec<Option<Arc<BTreeSet<u32>>>>,
}

impl<'a> Expander<'a> {
    fn new(theory: &'a GroundTheory, limits: &'a Limits) -> Expander<'a> {
        Expander {
            theory,
            limits,
            store: StateStore::new(),
            succ: HashMap::new(),
            nodes: HashMap::new(),
            keys: Vec::new(),
            ends: Vec::new(),
        }
    }

    fn intern(&mut self, state: State) -> Result<u32> {
        let id = self.store.insert(state);
        if self.store.len() > self.limits.max_configs {
            return Err(Error::capacity(format!(
                "refinement exploration exceeded {} distinct states",
                self.limits.max_configs
            )));
        }
        Ok(id)
    }

    fn node(&mut self, program: Program, sid: u32) -> Result<usize> {
        let key = (program, sid);
        if let Some(&id) = self.nodes.get(&key) {
            return Ok(id);
        }
        if self.keys.len() >= self.limits.max_configs {
            return Err(Error::capacity(format!(
                "refinement exploration exceeded {} program configurations",
                self.limits.max_configs
            )));
        }
        let id = self.keys.len();
        self.keys.push(key.clone());
        self.nodes.insert(key, id);
        self.ends.push(None);
        Ok(id)
    }

    fn successor(&mut self, sid: u32, act: &GroundSystemAction) -> Result<u32> {
        if let Some(&next) = self.succ.get(&(sid, act.clone())) {
            return Ok(next);
        }
        let next = self.theory.successor(self.store.state(sid), act)?;
        let id = self.intern(next)?;
        self.succ.insert((sid, act.clone()), id);
        Ok(id)
    }

    /// End states of every complete execution of `program` from the interned
    /// state `sid`. Resolves the whole subgraph of configurations reachable
    /// from the query before answering, so later queries that run into it
    /// get their sets for free.
    fn ends_at(&mut self, program: &Program, sid: u32) -> Result<Arc<BTreeSet<u32>>> {
        let root = self.node(program.clone(), sid)?;
        if let Some(done) = &self.ends[root] {
            return Ok(done.clone());
        }
        let mut order = vec![root];
        let mut pos = HashMap::from([(root, 0usize)]);
        let mut seeds: Vec<BTreeSet<u32>> = Vec::new();
        let mut kids: Vec<Vec<usize>> = Vec::new();
        let mut cursor = 0;
        while cursor < order.len() {
            let (prog, nsid) = self.keys[order[cursor]].clone();
            cursor += 1;
            let state = self.store.state(nsid).clone();
            let mut seed = BTreeSet::new();
            if prog.is_final(self.theory, &state)? {
                seed.insert(nsid);
            }
            let mut children = Vec::new();
            for (act, remainder) in prog.transitions(self.theory, &state)? {
                let next = self.successor(nsid, &act)?;
                if matches!(remainder, Program::Nil | Program::Test(_)) {
                    if remainder.is_final(self.theory, self.store.state(next))? {
                        seed.insert(next);
                    }
                    continue;
                }
                let child = self.node(remainder, next)?;
                if let Some(done) = &self.ends[child] {
                    seed.extend(done.iter().copied());
                } else if let Some(&at) = pos.get(&child) {
                    children.push(at);
                } else {
                    pos.insert(child, order.len());
                    children.push(order.len());
                    order.push(child);
                }
            }
            seeds.push(seed);
            kids.push(children);
        }
        loop {
            let mut changed = false;
            for i in (0..order.len()).rev() {
                let mut add = Vec::new();
                for &child in &kids[i] {
                    add.extend(seeds[child].iter().copied());
                }
                let before = seeds[i].len();
                seeds[i].extend(add);
                changed |= seeds[i].len() != before;
            }
            if !changed {
                break;
            }
        }
        let mut result = None;
        for (i, &node) in order.iter().enumerate() {
            let ends = Arc::new(std::mem::take(&mut seeds[i]));
            if i == 0 {
                result = Some(ends.clone());
            }
            self.ends[node] = Some(ends);
        }
        Ok(result.expect("query root is resolved first"))
    }
}

fn hl_instances(hl: &GroundTheory) -> Vec<GroundSystemAction> {
    hl.ground_agent_actions()
        .iter()
        .flat_map(|act| hl.system_instances(act))
        .collect()
}

/// Least set of low-level state ids containing `seeds` and closed under the
/// end states of every instantiated system view.
fn refinement_closure(
    m: &RefinementMapping,
    exp: &mut Expander<'_>,
    seeds: &[State],
) -> Result<BTreeSet<u32>> {
    let mut programs = Vec::new();
    for sys in hl_instances(&m.hl) {
        programs.push(m.system_program(&sys)?);
    }
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    for state in seeds {
        let id = exp.intern(state.clone())?;
        if seen.insert(id) {
            queue.push_back(id);
        }
    }
    while let Some(sid) = queue.pop_front() {
        for program in &programs {
            for &next in exp.ends_at(program, sid)?.iter() {
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(seen)
}

fn state_order(exp: &Expander<'_>, ids: &BTreeSet<u32>) -> Vec<u32> {
    let mut order: Vec<u32> = ids.iter().copied().collect();
    order.sort_by(|&a, &b| exp.store.state(a).cmp(exp.store.state(b)));
    order
}

impl RefinementMapping {
    /// Low-level states reachable from the initial models through complete
    /// executions of instantiated system views, in ascending state order.
    pub fn refinement_reachable(&self, limits: &Limits) -> Result<Vec<State>> {
        let mut exp = Expander::new(&self.ll, limits);
        let seeds = self.ll.initial_states(limits)?;
        let ids = refinement_closure(self, &mut exp, &seeds)?;
        let order = state_order(&exp, &ids);
        Ok(order
            .into_iter()
            .map(|id| exp.store.state(id).clone())
            .collect())
    }

    /// Checks that at every refinement-reachable state, each instantiated
    /// agent view reaches exactly the end states its system views reach
    /// across all reactions.
    pub fn check_proper_mapping(&self, limits: &Limits) -> Result<MappingCheck> {
        let mut exp = Expander::new(&self.ll, limits);
        let seeds = self.ll.initial_states(limits)?;
        let ids = refinement_closure(self, &mut exp, &seeds)?;
        let order = state_order(&exp, &ids);
        let mut groups = Vec::new();
        for agt in self.hl.ground_agent_actions() {
            let agent = self.agent_program(&agt)?;
            let mut systems = Vec::new();
            for sys in self.hl.system_instances(&agt) {
                systems.push(self.system_program(&sys)?);
            }
            groups.push((agt, agent, systems));
        }
        for (i, &sid) in order.iter().enumerate() {
            for (agt, agent, systems) in &groups {
                let agent_ends = exp.ends_at(agent, sid)?;
                let mut reaction_ends = BTreeSet::new();
                for system in systems {
                    reaction_ends.extend(exp.ends_at(system, sid)?.iter().copied());
                }
                if *agent_ends == reaction_ends {
                    continue;
                }
                let mut best: Option<(State, bool)> = None;
                for (side, agent_side) in [
                    (agent_ends.difference(&reaction_ends), true),
                    (reaction_ends.difference(&agent_ends), false),
                ] {
                    for &end in side {
                        let state = exp.store.state(end).clone();
                        if best.as_ref().is_none_or(|(b, _)| state < *b) {
                            best = Some((state, agent_side));
                        }
                    }
                }
                let (end, agent_side) = best.expect("unequal sets have a difference");
                let action = self.hl.render_agent_action(agt);
                let rendered = self.ll.render_state(&end).join(", ");
                let detail = if agent_side {
                    format!(
                        "end state {{{rendered}}} is reachable under the agent view of {action} \
                         but under no reaction"
                    )
                } else {
                    format!(
                        "end state {{{rendered}}} is reachable under some reaction of {action} \
                         but not under the agent view"
                    )
                };
                let at = exp.store.state(sid).clone();
                return Ok(MappingCheck::fail(
                    "proper",
                    i + 1,
                    Witness {
                        state: self.ll.render_state(&at),
                        action,
                        detail,
                        at,
                        end_state: Some(end),
                    },
                ));
            }
        }
        Ok(MappingCheck::pass("proper", order.len()))
    }

    /// Checks one execution requirement at every refinement-reachable state,
    /// for every instantiated action view that can complete there.
    pub fn check_constraint(&self, kind: ConstraintKind, limits: &Limits) -> Result<MappingCheck> {
        let mut exp = Expander::new(&self.ll, limits);
        let seeds = self.ll.initial_states(limits)?;
        let ids = refinement_closure(self, &mut exp, &seeds)?;
        let order = state_order(&exp, &ids);
        let mut groups = Vec::new();
        for agt in self.hl.ground_agent_actions() {
            let agent = self.agent_program(&agt)?;
            let mut systems = Vec::new();
            for sys in self.hl.system_instances(&agt) {
                let program = self.system_program(&sys)?;
                systems.push((sys, program));
            }
            groups.push((agt, agent, systems));
        }
        for (i, &sid) in order.iter().enumerate() {
            let state = exp.store.state(sid).clone();
            for (agt, agent, systems) in &groups {
                if kind == ConstraintKind::EnvironmentExecutable {
                    for (sys, system) in systems {
                        if exp.ends_at(system, sid)?.is_empty() {
                            continue;
                        }
                        let game = games::solve_env_game(
                            &self.ll,
                            system,
                            std::slice::from_ref(&state),
                            limits,
                        )?;
                        if !game.won {
                            return Ok(MappingCheck::fail(
                                kind.key(),
                                i + 1,
                                Witness {
                                    state: self.ll.render_state(&state),
                                    action: self.hl.render_system_action(sys),
                                    detail: "the environment cannot force the system view to \
                                             completion"
                                        .to_string(),
                                    at: state,
                                    end_state: None,
                                },
                            ));
                        }
                    }
                    continue;
                }
                if exp.ends_at(agent, sid)?.is_empty() {
                    continue;
                }
                let initial = std::slice::from_ref(&state);
                let (ok, detail) = if kind == ConstraintKind::InevitableTermination {
                    (
                        games::inevitably_terminates(&self.ll, agent, initial, limits)?,
                        "the agent view admits a run that gets stuck or loops forever",
                    )
                } else {
                    (
                        games::solve_program_game(&self.ll, agent, initial, limits)?.won,
                        "the agent cannot force the agent view to completion",
                    )
                };
                if !ok {
                    return Ok(MappingCheck::fail(
                        kind.key(),
                        i + 1,
                        Witness {
                            state: self.ll.render_state(&state),
                            action: self.hl.render_agent_action(agt),
                            detail: detail.to_string(),
                            at: state,
                            end_state: None,
                        },
                    ));
                }
            }
        }
        Ok(MappingCheck::pass(kind.key(), order.len()))
    }

    /// Computes the coarsest relation over the reachable states of the two
    /// models under which mapped atoms agree, every possible high-level step
    /// is matched by a complete low-level execution of its system view, and
    /// every such execution lands on a partner of the high-level successor.
    pub fn compute_m_bisimulation(
        &self,
        hl_init: &State,
        ll_init: &State,
        limits: &Limits,
    ) -> Result<BisimRelation> {
        let hl = &self.hl;
        let instances = hl_instances(hl);

        let mut hl_store = StateStore::new();
        hl_store.insert(hl_init.clone());
        let mut hl_rows: Vec<Vec<Option<u32>>> = Vec::new();
        while hl_rows.len() < hl_store.len() {
            let state = hl_store.state(hl_rows.len() as u32).clone();
            let mut row = Vec::with_capacity(instances.len());
            for sys in &instances {
                if hl.poss(&state, sys)? {
                    let id = hl_store.insert(hl.successor(&state, sys)?);
                    if hl_store.len() > limits.max_configs {
                        return Err(Error::capacity(format!(
                            "high-level exploration exceeded {} states",
                            limits.max_configs
                        )));
                    }
                    row.push(Some(id));
                } else {
                    row.push(None);
                }
            }
            hl_rows.push(row);
        }

        let mut exp = Expander::new(&self.ll, limits);
        let ll_ids = refinement_closure(self, &mut exp, std::slice::from_ref(ll_init))?;
        let ll_list: Vec<u32> = ll_ids.iter().copied().collect();
        let ll_pos: HashMap<u32, usize> = ll_list
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect();
        let mut programs = Vec::new();
        for sys in &instances {
            programs.push(self.system_program(sys)?);
        }
        let mut ll_rows: Vec<Vec<Arc<BTreeSet<u32>>>> = Vec::with_capacity(ll_list.len());
        for &lid in &ll_list {
            let mut row = Vec::with_capacity(programs.len());
            for program in &programs {
                row.push(exp.ends_at(program, lid)?);
            }
            ll_rows.push(row);
        }

        let mapped = self.mapped_atoms()?;
        let mut related = vec![vec![false; ll_list.len()]; hl_rows.len()];
        for (h, row) in related.iter_mut().enumerate() {
            let hs = hl_store.state(h as u32);
            for (li, &lid) in ll_list.iter().enumerate() {
                row[li] = self.isomorphic(hs, exp.store.state(lid), &mapped)?;
            }
        }
        loop {
            let mut changed = false;
            for h in 0..hl_rows.len() {
                for li in 0..ll_list.len() {
                    if !related[h][li] {
                        continue;
                    }
                    let mut ok = true;
                    for (k, hl_next) in hl_rows[h].iter().enumerate() {
                        let ends = &ll_rows[li][k];
                        match hl_next {
                            None if ends.is_empty() => {}
                            None => ok = false,
                            Some(h2) => {
                                ok = !ends.is_empty()
                                    && ends
                                        .iter()
                                        .all(|l2| related[*h2 as usize][ll_pos[l2]]);
                            }
                        }
                        if !ok {
                            break;
                        }
                    }
                    if !ok {
                        related[h][li] = false;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let mut pairs = BTreeSet::new();
        for (h, row) in related.iter().enumerate() {
            for (li, &lid) in ll_list.iter().enumerate() {
                if row[li] {
                    pairs.insert((h as u32, lid));
                }
            }
        }
        let l0 = exp.intern(ll_init.clone())?;
        let initial_included = pairs.contains(&(0, l0));
        Ok(BisimRelation {
            hl_store,
            ll_store: exp.store,
            pairs,
            initial_included,
        })
    }

    /// Verifies the three soundness clauses: mapped initial constraints hold
    /// in every low-level initial model, mapped preconditions coincide with
    /// executability of the system views at every refinement-reachable
    /// state, and mapped updates coincide with the mapped fluents after
    /// every complete execution.
    pub fn verify_sound_abstraction(&self, limits: &Limits) -> Result<AbstractionReport> {
        let hl = &self.hl;
        let ll = &self.ll;
        let mapped = self.mapped_atoms()?;
        let ll_models = ll.initial_states(limits)?;

        let mut init_check = MappingCheck::pass("sound_initial", ll_models.len());
        'init: for model in &ll_models {
            for atom in 0..hl.atoms.len() {
                if hl.open_atoms.binary_search(&atom).is_ok() {
                    continue;
                }
                let expected = hl.init_base.get(atom);
                let actual = ll.eval(model, &mut Env::plain(), &mapped[atom])?;
                if expected != actual {
                    let label = self.render_hl_atom(atom);
                    init_check = MappingCheck::fail(
                        "sound_initial",
                        ll_models.len(),
                        Witness {
                            state: ll.render_state(model),
                            action: label.clone(),
                            detail: format!(
                                "the initial theory fixes {label} to {expected} but its image \
                                 evaluates to {actual}"
                            ),
                            at: model.clone(),
                            end_state: None,
                        },
                    );
                    break 'init;
                }
            }
        }

        let instances = hl_instances(hl);
        let mut programs = Vec::with_capacity(instances.len());
        let mut preconditions = Vec::with_capacity(instances.len());
        let mut effects = Vec::with_capacity(instances.len());
        for sys in &instances {
            programs.push(self.system_program(sys)?);
            let schema = &hl.actions[sys.action];
            let mut poss = schema.poss.clone();
            for (&(param, _), &arg) in schema.params.iter().zip(&sys.args) {
                poss = poss.subst(param, &Value::Obj(arg));
            }
            poss = poss.subst(schema.reaction_var, &sys.reaction);
            preconditions.push(self.map_formula(&self.state_residue(&poss, None)?)?);

            let mut row = Vec::with_capacity(hl.atoms.len());
            for atom in 0..hl.atoms.len() {
                let (fluent, args) = hl.atoms.atom(&hl.sorts, atom);
                let body = match &hl.ssas[fluent] {
                    Some(ssa) => {
                        let mut body = ssa.body.clone();
                        for (&param, &arg) in ssa.params.iter().zip(&args) {
                            body = body.subst(param, &Value::Obj(arg));
                        }
                        body
                    }
                    None => Formula::Atom {
                        fluent: hl.fluents[fluent].name,
                        args: args.iter().map(|&a| Term::Obj(a)).collect(),
                    },
                };
                row.push(self.map_formula(&self.state_residue(&body, Some(sys))?)?);
            }
            effects.push(row);
        }

        let mut exp = Expander::new(ll, limits);
        let ids = refinement_closure(self, &mut exp, &ll_models)?;
        let order = state_order(&exp, &ids);

        let mut poss_check = MappingCheck::pass("sound_precondition", order.len());
        'poss: for (i, &sid) in order.iter().enumerate() {
            let state = exp.store.state(sid).clone();
            for (k, sys) in instances.iter().enumerate() {
                let image = ll.eval(&state, &mut Env::plain(), &preconditions[k])?;
                let runs = !exp.ends_at(&programs[k], sid)?.is_empty();
                if image != runs {
                    let detail = if image {
                        "the mapped precondition holds but the system view has no complete \
                         execution"
                    } else {
                        "the system view has a complete execution but the mapped precondition \
                         fails"
                    };
                    poss_check = MappingCheck::fail(
                        "sound_precondition",
                        i + 1,
                        Witness {
                            state: ll.render_state(&state),
                            action: self.hl.render_system_action(sys),
                            detail: detail.to_string(),
                            at: state,
                            end_state: None,
                        },
                    );
                    break 'poss;
                }
            }
        }

        let mut effect_check = MappingCheck::pass("sound_effect", order.len());
        'effect: for (i, &sid) in order.iter().enumerate() {
            let state = exp.store.state(sid).clone();
            for (k, sys) in instances.iter().enumerate() {
                let ends = exp.ends_at(&programs[k], sid)?;
                for &eid in ends.iter() {
                    let end = exp.store.state(eid).clone();
                    for atom in 0..hl.atoms.len() {
                        let before = ll.eval(&state, &mut Env::plain(), &effects[k][atom])?;
                        let after = ll.eval(&end, &mut Env::plain(), &mapped[atom])?;
                        if before != after {
                            let label = self.render_hl_atom(atom);
                            effect_check = MappingCheck::fail(
                                "sound_effect",
                                i + 1,
                                Witness {
                                    state: ll.render_state(&state),
                                    action: self.hl.render_system_action(sys),
                                    detail: format!(
                                        "executing the system view should make {label} {before} \
                                         but its image evaluates to {after} at an end state"
                                    ),
                                    at: state,
                                    end_state: Some(end),
                                },
                            );
                            break 'effect;
                        }
                    }
                }
            }
        }

        Ok(AbstractionReport {
            checks: vec![init_check, poss_check, effect_check],
        })
    }

    /// Checks that every high-level initial model has a low-level initial
    /// model that agrees with it on all mapped fluents.
    pub fn verify_complete_abstraction(&self, limits: &Limits) -> Result<MappingCheck> {
        let mapped = self.mapped_atoms()?;
        let hl_models = self.hl.initial_states(limits)?;
        let ll_models = self.ll.initial_states(limits)?;
        for model in &hl_models {
            let mut found = false;
            for low in &ll_models {
                if self.isomorphic(model, low, &mapped)? {
                    found = true;
                    break;
                }
            }
            if !found {
                return Ok(MappingCheck::fail(
                    "complete",
                    hl_models.len(),
                    Witness {
                        state: self.hl.render_state(model),
                        action: String::new(),
                        detail: "no low-level initial model agrees with this high-level initial \
                                 model on the mapped fluents"
                            .to_string(),
                        at: model.clone(),
                        end_state: None,
                    },
                ));
            }
        }
        Ok(MappingCheck::pass("complete", hl_models.len()))
    }

    /// Image of every ground high-level atom under the fluent mapping,
    /// indexed by atom id.
    fn mapped_atoms(&self) -> Result<Vec<Formula>> {
        let hl = &self.hl;
        let mut out = Vec::with_capacity(hl.atoms.len());
        for atom in 0..hl.atoms.len() {
            let (fluent, args) = hl.atoms.atom(&hl.sorts, atom);
            let terms: Vec<Term> = args.iter().map(|&a| Term::Obj(a)).collect();
            out.push(self.fluent_formula(hl.fluents[fluent].name, &terms)?);
        }
        Ok(out)
    }

    fn isomorphic(&self, hl_state: &State, ll_state: &State, mapped: &[Formula]) -> Result<bool> {
        for (atom, formula) in mapped.iter().enumerate() {
            if hl_state.get(atom) != self.ll.eval(ll_state, &mut Env::plain(), formula)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn render_hl_atom(&self, atom: usize) -> String {
        let (fluent, args) = self.hl.atoms.atom(&self.hl.sorts, atom);
        let name = self.names.resolve(self.hl.fluents[fluent].name);
        if args.is_empty() {
            name.to_string()
        } else {
            let parts: Vec<&str> = args.iter().map(|&a| self.names.resolve(a)).collect();
            format!("{}({})", name, parts.join(", "))
        }
    }

    /// Evaluates away the state-independent parts of a ground high-level
    /// formula: quantifiers are expanded over their finite domains, and
    /// equations, reaction membership tests, and action equations against
    /// `act` fold to constants. The result mentions fluent atoms only, which
    /// makes it a valid input for the fluent mapping.
    fn state_residue(&self, formula: &Formula, act: Option<&GroundSystemAction>) -> Result<Formula> {
        let constant = |b: bool| if b { Formula::True } else { Formula::False };
        Ok(match formula {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom { args, .. } => {
                for arg in args {
                    self.term_value(arg)?;
                }
                formula.clone()
            }
            Formula::Eq(a, b) => constant(self.term_value(a)? == self.term_value(b)?),
            Formula::InReaction { atom, set } => {
                let Value::Set(members) = self.term_value(set)? else {
                    return Err(Error::execution(
                        "membership test against a token reaction",
                    ));
                };
                let mut args = Vec::with_capacity(atom.args.len());
                for arg in &atom.args {
                    match self.term_value(arg)? {
                        Value::Obj(sym) => args.push(sym),
                        Value::Set(_) => {
                            return Err(Error::execution(
                                "set value used as an update atom argument",
                            ));
                        }
                    }
                }
                constant(members.contains(&UpdateAtom {
                    family: atom.family,
                    args,
                }))
            }
            Formula::ActEq {
                action,
                args,
                reaction,
            } => {
                let Some(sys) = act else {
                    return Err(Error::execution(
                        "action equation outside the scope of a ground action",
                    ));
                };
                if sys.name != *action || args.len() != sys.args.len() {
                    return Ok(Formula::False);
                }
                for (term, &arg) in args.iter().zip(&sys.args) {
                    if self.term_value(term)? != Value::Obj(arg) {
                        return Ok(Formula::False);
                    }
                }
                constant(self.term_value(reaction)? == sys.reaction)
            }
            Formula::Not(f) => match self.state_residue(f, act)? {
                Formula::True => Formula::False,
                Formula::False => Formula::True,
                other => Formula::not(other),
            },
            Formula::And(fs) => {
                let mut parts = Vec::new();
                for f in fs {
                    match self.state_residue(f, act)? {
                        Formula::True => {}
                        Formula::False => return Ok(Formula::False),
                        other => parts.push(other),
                    }
                }
                Formula::and(parts)
            }
            Formula::Or(fs) => {
                let mut parts = Vec::new();
                for f in fs {
                    match self.state_residue(f, act)? {
                        Formula::False => {}
                        Formula::True => return Ok(Formula::True),
                        other => parts.push(other),
                    }
                }
                Formula::or(parts)
            }
            Formula::Implies(a, b) => {
                match (self.state_residue(a, act)?, self.state_residue(b, act)?) {
                    (Formula::False, _) | (_, Formula::True) => Formula::True,
                    (Formula::True, rhs) => rhs,
                    (lhs, Formula::False) => Formula::not(lhs),
                    (lhs, rhs) => Formula::Implies(Box::new(lhs), Box::new(rhs)),
                }
            }
            Formula::Iff(a, b) => {
                match (self.state_residue(a, act)?, self.state_residue(b, act)?) {
                    (Formula::True, rhs) => rhs,
                    (lhs, Formula::True) => lhs,
                    (Formula::False, rhs) => Formula::not(rhs),
                    (lhs, Formula::False) => Formula::not(lhs),
                    (lhs, rhs) => Formula::Iff(Box::new(lhs), Box::new(rhs)),
                }
            }
            Formula::Exists(var, dom, body) => {
                let mut parts = Vec::new();
                for value in dom.enumerate() {
                    match self.state_residue(&body.subst(*var, &value), act)? {
                        Formula::False => {}
                        Formula::True => return Ok(Formula::True),
                        other => parts.push(other),
                    }
                }
                Formula::or(parts)
            }
            Formula::Forall(var, dom, body) => {
                let mut parts = Vec::new();
                for value in dom.enumerate() {
                    match self.state_residue(&body.subst(*var, &value), act)? {
                        Formula::True => {}
                        Formula::False => return Ok(Formula::False),
                        other => parts.push(other),
                    }
                }
                Formula::and(parts)
            }
        })
    }

    fn term_value(&self, term: &Term) -> Result<Value> {
        match term {
            Term::Obj(sym) => Ok(Value::Obj(*sym)),
            Term::SetLit(set) => Ok(Value::Set(set.clone())),
            Term::Var(v) => Err(Error::execution(format!(
                "unbound variable {} in a ground formula",
                self.names.resolve(*v)
            ))),
        }
    }
}
