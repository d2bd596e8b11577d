//! Program constructs over a ground theory: sequence, choice, finite
//! iteration, interleaving, bound picks, and synchronous tests, with the
//! single-step transition semantics the games and the monitor are built on.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use crate::domain::{
    Env, Formula, GroundAgentAction, GroundSystemAction, GroundTheory, State, StateStore, Term,
    Trace, Value, VarDomain,
};
use crate::error::{Error, Result};
use crate::intern::Sym;
use crate::limits::Limits;

/// A program whose actions may still contain variables bound by an enclosing
/// pick. Agent actions leave the reaction to the environment; system actions
/// name it. Test formulas are shared so remainders clone in constant time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Program {
    Nil,
    Test(Arc<Formula>),
    AgtAct { name: Sym, args: Vec<Term> },
    SysAct { name: Sym, args: Vec<Term>, reaction: Term },
    Seq(Vec<Program>),
    Choice(Vec<Program>),
    Pick { var: Sym, dom: VarDomain, body: Box<Program> },
    Star(Box<Program>),
    Conc(Box<Program>, Box<Program>),
}

impl Program {
    pub fn test(formula: Formula) -> Program {
        Program::Test(Arc::new(formula))
    }

    pub fn seq(parts: Vec<Program>) -> Program {
        match parts.len() {
            0 => Program::Nil,
            1 => parts.into_iter().next().unwrap(),
            _ => Program::Seq(parts),
        }
    }

    pub fn choice(parts: Vec<Program>) -> Program {
        match parts.len() {
            1 => parts.into_iter().next().unwrap(),
            _ => Program::Choice(parts),
        }
    }

    /// Substitutes `value` for free occurrences of `var`, respecting pick and
    /// quantifier shadowing.
    pub fn subst(&self, var: Sym, value: &Value) -> Program {
        self.subst_term(var, &Term::from_value(value))
    }

    /// Like [`Program::subst`], but the replacement may itself be a variable.
    pub fn subst_term(&self, var: Sym, term: &Term) -> Program {
        let sub = |t: &Term| -> Term {
            match t {
                Term::Var(v) if *v == var => term.clone(),
                other => other.clone(),
            }
        };
        match self {
            Program::Nil => Program::Nil,
            Program::Test(f) => {
                if f.mentions_var(var) {
                    Program::test(f.subst_term(var, term))
                } else {
                    Program::Test(Arc::clone(f))
                }
            }
            Program::AgtAct { name, args } => Program::AgtAct {
                name: *name,
                args: args.iter().map(sub).collect(),
            },
            Program::SysAct { name, args, reaction } => Program::SysAct {
                name: *name,
                args: args.iter().map(sub).collect(),
                reaction: sub(reaction),
            },
            Program::Seq(parts) => {
                Program::Seq(parts.iter().map(|p| p.subst_term(var, term)).collect())
            }
            Program::Choice(parts) => {
                Program::Choice(parts.iter().map(|p| p.subst_term(var, term)).collect())
            }
            Program::Pick { var: v, dom, body } if *v != var => Program::Pick {
                var: *v,
                dom: dom.clone(),
                body: Box::new(body.subst_term(var, term)),
            },
            shadowed @ Program::Pick { .. } => shadowed.clone(),
            Program::Star(body) => Program::Star(Box::new(body.subst_term(var, term))),
            Program::Conc(a, b) => Program::Conc(
                Box::new(a.subst_term(var, term)),
                Box::new(b.subst_term(var, term)),
            ),
        }
    }

    /// Whether `var` occurs free in the program, pick shadowing respected.
    pub fn mentions_var(&self, var: Sym) -> bool {
        let term_hits = |t: &Term| matches!(t, Term::Var(v) if *v == var);
        match self {
            Program::Nil => false,
            Program::Test(f) => f.mentions_var(var),
            Program::AgtAct { args, .. } => args.iter().any(term_hits),
            Program::SysAct { args, reaction, .. } => {
                args.iter().any(term_hits) || term_hits(reaction)
            }
            Program::Seq(parts) | Program::Choice(parts) => {
                parts.iter().any(|p| p.mentions_var(var))
            }
            Program::Pick { var: v, body, .. } => *v != var && body.mentions_var(var),
            Program::Star(body) => body.mentions_var(var),
            Program::Conc(a, b) => a.mentions_var(var) || b.mentions_var(var),
        }
    }

    /// Structural normal form: sequences and choices are flattened, identity
    /// elements removed, choice branches sorted and deduplicated, picks
    /// narrowed to the prefix that mentions their variable. The result has
    /// the same final configurations and transitions, and canonicalizing
    /// twice changes nothing.
    pub fn canonicalize(&self) -> Program {
        match self {
            Program::Test(f) if **f == Formula::True => Program::Nil,
            Program::Nil | Program::Test(_) | Program::AgtAct { .. } | Program::SysAct { .. } => {
                self.clone()
            }
            Program::Seq(parts) => {
                let mut flat = Vec::new();
                for part in parts {
                    match part.canonicalize() {
                        Program::Nil => {}
                        Program::Seq(inner) => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                Program::seq(flat)
            }
            Program::Choice(parts) => {
                let mut flat = BTreeSet::new();
                for part in parts {
                    match part.canonicalize() {
                        Program::Choice(inner) => flat.extend(inner),
                        other => {
                            flat.insert(other);
                        }
                    }
                }
                if flat.is_empty() {
                    Program::test(Formula::False)
                } else {
                    Program::choice(flat.into_iter().collect())
                }
            }
            Program::Pick { var, dom, body } => {
                let body = body.canonicalize();
                if !dom.is_empty() && !body.mentions_var(*var) {
                    return body;
                }
                if let Program::Seq(parts) = body {
                    let split =
                        parts.iter().rposition(|p| p.mentions_var(*var)).map_or(0, |i| i + 1);
                    if split < parts.len() {
                        let mut out = Vec::with_capacity(parts.len() - split + 1);
                        let prefix = Program::seq(parts[..split].to_vec());
                        out.push(Program::Pick {
                            var: *var,
                            dom: dom.clone(),
                            body: Box::new(prefix),
                        });
                        out.extend_from_slice(&parts[split..]);
                        Program::Seq(out)
                    } else {
                        Program::Pick {
                            var: *var,
                            dom: dom.clone(),
                            body: Box::new(Program::Seq(parts)),
                        }
                    }
                } else {
                    Program::Pick { var: *var, dom: dom.clone(), body: Box::new(body) }
                }
            }
            Program::Star(body) => match body.canonicalize() {
                Program::Nil => Program::Nil,
                star @ Program::Star(_) => star,
                other => Program::Star(Box::new(other)),
            },
            Program::Conc(a, b) => match (a.canonicalize(), b.canonicalize()) {
                (Program::Nil, other) | (other, Program::Nil) => other,
                (left, right) => Program::Conc(Box::new(left), Box::new(right)),
            },
        }
    }

    /// Whether the program may legally terminate in this state.
    pub fn is_final(&self, theory: &GroundTheory, state: &State) -> Result<bool> {
        let mut env = Env::plain();
        self.final_in(theory, state, &mut env)
    }

    /// Finality with pick variables bound in the environment instead of
    /// substituted, so large domains cost one binding per value.
    fn final_in(&self, theory: &GroundTheory, state: &State, env: &mut Env) -> Result<bool> {
        match self {
            Program::Nil | Program::Star(_) => Ok(true),
            Program::Test(f) => theory.eval(state, env, f),
            Program::AgtAct { .. } | Program::SysAct { .. } => Ok(false),
            Program::Seq(parts) => {
                for part in parts {
                    if !part.final_in(theory, state, env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Program::Choice(parts) => {
                for part in parts {
                    if part.final_in(theory, state, env)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Program::Pick { var, dom, body } => {
                for value in dom.enumerate().iter() {
                    env.bind(*var, value.clone());
                    let fin = body.final_in(theory, state, env);
                    env.pop();
                    if fin? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Program::Conc(a, b) => {
                Ok(a.final_in(theory, state, env)? && b.final_in(theory, state, env)?)
            }
        }
    }

    /// Single-step transitions: every possible next system action together
    /// with the remaining program, tests gating without producing actions.
    /// Remainders are canonicalized so equal continuations collapse.
    pub fn transitions(
        &self,
        theory: &GroundTheory,
        state: &State,
    ) -> Result<Vec<(GroundSystemAction, Program)>> {
        let mut out = BTreeSet::new();
        let mut env = Env::plain();
        self.collect_transitions(theory, state, &mut env, &mut out)?;
        Ok(out.into_iter().collect())
    }

    /// Collects steps with pick variables carried in the environment; a
    /// remainder is only materialized, by substituting the picked values it
    /// mentions, once its first action turns out to be legal.
    fn collect_transitions(
        &self,
        theory: &GroundTheory,
        state: &State,
        env: &mut Env,
        out: &mut BTreeSet<(GroundSystemAction, Program)>,
    ) -> Result<()> {
        match self {
            Program::Nil | Program::Test(_) => Ok(()),
            Program::AgtAct { name, args } => {
                let act = theory.ground_agent_action(*name, resolve_args(theory, env, args)?)?;
                for reaction in theory.legal_reactions(state, &act)?.iter() {
                    let step = GroundSystemAction {
                        action: act.action,
                        name: act.name,
                        args: act.args.clone(),
                        reaction: reaction.clone(),
                    };
                    out.insert((step, Program::Nil));
                }
                Ok(())
            }
            Program::SysAct { name, args, reaction } => {
                let reaction = match reaction {
                    Term::Var(v) => match env.lookup(*v) {
                        Some(value) => value.clone(),
                        None => {
                            return Err(Error::execution(format!(
                                "program action has unbound reaction variable {}",
                                theory.names.resolve(*v)
                            )))
                        }
                    },
                    Term::Obj(sym) => Value::Obj(*sym),
                    Term::SetLit(set) => Value::Set(set.clone()),
                };
                let act =
                    theory.ground_system_action(*name, resolve_args(theory, env, args)?, reaction)?;
                if theory.poss(state, &act)? {
                    out.insert((act, Program::Nil));
                }
                Ok(())
            }
            Program::Seq(parts) => {
                let Some((head, rest)) = parts.split_first() else { return Ok(()) };
                let mut head_steps = BTreeSet::new();
                head.collect_transitions(theory, state, env, &mut head_steps)?;
                for (act, remainder) in head_steps {
                    let mut continued = vec![remainder];
                    continued.extend(rest.iter().cloned());
                    out.insert((act, Program::Seq(continued).canonicalize()));
                }
                if head.final_in(theory, state, env)? {
                    Program::Seq(rest.to_vec()).collect_transitions(theory, state, env, out)?;
                }
                Ok(())
            }
            Program::Choice(parts) => {
                for part in parts {
                    part.collect_transitions(theory, state, env, out)?;
                }
                Ok(())
            }
            Program::Pick { var, dom, body } => {
                let mut inner = BTreeSet::new();
                for value in dom.enumerate().iter() {
                    env.bind(*var, value.clone());
                    let collected = body.collect_transitions(theory, state, env, &mut inner);
                    env.pop();
                    collected?;
                    for (act, remainder) in std::mem::take(&mut inner) {
                        out.insert((act, remainder.subst(*var, value).canonicalize()));
                    }
                }
                Ok(())
            }
            Program::Star(body) => {
                let mut body_steps = BTreeSet::new();
                body.collect_transitions(theory, state, env, &mut body_steps)?;
                for (act, remainder) in body_steps {
                    let continued =
                        Program::Seq(vec![remainder, self.clone()]).canonicalize();
                    out.insert((act, continued));
                }
                Ok(())
            }
            Program::Conc(a, b) => {
                let mut left = BTreeSet::new();
                a.collect_transitions(theory, state, env, &mut left)?;
                for (act, remainder) in left {
                    let continued =
                        Program::Conc(Box::new(remainder), b.clone()).canonicalize();
                    out.insert((act, continued));
                }
                let mut right = BTreeSet::new();
                b.collect_transitions(theory, state, env, &mut right)?;
                for (act, remainder) in right {
                    let continued =
                        Program::Conc(a.clone(), Box::new(remainder)).canonicalize();
                    out.insert((act, continued));
                }
                Ok(())
            }
        }
    }

    /// Transitions grouped by the agent's choice of action instance.
    pub fn agent_choices(
        &self,
        theory: &GroundTheory,
        state: &State,
    ) -> Result<Vec<AgentChoice>> {
        let mut grouped: BTreeMap<GroundAgentAction, Vec<(GroundSystemAction, Program)>> =
            BTreeMap::new();
        for (act, remainder) in self.transitions(theory, state)? {
            grouped.entry(act.agent_part()).or_default().push((act, remainder));
        }
        Ok(grouped
            .into_iter()
            .map(|(action, outcomes)| AgentChoice { action, outcomes })
            .collect())
    }

    /// Renders the program in surface syntax.
    pub fn render(&self, names: &crate::intern::Names) -> String {
        fn term(t: &Term, names: &crate::intern::Names) -> String {
            match t {
                Term::Var(v) | Term::Obj(v) => names.resolve(*v).to_string(),
                Term::SetLit(set) => Value::Set(set.clone()).display(names),
            }
        }
        match self {
            Program::Nil => "nil".to_string(),
            Program::Test(f) => match f.as_ref() {
                Formula::True | Formula::False | Formula::Atom { .. } => {
                    format!("{}?", f.render(names))
                }
                other => format!("({})?", other.render(names)),
            },
            Program::AgtAct { name, args } => {
                let rendered: Vec<String> = args.iter().map(|t| term(t, names)).collect();
                format!("{}({})", names.resolve(*name), rendered.join(", "))
            }
            Program::SysAct { name, args, reaction } => {
                let mut rendered: Vec<String> = args.iter().map(|t| term(t, names)).collect();
                rendered.push(term(reaction, names));
                format!("{}({})", names.resolve(*name), rendered.join(", "))
            }
            Program::Seq(parts) => {
                let rendered: Vec<String> = parts
                    .iter()
                    .map(|p| match p {
                        Program::Choice(_) | Program::Conc(..) => {
                            format!("({})", p.render(names))
                        }
                        other => other.render(names),
                    })
                    .collect();
                rendered.join("; ")
            }
            Program::Choice(parts) => {
                let rendered: Vec<String> =
                    parts.iter().map(|p| p.render(names)).collect();
                rendered.join(" | ")
            }
            Program::Pick { var, dom, body } => format!(
                "pi {}: {} . {}",
                names.resolve(*var),
                dom.display(names),
                body.render(names)
            ),
            Program::Star(body) => match body.as_ref() {
                Program::Nil | Program::Test(_) | Program::AgtAct { .. }
                | Program::SysAct { .. } => format!("{}*", body.render(names)),
                other => format!("({})*", other.render(names)),
            },
            Program::Conc(a, b) => {
                format!("{} || {}", a.render(names), b.render(names))
            }
        }
    }
}

fn resolve_args(theory: &GroundTheory, env: &Env, args: &[Term]) -> Result<Vec<Sym>> {
    let mut out = Vec::with_capacity(args.len());
    for term in args {
        match term {
            Term::Obj(sym) => out.push(*sym),
            Term::Var(v) => match env.lookup(*v) {
                Some(Value::Obj(sym)) => out.push(*sym),
                Some(Value::Set(_)) => {
                    return Err(Error::execution(
                        "set value in action argument position".to_string(),
                    ))
                }
                None => {
                    return Err(Error::execution(format!(
                        "program action has unbound argument {}",
                        theory.names.resolve(*v)
                    )))
                }
            },
            Term::SetLit(_) => {
                return Err(Error::execution(
                    "set value in action argument position".to_string(),
                ))
            }
        }
    }
    Ok(out)
}

/// One agent decision at a configuration: the action instance and the
/// outcome per legal reaction.
#[derive(Debug, Clone)]
pub struct AgentChoice {
    pub action: GroundAgentAction,
    pub outcomes: Vec<(GroundSystemAction, Program)>,
}

/// Explicit graph of reachable program configurations.
#[derive(Debug)]
pub struct ConfigGraph {
    pub store: StateStore,
    /// Configuration nodes, index order is discovery order.
    pub configs: Vec<(Program, u32)>,
    pub edges: Vec<Vec<(GroundSystemAction, usize)>>,
    pub finals: Vec<bool>,
    pub roots: Vec<usize>,
    index: HashMap<(Program, u32), usize>,
}

impl ConfigGraph {
    pub fn node(&self, program: &Program, state_id: u32) -> Option<usize> {
        self.index.get(&(program.clone(), state_id)).copied()
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }
}

/// Expands the full configuration graph from the given initial states,
/// stopping with a capacity error when the node bound is exceeded.
pub fn build_config_graph(
    theory: &GroundTheory,
    program: &Program,
    initial: &[State],
    limits: &Limits,
) -> Result<ConfigGraph> {
    let root = program.canonicalize();
    let mut store = StateStore::new();
    let mut configs: Vec<(Program, u32)> = Vec::new();
    let mut index: HashMap<(Program, u32), usize> = HashMap::new();
    let mut roots = Vec::new();
    let mut queue = VecDeque::new();
    for state in initial {
        let state_id = store.insert(state.clone());
        let key = (root.clone(), state_id);
        let node = match index.get(&key) {
            Some(&n) => n,
            None => {
                let n = configs.len();
                index.insert(key.clone(), n);
                configs.push(key);
                queue.push_back(n);
                n
            }
        };
        roots.push(node);
    }
    let mut edges: Vec<Vec<(GroundSystemAction, usize)>> = Vec::new();
    let mut finals: Vec<bool> = Vec::new();
    while let Some(node) = queue.pop_front() {
        let (program, state_id) = configs[node].clone();
        let state = store.state(state_id).clone();
        while finals.len() <= node {
            finals.push(false);
            edges.push(Vec::new());
        }
        finals[node] = program.is_final(theory, &state)?;
        let mut out = Vec::new();
        for (act, remainder) in program.transitions(theory, &state)? {
            let next_state = theory.successor(&state, &act)?;
            let next_id = store.insert(next_state);
            let key = (remainder, next_id);
            let next_node = match index.get(&key) {
                Some(&n) => n,
                None => {
                    if configs.len() >= limits.max_configs {
                        return Err(Error::capacity(format!(
                            "configuration graph exceeds {} nodes",
                            limits.max_configs
                        )));
                    }
                    let n = configs.len();
                    index.insert(key.clone(), n);
                    configs.push(key);
                    queue.push_back(n);
                    n
                }
            };
            out.push((act, next_node));
        }
        edges[node] = out;
    }
    Ok(ConfigGraph { store, configs, edges, finals, roots, index })
}

/// Where a violation of situation determinism was found.
#[derive(Debug, Clone)]
pub struct DeterminismViolation {
    pub action: String,
    pub remainders: Vec<String>,
}

/// Checks that every reachable configuration has at most one remainder per
/// system action.
pub fn check_situation_determined(
    theory: &GroundTheory,
    program: &Program,
    initial: &[State],
    limits: &Limits,
) -> Result<()> {
    let graph = build_config_graph(theory, program, initial, limits)?;
    check_graph_situation_determined(theory, &graph)
}

/// The same check on an already built configuration graph.
pub fn check_graph_situation_determined(theory: &GroundTheory, graph: &ConfigGraph) -> Result<()> {
    for node in 0..graph.len() {
        let mut per_action: BTreeMap<&GroundSystemAction, BTreeSet<usize>> = BTreeMap::new();
        for (act, next) in &graph.edges[node] {
            per_action.entry(act).or_default().insert(*next);
        }
        for (act, nexts) in per_action {
            if nexts.len() > 1 {
                let remainders: Vec<String> = nexts
                    .iter()
                    .map(|&n| graph.configs[n].0.render(&theory.names))
                    .collect();
                return Err(Error::NotSituationDetermined(format!(
                    "action {} leaves {} distinct remainders from {}: {}",
                    theory.render_system_action(act),
                    remainders.len(),
                    graph.configs[node].0.render(&theory.names),
                    remainders.join(" vs ")
                )));
            }
        }
    }
    Ok(())
}

/// End states of terminating executions from one state.
pub fn end_states(
    theory: &GroundTheory,
    program: &Program,
    state: &State,
    limits: &Limits,
) -> Result<Vec<State>> {
    let graph = build_config_graph(theory, program, std::slice::from_ref(state), limits)?;
    let mut out = BTreeSet::new();
    for node in 0..graph.len() {
        if graph.finals[node] {
            out.insert(graph.store.state(graph.configs[node].1).clone());
        }
    }
    Ok(out.into_iter().collect())
}

/// Every terminating run from one state, as a trace of system actions.
/// Requires the reachable configuration graph to be loop free.
pub fn terminating_runs(
    theory: &GroundTheory,
    program: &Program,
    state: &State,
    limits: &Limits,
) -> Result<Vec<Trace>> {
    let graph = build_config_graph(theory, program, std::slice::from_ref(state), limits)?;
    let mut runs = Vec::new();
    let mut prefix: Trace = Vec::new();
    let mut on_path = vec![false; graph.len()];
    fn walk(
        graph: &ConfigGraph,
        node: usize,
        prefix: &mut Trace,
        on_path: &mut Vec<bool>,
        runs: &mut Vec<Trace>,
    ) -> Result<()> {
        if on_path[node] {
            return Err(Error::Unsupported(
                "run enumeration over a program with looping executions".to_string(),
            ));
        }
        if graph.finals[node] {
            runs.push(prefix.clone());
        }
        on_path[node] = true;
        for (act, next) in &graph.edges[node] {
            prefix.push(act.clone());
            walk(graph, *next, prefix, on_path, runs)?;
            prefix.pop();
        }
        on_path[node] = false;
        Ok(())
    }
    walk(&graph, graph.roots[0], &mut prefix, &mut on_path, &mut runs)?;
    Ok(runs)
}
